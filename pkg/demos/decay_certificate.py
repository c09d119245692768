"""
Decay along the Weyl chamber
============================

A 2x2 rotation between two diagonal blocks moves one chamber coordinate
into another.  Chaining those moves with the Hoelder constants from the
Schatten step gives a bound eps_p(t) that tends to zero.
"""

import math

import numpy as np

from rigidkit.schatten import holder_fit
from rigidkit.weyl_path import chain_sum, epsilon_decay, kak2_forward, kak2_solve, path_schedule, telescoped_sum

s, t = 4.0, -1.0
u = 0.5
v = s + t - u
theta = kak2_solve(v, u, s, t)
print(f"rotation angle {theta:.6f}, |cos| = {abs(math.cos(theta)):.6f} <= e^(t-u) = {math.exp(t - u):.6f}")
print("forward map returns", kak2_forward(s, t, theta))

n = 5
h = holder_fit(n, 4)
levels, N = path_schedule(n, 3.0, 12.0)
print(f"{N} steps from t = 3 to s = 12:", np.round(levels, 3))
print(f"chain sum {chain_sum(n, h, 3.0, 12.0):.4f} <= telescoped {telescoped_sum(n, h, 3.0, 12.0):.4f}"
      f" <= eps {epsilon_decay(n, h, 3.0):.4f}")

for T in (5, 20, 50, 100, 200):
    print(f"eps_4({T:>3}) = {epsilon_decay(n, h, T):.3e}")
