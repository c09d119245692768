"""
Schatten norms of sphere-averaging operators
============================================

T_delta averages a function over the circle of points at inner product
delta.  Its eigenvalue on degree-k harmonics is phi_k(delta), repeated m_k
times, so ||T_delta||_p^p = sum_k m_k |phi_k(delta)|^p.  The series
converges exactly when p > 2 + 2/(n-2).
"""

import math

import numpy as np

from rigidkit.errors import DivergenceError
from rigidkit.schatten import (
    critical_exponent,
    dense_sphere_oracle,
    holder_fit,
    schatten_norm,
    schatten_partial_sums,
    spectral_operator,
)

# on S^3 the delta = 0 operator has a closed form: sum over odd j of j^(2-p)
r = schatten_norm(spectral_operator(4, 0.0), 6, tol=1e-10)
print(f"||T_0||_6 on S^3 in [{r.norm_low:.12f}, {r.norm_high:.12f}]")
print(f"closed form              {(math.pi**4 / 96) ** (1 / 6):.12f}")

# the brute-force eigenvalues of T_0.5 on S^2 up to degree 6
eigs = dense_sphere_oracle(3, 6, 0.5)
print("dense eigenvalues, first 8:", np.round(eigs[:8], 6))

# at or below the critical exponent the sum diverges
print("critical exponent for n = 3:", critical_exponent(3))
try:
    schatten_norm(spectral_operator(3, 0.0), 4)
except DivergenceError as exc:
    print("p = 4, n = 3:", exc)
partial = schatten_partial_sums(spectral_operator(3, 0.0), 4, 10**5)
print("partial sums at K = 1e3, 1e4, 1e5:", [round(float(partial[k]), 3) for k in (1000, 10000, 100000)])

# Hoelder constants where the series converges
h = holder_fit(5, 4)
print(f"n = 5, p = 4: ||T_0 - T_delta||_4 <= {h.C_p:.3f} |delta|^{h.alpha_p:.3f}")
