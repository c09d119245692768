"""
Spherical functions on S^{n-1}
==============================

phi_k is the normalised Gegenbauer polynomial: phi_k(1) = 1 and phi_k
decays like k^{-(n-2)/2} away from the poles.
"""

import numpy as np

from rigidkit.gegenbauer import envelope_constant, multiplicity, phi_eval, phi_values

n = 5
print("multiplicities m_k on S^4:", [multiplicity(n, k) for k in range(8)])

# both backends, with their error bars
for k, x in [(3, 0.2), (40, -0.7), (400, 0.1)]:
    rec = phi_eval(n, k, x)
    quad = phi_eval(n, k, x, backend="quadrature")
    print(f"phi_{k}({x}) recurrence {rec[0]: .15f} +- {rec[1]:.1e}   quadrature {quad[0]: .15f}")

# the decay envelope, checked on the first few thousand degrees
x = 0.3
ks = np.arange(1, 5001)
vals = np.abs(phi_values(n, 5000, x)[1:])
scaled = vals * ks ** ((n - 2) / 2)
print(f"max |phi_k(0.3)| k^(3/2) over k <= 5000: {scaled.max():.4f}")
print(f"explicit envelope constant:               {envelope_constant(n, x):.4f}")
