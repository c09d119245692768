"""
Poincare inequality and half-mass bound
=======================================

Raising the uniform measure on generators to a convolution power pushes
the operator norm on mean-zero functions below 1/2.  Any mean-zero
1-Lipschitz map then keeps half the vertices near the origin.
"""

import numpy as np

from rigidkit.congruence_graphs import cayley_build, elementary_generators, enumerate_group
from rigidkit.embedding import (
    default_measure,
    halfmass_check,
    mu_operator_norm,
    poincare_check,
    random_lipschitz_embedding,
    uniform_measure,
)

gens = elementary_generators(2, 7)
g = cayley_build(enumerate_group(2, 7, gens), gens)
print("uniform measure norm:", round(mu_operator_norm(g, uniform_measure(g)), 4))
mu, nrm, power = default_measure(g)
print(f"power {power}: norm {nrm:.4f}, {len(mu.support)} group elements, longest word {mu.max_word_length}")

rng = np.random.default_rng(0)
for _ in range(5):
    f = random_lipschitz_embedding(g, 8, rng)
    res = poincare_check(g, f, mu, nrm)
    frac = halfmass_check(g, f, mu, mu_norm=nrm)
    print(f"lhs {res.lhs:.4f} <= rhs {res.rhs:.4f};  fraction within 2*sqrt(2)*K: {frac:.3f}")
