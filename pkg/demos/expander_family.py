"""
Spectral gaps of SL(2, Z/qZ)
============================

Cayley graphs with respect to the four elementary matrices E_12(+-1),
E_21(+-1).  The second eigenvalue of A/|S| stays away from 1 across q.
"""

from rigidkit.congruence_graphs import cayley_build, elementary_generators, enumerate_group, schreier_build
from rigidkit.spectral import expander_report

family = []
for q in (3, 5, 7, 11, 13):
    gens = elementary_generators(2, q)
    family.append(cayley_build(enumerate_group(2, q, gens), gens))

rep = expander_report(family, threshold=0.1)
print(rep.to_csv())
print(f"min gap {rep.min_gap:.4f}, Cheeger lower bounds uniformly >= 0.1: {rep.uniform}")

# the action on the projective line is a much smaller quotient
g = schreier_build(2, 13, elementary_generators(2, 13))
print("Schreier graph on P^1(F_13):", g.num_vertices, "vertices, degree", g.degree)
