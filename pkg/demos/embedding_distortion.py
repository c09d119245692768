"""
Distortion of Euclidean embeddings
==================================

The spectral gap forces any embedding into Hilbert space to have
distortion at least sqrt(gap * average squared distance).  We compare
that bound with what an optimiser achieves, and check the small
Banach-Mazur distances used for l^p targets.
"""

import math

from rigidkit.congruence_graphs import cayley_build, elementary_generators, enumerate_group, graph_from_successors
from rigidkit.embedding import bm_small, embed_optimize, john_ratio, lp_profile

square = graph_from_successors([[1, 2, 3, 0], [3, 0, 1, 2]])
print(f"4-cycle into the plane: distortion {embed_optimize(square, 2, 2).distortion:.6f} (optimum sqrt 2)")

for q in (3, 5):
    gens = elementary_generators(2, q)
    g = cayley_build(enumerate_group(2, q, gens), gens)
    r = embed_optimize(g, 2, 8, iterations=300)
    print(f"SL(2,{q}): |V| = {g.num_vertices}, log|V| = {math.log(g.num_vertices):.2f}, "
          f"distortion {r.distortion:.3f} >= bound {r.lower_bound:.3f}")

for k in (1, 2, 3):
    print(f"d(l1_{k}, l2_{k}) = {bm_small(k):.6f}, John ellipsoid ratio {john_ratio(k):.12f}")
prof = lp_profile(4)
print(f"{prof.label}: d_k <= k^{prof.beta}, e_k <= {prof.e_bound(16):.1f} at k = 16")
