import itertools

import numpy as np
import pytest

from rigidkit.congruence_graphs import (
    GeneratingSet,
    ModMatrix,
    cayley_build,
    elementary_generators,
    enumerate_group,
    graph_from_successors,
    projective_points,
    read_graph,
    reduce_mod,
    schreier_build,
    sl_order,
)
from rigidkit.errors import ResourceError, UnsupportedError


def brute_force_sl_count(n, q):
    count = 0
    for entries in itertools.product(range(q), repeat=n * n):
        a = np.array(entries).reshape(n, n)
        if round(np.linalg.det(a)) % q == 1 % q:
            count += 1
    return count


@pytest.mark.parametrize("n,q", [(2, 2), (2, 3), (2, 5), (3, 2)])
def test_order_formula_matches_brute_force(n, q):
    assert sl_order(n, q) == brute_force_sl_count(n, q)


@pytest.mark.parametrize("n,q", [(2, 2), (2, 3), (2, 7), (2, 11), (3, 2), (3, 3)])
def test_enumeration_reaches_full_group(n, q):
    table = enumerate_group(n, q, elementary_generators(n, q))
    assert len(table) == sl_order(n, q)
    assert len(set(table.codes.tolist())) == len(table)


def test_composite_modulus_enumerates_without_formula():
    table = enumerate_group(2, 4, elementary_generators(2, 4))
    # |SL(2, Z/4Z)| = 4^3 (1 - 1/4) = 48
    assert len(table) == 48
    with pytest.raises(UnsupportedError):
        sl_order(2, 4)


def test_size_cap_and_cache(tmp_path):
    gens = elementary_generators(2, 5)
    with pytest.raises(ResourceError):
        enumerate_group(2, 5, gens, size_cap=50)
    first = enumerate_group(2, 5, gens, cache_dir=str(tmp_path))
    assert list(tmp_path.iterdir())
    second = enumerate_group(2, 5, gens, cache_dir=str(tmp_path))
    assert np.array_equal(first.elements, second.elements)


def test_mod_matrix_arithmetic():
    a = ModMatrix.from_rows([[2, 1], [1, 1]], 7)
    assert (a @ a.inverse()) == ModMatrix.identity(2, 7)
    with pytest.raises(ValueError):
        ModMatrix.from_rows([[2, 0], [0, 2]], 7)
    assert reduce_mod([[5, 2], [2, 1]], 3).entries == (2, 2, 2, 1)
    with pytest.raises(ValueError):
        reduce_mod([[2, 0], [0, 1]], 3)


def test_generating_set_symmetry():
    gens = elementary_generators(3, 5)
    assert len(gens) == 12 and gens.is_symmetric()
    inv = gens.inverse_index()
    for j, k in enumerate(inv):
        assert gens.elements[j] @ gens.elements[k] == ModMatrix.identity(3, 5)
    half = GeneratingSet(gens.elements[::2], "half")
    assert not half.is_symmetric()


@pytest.mark.parametrize("q", [2, 3, 5])
def test_cayley_graph_structure(q):
    gens = elementary_generators(2, q)
    g = cayley_build(enumerate_group(2, q, gens), gens)
    assert g.is_symmetric() and g.is_connected()
    assert np.all(g.degrees() == 4)
    a = g.adjacency().toarray()
    assert np.array_equal(a, a.T)
    assert np.allclose(a.sum(axis=1), 4)


def test_multiset_generators_mod_2_keep_degree():
    gens = elementary_generators(2, 2)
    g = cayley_build(enumerate_group(2, 2, gens), gens)
    # E_12(1) = E_12(-1) mod 2: every edge is doubled
    assert g.degree == 4 and g.num_vertices == 6
    assert all(m == 2 for _, _, m in g.edges())


def test_loops_count_once():
    # one generator acting as a loop everywhere plus a 2-cycle
    g = graph_from_successors([[0, 1, 2, 3], [1, 0, 3, 2], [1, 0, 3, 2]])
    assert g.num_loops() == 4
    assert np.all(g.degrees() == 3)
    assert np.allclose(g.normalized_adjacency().sum(axis=1), 1)


def test_text_roundtrip(tmp_path):
    gens = elementary_generators(2, 3)
    g = cayley_build(enumerate_group(2, 3, gens), gens)
    path = tmp_path / "g.txt"
    g.write(str(path))
    h = read_graph(str(path))
    assert np.array_equal(g.succ, h.succ)
    assert g.to_text().splitlines()[0] == "2 3 24 4"


def test_relabel_preserves_spectrum():
    gens = elementary_generators(2, 3)
    g = cayley_build(enumerate_group(2, 3, gens), gens)
    perm = np.random.default_rng(0).permutation(g.num_vertices)
    h = g.relabeled(perm)
    ev = lambda x: np.sort(np.linalg.eigvalsh(x.normalized_adjacency().toarray()))
    assert np.allclose(ev(g), ev(h))


def test_schreier_projective_line():
    g = schreier_build(2, 5, elementary_generators(2, 5))
    assert g.num_vertices == len(projective_points(2, 5)) == 6
    assert np.all(g.degrees() == 4) and g.is_connected()
    v = schreier_build(2, 3, elementary_generators(2, 3), action="vectors")
    assert v.num_vertices == 8


def test_distances():
    cyc = graph_from_successors([[1, 2, 3, 4, 5, 0], [5, 0, 1, 2, 3, 4]])
    assert cyc.distances_from(0).tolist() == [0, 1, 2, 3, 2, 1]
    disc = graph_from_successors([[1, 0, 3, 2]])
    assert not disc.is_connected()
