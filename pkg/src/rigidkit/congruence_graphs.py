"""Congruence quotients SL(n, Z/qZ) and their Cayley / Schreier multigraphs.

Graph convention: an edge {v, w} has multiplicity #{s in S : s v = w}; a
loop counts 1 towards the degree, so every vertex has degree |S|.  Graphs
store the successor table ``succ[j, v] = index of s_j . v``, which is the
directed generator-edge list of the on-disk format.
"""

from __future__ import annotations

import hashlib
import itertools
import os
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import sparse

from .errors import ResourceError, UnsupportedError

__all__ = [
    "ModMatrix",
    "GeneratingSet",
    "GroupTable",
    "CayleyGraph",
    "is_prime",
    "sl_order",
    "int_det",
    "reduce_mod",
    "elementary_generators",
    "enumerate_group",
    "cayley_build",
    "schreier_build",
    "orbit_graph",
    "projective_points",
    "graph_from_successors",
    "read_graph",
]

SIZE_CAP = 10**7


def is_prime(q):
    q = int(q)
    if q < 2:
        return False
    if q < 4:
        return True
    if q % 2 == 0:
        return False
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


def sl_order(n, q):
    """|SL(n, F_q)| = q^{n(n-1)/2} prod_{k=2}^n (q^k - 1) for prime q."""
    if not is_prime(q):
        raise UnsupportedError(f"order formula needs prime q; got {q} (enumerate instead)")
    out = q ** (n * (n - 1) // 2)
    for k in range(2, n + 1):
        out *= q**k - 1
    return out


def int_det(rows):
    """Exact determinant of an integer matrix (fraction-free elimination)."""
    a = [[Fraction(x) for x in row] for row in rows]
    n = len(a)
    det = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if a[r][i] != 0), None)
        if piv is None:
            return 0
        if piv != i:
            a[i], a[piv] = a[piv], a[i]
            det = -det
        det *= a[i][i]
        for r in range(i + 1, n):
            f = a[r][i] / a[i][i]
            if f:
                for c in range(i, n):
                    a[r][c] -= f * a[i][c]
    return int(det)


def _adjugate(rows):
    n = len(rows)
    if n == 1:
        return [[1]]
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [r[:j] + r[j + 1:] for k, r in enumerate(rows) if k != i]
            adj[j][i] = (-1) ** (i + j) * int_det(minor)
    return adj


@dataclass(frozen=True)
class ModMatrix:
    """Element of SL(n, Z/qZ), entries row-major in [0, q)."""

    n: int
    q: int
    entries: tuple

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("modulus must be >= 2")
        if len(self.entries) != self.n * self.n:
            raise ValueError("entries must have n*n elements")
        if any(not 0 <= e < self.q for e in self.entries):
            raise ValueError("entries must be reduced mod q")
        if int_det(self.rows()) % self.q != 1 % self.q:
            raise ValueError("determinant is not 1 mod q")

    @classmethod
    def from_rows(cls, rows, q):
        n = len(rows)
        return cls(n, q, tuple(int(x) % q for row in rows for x in row))

    @classmethod
    def identity(cls, n, q):
        return cls.from_rows(np.eye(n, dtype=int).tolist(), q)

    def rows(self):
        n = self.n
        return [list(self.entries[i * n:(i + 1) * n]) for i in range(n)]

    def array(self):
        return np.array(self.entries, dtype=np.int64).reshape(self.n, self.n)

    def __matmul__(self, other):
        prod = (self.array() @ other.array()) % self.q
        return ModMatrix.from_rows(prod.tolist(), self.q)

    def inverse(self):
        # det = 1 mod q, so the adjugate is the inverse
        adj = _adjugate(self.rows())
        return ModMatrix.from_rows(adj, self.q)


def reduce_mod(int_matrix, q):
    """Image of an integer matrix of determinant 1 in SL(n, Z/qZ)."""
    rows = [[int(x) for x in row] for row in np.asarray(int_matrix).tolist()]
    if int_det(rows) != 1:
        raise ValueError("integer matrix must have determinant exactly 1")
    return ModMatrix.from_rows(rows, q)


@dataclass(frozen=True)
class GeneratingSet:
    """Multiset S of elements of SL(n, Z/qZ); ``name`` identifies it in reports."""

    elements: tuple
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.elements:
            raise ValueError("generating set is empty")
        ns = {(g.n, g.q) for g in self.elements}
        if len(ns) != 1:
            raise ValueError("generators must share n and q")

    @property
    def n(self):
        return self.elements[0].n

    @property
    def q(self):
        return self.elements[0].q

    def __len__(self):
        return len(self.elements)

    def is_symmetric(self):
        return Counter(self.elements) == Counter(g.inverse() for g in self.elements)

    def inverse_index(self):
        """Index map j -> j' with s_{j'} = s_j^{-1}, pairing multiset copies."""
        pool = {}
        for j, g in enumerate(self.elements):
            pool.setdefault(g, []).append(j)
        used = {g: 0 for g in pool}
        out = []
        for g in self.elements:
            h = g.inverse()
            if h not in pool:
                raise ValueError("generating set is not symmetric")
            out.append(pool[h][used[h] % len(pool[h])])
            used[h] += 1
        return out

    @property
    def identifier(self):
        h = hashlib.sha256(repr([g.entries for g in self.elements]).encode()).hexdigest()[:10]
        return f"{self.name}[n={self.n},q={self.q},|S|={len(self)},{h}]"

    def stacked(self):
        return np.stack([g.array() for g in self.elements])


def elementary_generators(n, q):
    """All elementary transvections E_ij(+-1), i != j: symmetric, generates SL(n, Z)."""
    gens = []
    for i, j in itertools.permutations(range(n), 2):
        for sign in (1, -1):
            m = np.eye(n, dtype=int)
            m[i, j] = sign
            gens.append(reduce_mod(m, q))
    return GeneratingSet(tuple(gens), name="elementary")


def _encode(arr, q):
    # arr: (..., n*n) entries in [0, q)
    flat = arr.reshape(arr.shape[0], -1)
    weights = q ** np.arange(flat.shape[1], dtype=np.int64)
    return flat @ weights


@dataclass(frozen=True)
class GroupTable:
    """Elements of the subgroup generated by ``gens``, in BFS order from the identity."""

    n: int
    q: int
    elements: np.ndarray = field(repr=False)
    codes: np.ndarray = field(repr=False)
    generators: GeneratingSet | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.elements)

    def index_of(self, mats):
        """Vertex indices of a stack of (m, n, n) matrices; -1 when absent."""
        codes = _encode(np.asarray(mats) % self.q, self.q)
        order = np.argsort(self.codes, kind="stable")
        sorted_codes = self.codes[order]
        pos = np.searchsorted(sorted_codes, codes)
        pos = np.minimum(pos, len(sorted_codes) - 1)
        found = sorted_codes[pos] == codes
        return np.where(found, order[pos], -1)

    def is_full(self):
        """True when the table is all of SL(n, F_q) (prime q only)."""
        return len(self) == sl_order(self.n, self.q)


def _cache_path(cache_dir, n, q, gens):
    key = hashlib.sha256(repr((n, q, [g.entries for g in gens.elements])).encode()).hexdigest()[:16]
    return os.path.join(cache_dir, f"sl{n}_{q}_{key}.npz")


def enumerate_group(n, q, gens, size_cap=SIZE_CAP, cache_dir=None):
    """Breadth-first closure of {I} under left multiplication by ``gens``."""
    if gens.n != n or gens.q != q:
        raise ValueError("generators live in a different SL(n, Z/qZ)")
    if q ** (n * n) >= 2**62:
        raise ResourceError(f"code space q^(n^2) too large for n={n}, q={q}")
    if cache_dir:
        path = _cache_path(cache_dir, n, q, gens)
        if os.path.exists(path):
            data = np.load(path)
            return GroupTable(n, q, data["elements"], data["codes"], gens)
    mats = gens.stacked()
    ident = np.eye(n, dtype=np.int64)[None]
    seen = {int(_encode(ident, q)[0])}
    frontier = ident
    chunks = [ident]
    total = 1
    while len(frontier):
        prods = np.einsum("gij,bjk->gbik", mats, frontier) % q
        prods = prods.reshape(-1, n, n)
        codes = _encode(prods, q)
        _, first = np.unique(codes, return_index=True)
        first.sort()
        fresh = [i for i in first.tolist() if int(codes[i]) not in seen]
        seen.update(int(codes[i]) for i in fresh)
        frontier = prods[fresh]
        total += len(fresh)
        if total > size_cap:
            raise ResourceError(f"group exceeds size cap {size_cap}")
        if len(fresh):
            chunks.append(frontier)
    elements = np.concatenate(chunks)
    table = GroupTable(n, q, elements, _encode(elements, q), gens)
    if cache_dir:
        os.makedirs(cache_dir, exist_ok=True)
        np.savez(_cache_path(cache_dir, n, q, gens), elements=elements, codes=table.codes)
    return table


@dataclass(frozen=True)
class CayleyGraph:
    """|S|-regular multigraph given by the action of generators on a vertex set.

    ``succ[j, v]`` is the vertex s_j . v.  Adjacency A[v, w] = #{j : succ[j, v] = w};
    loops sit on the diagonal and count 1 towards the degree.
    """

    succ: np.ndarray = field(repr=False)
    labels: list = field(repr=False)
    n: int = 0
    q: int = 0
    gen_id: str = "custom"
    kind: str = "cayley"
    inverse_index: tuple | None = field(default=None, repr=False)

    @property
    def num_vertices(self):
        return self.succ.shape[1]

    @property
    def degree(self):
        return self.succ.shape[0]

    @property
    def graph_id(self):
        return f"{self.kind}:{self.gen_id}:|V|={self.num_vertices}"

    def adjacency(self):
        d, nv = self.succ.shape
        rows = np.tile(np.arange(nv), d)
        a = sparse.coo_matrix((np.ones(d * nv), (rows, self.succ.ravel())), shape=(nv, nv))
        return a.tocsr()

    def normalized_adjacency(self):
        return self.adjacency() / self.degree

    def matvec(self, x):
        """(A/|S|) x computed from the successor table."""
        return x[self.succ].mean(axis=0)

    def degrees(self):
        """Degree of each vertex under the loop-counts-one convention."""
        a = self.adjacency().tocoo()
        deg = np.zeros(self.num_vertices)
        np.add.at(deg, a.row, a.data)
        return deg

    def edges(self):
        """Undirected edge multiset as sorted (v, w, multiplicity) with v <= w."""
        a = self.adjacency().tocoo()
        out = [(int(v), int(w), int(m)) for v, w, m in zip(a.row, a.col, a.data) if v <= w]
        return sorted(out)

    def num_loops(self):
        return int(np.sum(self.succ == np.arange(self.num_vertices)[None, :]))

    def is_symmetric(self):
        a = self.adjacency()
        return (a != a.T).nnz == 0

    def component_labels(self):
        nv = self.num_vertices
        comp = np.full(nv, -1)
        c = 0
        for start in range(nv):
            if comp[start] >= 0:
                continue
            comp[start] = c
            stack = [start]
            while stack:
                v = stack.pop()
                for w in self.succ[:, v]:
                    if comp[w] < 0:
                        comp[w] = c
                        stack.append(int(w))
            c += 1
        return comp

    def is_connected(self):
        return bool(np.all(self.component_labels() == 0))

    def distances_from(self, source):
        nv = self.num_vertices
        dist = np.full(nv, -1, dtype=np.int64)
        dist[source] = 0
        frontier = np.array([source])
        d = 0
        while len(frontier):
            d += 1
            nxt = np.unique(self.succ[:, frontier].ravel())
            nxt = nxt[dist[nxt] < 0]
            dist[nxt] = d
            frontier = nxt
        return dist

    def distance_matrix(self):
        return np.stack([self.distances_from(v) for v in range(self.num_vertices)])

    def relabeled(self, perm):
        """Graph with vertex v renamed perm[v]."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        succ = perm[self.succ[:, inv]]
        labels = [self.labels[i] for i in inv]
        return CayleyGraph(succ, labels, self.n, self.q, self.gen_id, self.kind, self.inverse_index)

    def to_text(self):
        """Header ``n q |V| |S|`` then one ``src dst gen_index`` line per generator edge."""
        lines = [f"{self.n} {self.q} {self.num_vertices} {self.degree}"]
        for j in range(self.degree):
            for v in range(self.num_vertices):
                lines.append(f"{v} {int(self.succ[j, v])} {j}")
        return "\n".join(lines) + "\n"

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_text())


def read_graph(text_or_path):
    """Parse the graph file format back into a CayleyGraph."""
    if "\n" not in text_or_path and os.path.exists(text_or_path):
        with open(text_or_path) as fh:
            text = fh.read()
    else:
        text = text_or_path
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    n, q, nv, d = (int(x) for x in lines[0].split())
    succ = np.full((d, nv), -1, dtype=np.int64)
    for ln in lines[1:]:
        src, dst, j = (int(x) for x in ln.split())
        succ[j, src] = dst
    if np.any(succ < 0):
        raise ValueError("graph file is missing generator edges")
    return CayleyGraph(succ, list(range(nv)), n, q, "file", "file")


def graph_from_successors(succ, labels=None, gen_id="custom", kind="toy"):
    succ = np.asarray(succ, dtype=np.int64)
    if labels is None:
        labels = list(range(succ.shape[1]))
    g = CayleyGraph(succ, list(labels), 0, 0, gen_id, kind)
    if not g.is_symmetric():
        raise ValueError("successor table does not define an undirected multigraph")
    return g


def cayley_build(table, gens):
    """Cayley graph of the enumerated group with respect to (multiset) ``gens``."""
    if not gens.is_symmetric():
        raise ValueError("generating set must be closed under inverses")
    mats = gens.stacked()
    succ = np.empty((len(gens), len(table)), dtype=np.int64)
    for j, m in enumerate(mats):
        prods = np.einsum("ij,bjk->bik", m, table.elements) % table.q
        idx = table.index_of(prods)
        if np.any(idx < 0):
            raise ValueError("generator leaves the enumerated vertex set")
        succ[j] = idx
    labels = [tuple(int(x) for x in row.ravel()) for row in table.elements]
    return CayleyGraph(succ, labels, table.n, table.q, gens.identifier, "cayley",
                       tuple(gens.inverse_index()))


def projective_points(n, q):
    """Normalised representatives of P^{n-1}(F_q): first nonzero coordinate equal to 1."""
    if not is_prime(q):
        raise UnsupportedError("projective action needs prime q")
    pts = []
    for lead in range(n):
        for tail in itertools.product(range(q), repeat=n - lead - 1):
            pts.append((0,) * lead + (1,) + tail)
    return pts


def _normalize_projective(vecs, q):
    # scale each row so that its first nonzero entry is 1
    out = vecs.copy()
    lead = np.argmax(out != 0, axis=1)
    pivots = out[np.arange(len(out)), lead]
    inv = np.array([pow(int(p), -1, q) for p in pivots], dtype=np.int64)
    return (out * inv[:, None]) % q


def orbit_graph(gens, base, act, key=tuple):
    """Schreier graph on the orbit of ``base``; ``act(matrix, point) -> point``."""
    mats = [g for g in gens.elements]
    index = {key(base): 0}
    points = [base]
    succ_rows = [[] for _ in mats]
    head = 0
    while head < len(points):
        x = points[head]
        for j, m in enumerate(mats):
            y = act(m, x)
            k = key(y)
            if k not in index:
                if len(points) >= SIZE_CAP:
                    raise ResourceError("orbit exceeds size cap")
                index[k] = len(points)
                points.append(y)
            succ_rows[j].append(index[k])
        head += 1
    return np.array(succ_rows, dtype=np.int64), points


def schreier_build(n, q, gens, action="projective"):
    """Schreier graph of the action on P^{n-1}(F_q) or on (Z/qZ)^n minus 0."""
    if gens.n != n or gens.q != q:
        raise ValueError("generators live in a different SL(n, Z/qZ)")
    if not gens.is_symmetric():
        raise ValueError("generating set must be closed under inverses")
    if action == "projective":
        if not is_prime(q):
            raise UnsupportedError("projective action needs prime q")

        def act(m, x):
            y = (m.array() @ np.array(x)) % q
            return tuple(int(v) for v in _normalize_projective(y[None], q)[0])
    elif action == "vectors":

        def act(m, x):
            return tuple(int(v) for v in (m.array() @ np.array(x)) % q)
    else:
        raise ValueError(f"unknown action {action!r}")
    base = (1,) + (0,) * (n - 1)
    succ, points = orbit_graph(gens, base, act)
    return CayleyGraph(succ, points, n, q, gens.identifier, f"schreier-{action}",
                       tuple(gens.inverse_index()))
