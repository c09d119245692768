"""Poincare-inequality harness for coarse non-embeddability of expander graphs.

A finitely supported probability measure mu on words in the generators
acts on functions on the vertex set by

    (pi(mu) f)(x) = sum_gamma mu(gamma) f(gamma^{-1} x).

When ||pi(mu)|| <= 1/2 on mean-zero functions, every mean-zero f obeys
avg ||f||^2 <= 4 avg ||f - pi(mu) f||^2, and 1-Lipschitz maps then keep
half of the vertices within 2 sqrt(2) K of the origin (K = longest word).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, sparse

from .errors import LipschitzError, OptimizationError, UnsupportedError
from .spectral import spectrum_topk

__all__ = [
    "VertexEmbedding",
    "GeneratorMeasure",
    "BanachProfile",
    "PoincareResult",
    "EmbeddingResult",
    "uniform_measure",
    "identity_measure",
    "convolve",
    "mixture",
    "word_permutation",
    "mu_operator_matrix",
    "mu_operator_norm",
    "default_measure",
    "poincare_check",
    "halfmass_check",
    "lipschitz_constant",
    "random_lipschitz_embedding",
    "distortion",
    "distortion_lower_bound",
    "embed_optimize",
    "embedding_report",
    "john_ellipsoid_symmetric",
    "l1_ball",
    "bm_small",
    "john_ratio",
    "lp_profile",
]

MEAN_ZERO_TOL = 1e-9


@dataclass(frozen=True)
class VertexEmbedding:
    graph_id: str
    p: float
    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        if not np.all(np.isfinite(c)):
            raise ValueError("embedding coordinates must be finite")
        object.__setattr__(self, "coords", c)

    @property
    def d(self):
        return self.coords.shape[1]

    @property
    def mean_zero(self):
        c = self.coords
        scale = max(1.0, float(np.sum(np.linalg.norm(c, axis=1))))
        return float(np.linalg.norm(c.sum(axis=0))) <= MEAN_ZERO_TOL * scale

    def centered(self):
        return VertexEmbedding(self.graph_id, self.p, self.coords - self.coords.mean(axis=0))


@dataclass(frozen=True)
class GeneratorMeasure:
    """Probability measure on words; word (j1, ..., jk) stands for s_j1 ... s_jk."""

    support: tuple
    symmetric: bool = False

    def __post_init__(self):
        supp = tuple((tuple(int(j) for j in w), float(p)) for w, p in self.support)
        if not supp:
            raise ValueError("measure has empty support")
        if any(p < 0 for _, p in supp):
            raise ValueError("weights must be non-negative")
        total = math.fsum(p for _, p in supp)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "support", supp)

    @property
    def max_word_length(self):
        return max(len(w) for w, p in self.support if p > 0)


def identity_measure():
    return GeneratorMeasure(((((), 1.0)),), symmetric=True)


def uniform_measure(graph):
    d = graph.degree
    return GeneratorMeasure(tuple(((j,), 1.0 / d) for j in range(d)), symmetric=True)


def word_permutation(graph, word):
    """perm[x] = gamma . x for gamma = s_j1 ... s_jk (rightmost letter acts first)."""
    perm = np.arange(graph.num_vertices)
    for j in reversed(word):
        perm = graph.succ[j][perm]
    return perm


def _merge(graph, items, symmetric):
    acc = {}
    for w, p in items:
        key = word_permutation(graph, w).tobytes()
        if key in acc:
            w0, p0 = acc[key]
            acc[key] = (w if len(w) < len(w0) else w0, p0 + p)
        else:
            acc[key] = (w, p)
    total = math.fsum(p for _, p in acc.values())
    return GeneratorMeasure(tuple((w, p / total) for w, p in acc.values()), symmetric)


def convolve(mu, nu, graph=None):
    """mu * nu; with ``graph``, words acting identically on its vertices are merged
    (keeping the shortest word)."""
    items = [(a + b, p * r) for a, p in mu.support for b, r in nu.support]
    sym = mu.symmetric and nu.symmetric and mu == nu
    if graph is not None:
        return _merge(graph, items, sym)
    return GeneratorMeasure(tuple(items), sym)


def mixture(theta, mu1, mu2):
    items = [(w, theta * p) for w, p in mu1.support] + [(w, (1 - theta) * p) for w, p in mu2.support]
    return GeneratorMeasure(tuple(items), mu1.symmetric and mu2.symmetric)


def mu_operator_matrix(graph, mu):
    """Sparse matrix of pi(mu): row x has weight mu(gamma) at column gamma^{-1} x."""
    nv = graph.num_vertices
    rows, cols, vals = [], [], []
    for w, p in mu.support:
        perm = word_permutation(graph, w)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(nv)
        rows.append(np.arange(nv))
        cols.append(inv)
        vals.append(np.full(nv, p))
    m = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(nv, nv)
    )
    return m.tocsr()


def mu_operator_norm(graph, mu, dense_max=4000, tol=1e-12, seed=0):
    """Operator norm of pi(mu) on mean-zero functions (largest singular value off constants)."""
    m = mu_operator_matrix(graph, mu)
    nv = graph.num_vertices
    if nv == 1:
        return 0.0
    if nv <= dense_max:
        a = m.toarray()
        a = a - a.mean(axis=1, keepdims=True)
        return float(np.linalg.norm(a, 2))
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(nv)
    x -= x.mean()
    x /= np.linalg.norm(x)
    prev = 0.0
    for _ in range(10000):
        y = m.T @ (m @ x)
        y -= y.mean()
        s = float(np.linalg.norm(y))
        if s == 0.0:
            return 0.0
        x = y / s
        if abs(s - prev) <= tol * s:
            break
        prev = s
    return math.sqrt(s)


def default_measure(graph, target=0.5, max_power=16):
    """Smallest convolution power of the uniform measure on S whose norm is <= target.

    Returns ``(mu, norm, power)``.
    """
    base = uniform_measure(graph)
    mu = base
    for power in range(1, max_power + 1):
        nrm = mu_operator_norm(graph, mu)
        if nrm <= target:
            return mu, nrm, power
        mu = convolve(mu, base, graph)
    raise ValueError(f"no convolution power up to {max_power} reaches norm {target}")


@dataclass(frozen=True)
class PoincareResult:
    lhs: float
    rhs: float
    holds: bool
    mu_norm: float

    @property
    def certified(self):
        return self.mu_norm <= 0.5

    @property
    def ratio(self):
        return self.lhs / self.rhs if self.rhs > 0 else math.inf


def _coords(f):
    return f.coords if isinstance(f, VertexEmbedding) else np.atleast_2d(np.asarray(f, float).T).T


def poincare_check(graph, f, mu, mu_norm=None):
    """lhs = avg ||f(x)||^2 and rhs = 4 avg ||f(x) - (pi(mu) f)(x)||^2.

    When ||pi(mu)|| <= 1/2 on mean-zero functions the inequality lhs <= rhs
    is a theorem, so a failure there raises.
    """
    emb = f if isinstance(f, VertexEmbedding) else VertexEmbedding(graph.graph_id, 2.0, f)
    if not emb.mean_zero:
        raise ValueError("f must have mean zero (subtract its average first)")
    c = emb.coords
    if mu_norm is None:
        mu_norm = mu_operator_norm(graph, mu)
    g = c - mu_operator_matrix(graph, mu) @ c
    lhs = float(np.mean(np.sum(c * c, axis=1)))
    rhs = 4.0 * float(np.mean(np.sum(g * g, axis=1)))
    holds = lhs <= rhs + 1e-9
    if mu_norm <= 0.5 and not holds:
        raise ArithmeticError(f"Poincare inequality failed with ||pi(mu)|| = {mu_norm}")
    return PoincareResult(lhs, rhs, holds, float(mu_norm))


def lipschitz_constant(graph, coords):
    """Largest ||f(v) - f(s v)||_2 over generator edges, and the edge attaining it."""
    c = np.atleast_2d(np.asarray(coords, float).T).T
    stretch = np.linalg.norm(c[graph.succ] - c[None, :, :], axis=2)
    j, v = np.unravel_index(int(np.argmax(stretch)), stretch.shape)
    return float(stretch[j, v]), (int(v), int(graph.succ[j, v]))


def halfmass_check(graph, f, mu, K=None, mu_norm=None):
    """Fraction of vertices with ||f(x)|| <= 2 sqrt(2) K for a 1-Lipschitz mean-zero f."""
    emb = f if isinstance(f, VertexEmbedding) else VertexEmbedding(graph.graph_id, 2.0, f)
    if not emb.mean_zero:
        raise ValueError("f must have mean zero (subtract its average first)")
    lip, edge = lipschitz_constant(graph, emb.coords)
    if lip > 1.0 + 1e-12:
        raise LipschitzError(f"edge {edge} stretched by {lip!r} > 1", edge, lip)
    if K is None:
        K = mu.max_word_length
    if mu_norm is None:
        mu_norm = mu_operator_norm(graph, mu)
    radius = 2.0 * math.sqrt(2.0) * K
    frac = float(np.mean(np.linalg.norm(emb.coords, axis=1) <= radius))
    if mu_norm <= 0.5 and frac < 0.5:
        raise ArithmeticError(f"half-mass bound failed: fraction {frac} < 1/2")
    return frac


def random_lipschitz_embedding(graph, d, rng, scale=1.0):
    """Random mean-zero map V -> R^d rescaled to have Lipschitz constant ``scale``."""
    c = rng.standard_normal((graph.num_vertices, d))
    c -= c.mean(axis=0)
    lip, _ = lipschitz_constant(graph, c)
    return c * (scale / lip)


def _pair_index(nv):
    i, j = np.triu_indices(nv, 1)
    return i, j


def distortion(dist, coords, p=2.0):
    """(max ratio) * (max inverse ratio) of ||f(x) - f(y)||_p / d(x, y) over vertex pairs."""
    i, j = _pair_index(len(dist))
    if not len(i):
        return 1.0
    diff = coords[i] - coords[j]
    norms = np.linalg.norm(diff, ord=p, axis=1)
    ratio = norms / dist[i, j]
    if np.any(ratio <= 0):
        return math.inf
    return float(ratio.max() / ratio.min())


def distortion_lower_bound(graph, dist=None, d=None, p=2.0, tol=1e-10):
    """Spectral lower bound on the distortion of any embedding into l^2 (or l^p_d).

    For an embedding scaled to be 1-Lipschitz, the average of
    ||f(x) - f(y)||^2 over pairs is at most 1/gap, while it is at least the
    average of d(x, y)^2 / D^2.  Hence D >= sqrt(gap * avg d^2).  For l^p_d
    the bound is divided by d^{|1/2 - 1/p|}.
    """
    if dist is None:
        dist = graph.distance_matrix()
    if graph.num_vertices < 2:
        return 1.0
    vals, _, _ = spectrum_topk(graph, 2, tol=tol)
    gap = 1.0 - float(vals[1])
    bound = math.sqrt(max(gap, 0.0) * float(np.mean(dist.astype(float) ** 2)))
    if d is not None and p != 2:
        bound /= d ** abs(0.5 - 1.0 / p)
    return max(bound, 1.0)


def _mds(dist, d):
    nv = len(dist)
    j = np.eye(nv) - 1.0 / nv
    b = -0.5 * j @ (dist.astype(float) ** 2) @ j
    vals, vecs = np.linalg.eigh(b)
    order = np.argsort(vals)[::-1][:d]
    x = vecs[:, order] * np.sqrt(np.maximum(vals[order], 0.0))
    if x.shape[1] < d:
        x = np.hstack([x, np.zeros((nv, d - x.shape[1]))])
    return x


def _objective(flat, shape, i, j, logd, p, tau):
    x = flat.reshape(shape)
    diff = x[i] - x[j]
    absd = np.abs(diff)
    norm_p = np.sum(absd**p, axis=1)
    norm = norm_p ** (1.0 / p)
    if np.any(norm <= 0) or not np.all(np.isfinite(norm)):
        return np.inf, np.zeros_like(flat)
    logr = np.log(norm) - logd
    zp = logr / tau
    zm = -logr / tau
    mp, mm = zp.max(), zm.max()
    ep, em = np.exp(zp - mp), np.exp(zm - mm)
    val = tau * (mp + math.log(ep.sum())) + tau * (mm + math.log(em.sum()))
    w = ep / ep.sum() - em / em.sum()
    dlog = np.sign(diff) * absd ** (p - 1) / norm_p[:, None]
    g_pair = w[:, None] * dlog
    grad = np.zeros_like(x)
    np.add.at(grad, i, g_pair)
    np.add.at(grad, j, -g_pair)
    return val, grad.ravel()


@dataclass(frozen=True)
class EmbeddingResult:
    embedding: VertexEmbedding
    distortion: float
    lower_bound: float
    iterations: int


def embed_optimize(graph, p=2.0, d=2, iterations=300, seed=0, dist=None):
    """Low-distortion embedding of the graph metric into l^p_d.

    Starts from classical MDS (a spectral initialisation) plus a seeded
    perturbation, then minimises a soft-max surrogate of
    log(max ratio) + log(max inverse ratio) with L-BFGS under a decreasing
    temperature.  The best true distortion seen is returned together with
    the spectral lower bound valid for any embedding into l^p_d.
    """
    if not 1.0 <= p < math.inf:
        raise UnsupportedError("p must be finite and >= 1")
    if d > 64:
        raise ValueError("target dimension is capped at 64")
    if dist is None:
        dist = graph.distance_matrix()
    nv = graph.num_vertices
    lower = distortion_lower_bound(graph, dist, d, p)
    if nv < 2:
        return EmbeddingResult(VertexEmbedding(graph.graph_id, p, np.zeros((nv, d))), 1.0, 1.0, 0)
    if np.any(dist < 0):
        raise ValueError("graph is disconnected; distortion is undefined")
    rng = np.random.default_rng(seed)
    i, j = _pair_index(nv)
    logd = np.log(dist[i, j].astype(float))
    x0 = _mds(dist, d)
    spread = float(np.std(x0)) or 1.0
    x0 = x0 + 1e-3 * spread * rng.standard_normal(x0.shape)
    best_x, best = x0, distortion(dist, x0, p)
    taus = [0.1, 0.03, 0.01, 0.003]
    per_stage = max(1, iterations // len(taus))
    used = 0
    x = x0
    failures = 0
    for tau in taus:
        for _attempt in range(3):
            res = optimize.minimize(
                _objective, x.ravel(), args=(x.shape, i, j, logd, p, tau), jac=True,
                method="L-BFGS-B", options={"maxiter": per_stage},
            )
            if np.all(np.isfinite(res.x)) and np.isfinite(res.fun):
                break
            failures += 1
            x = best_x + 1e-2 * spread * rng.standard_normal(best_x.shape)
        else:
            raise OptimizationError("distortion optimizer diverged after restarts")
        used += int(res.nit)
        x = res.x.reshape(x.shape)
        dval = distortion(dist, x, p)
        if dval < best:
            best, best_x = dval, x.copy()
    return EmbeddingResult(VertexEmbedding(graph.graph_id, p, best_x), best, lower, used)


def embedding_report(graphs, p=2.0, d=8, n_random=100, iterations=300, seed=0, optimize_upto=400):
    """Per-graph Poincare / half-mass / distortion summary (dict, JSON-ready).

    Distortion optimisation is skipped (reported as None) above
    ``optimize_upto`` vertices.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for g in graphs:
        mu, nrm, power = default_measure(g)
        K = mu.max_word_length
        ratios, fracs = [], []
        for _ in range(n_random):
            c = random_lipschitz_embedding(g, d, rng)
            res = poincare_check(g, c, mu, mu_norm=nrm)
            ratios.append(res.ratio)
            fracs.append(halfmass_check(g, c, mu, K=K, mu_norm=nrm))
        dist = g.distance_matrix()
        if g.num_vertices <= optimize_upto:
            emb = embed_optimize(g, p, d, iterations, seed, dist)
            dval, lower = emb.distortion, emb.lower_bound
        else:
            dval, lower = None, distortion_lower_bound(g, dist, d, p)
        rows.append({
            "graph_id": g.graph_id,
            "num_vertices": g.num_vertices,
            "log_num_vertices": math.log(g.num_vertices),
            "mu_power": power,
            "mu_norm": nrm,
            "K": K,
            "max_poincare_ratio": max(ratios) if ratios else None,
            "min_halfmass_fraction": min(fracs) if fracs else None,
            "distortion": dval,
            "distortion_lower_bound": lower,
            "target": {"p": p, "d": d},
        })
    return {"graphs": rows}


def report_to_json(report):
    return json.dumps(report, sort_keys=True, indent=2)


def report_to_csv(report, fh=None):
    buf = fh if fh is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["graph_id", "num_vertices", "log_num_vertices", "distortion", "distortion_lower_bound"])
    for r in report["graphs"]:
        w.writerow([r["graph_id"], r["num_vertices"], repr(r["log_num_vertices"]),
                    "" if r["distortion"] is None else repr(r["distortion"]),
                    repr(r["distortion_lower_bound"])])
    if fh is None:
        return buf.getvalue()


def john_ellipsoid_symmetric(normals, tol=1e-14, max_iter=100000, seed=0):
    """Maximal-volume ellipsoid inscribed in {x : |a_i . x| <= 1} (centred by symmetry).

    Solves the dual D-optimal design problem over the facet normals with
    Frank-Wolfe plus away steps.  Returns B with ellipsoid = B (unit ball).
    """
    a = np.atleast_2d(np.asarray(normals, dtype=float))
    m, k = a.shape
    rng = np.random.default_rng(seed)
    u = rng.random(m) + 0.5
    u /= u.sum()
    for _ in range(max_iter):
        mat = (a * u[:, None]).T @ a
        g = np.einsum("ij,jk,ik->i", a, np.linalg.inv(mat), a)
        jmax = int(np.argmax(g))
        supp = np.flatnonzero(u > 0)
        lmin = int(supp[np.argmin(g[supp])])
        eps_plus = g[jmax] / k - 1
        eps_minus = 1 - g[lmin] / k
        if max(eps_plus, eps_minus) <= tol:
            break
        if eps_plus >= eps_minus:
            beta = eps_plus / (g[jmax] - 1)
            u *= 1 - beta
            u[jmax] += beta
        else:
            beta = min(eps_minus / (g[lmin] - 1), u[lmin] / (1 - u[lmin]))
            u *= 1 + beta
            u[lmin] -= beta
            u[lmin] = max(u[lmin], 0.0)
    mat = (a * u[:, None]).T @ a
    x = np.linalg.inv(mat) / k
    vals, vecs = np.linalg.eigh(x)
    return vecs @ np.diag(np.sqrt(vals)) @ vecs.T


def l1_ball(k):
    """Facet normals (one per +- pair) and vertices of the unit l^1 ball in R^k."""
    signs = np.array([(1,) + s for s in np.ndindex(*(2,) * (k - 1))], dtype=float)
    signs[:, 1:] = 1 - 2 * signs[:, 1:]
    vertices = np.vstack([np.eye(k), -np.eye(k)])
    return signs, vertices


def john_ratio(k):
    """Smallest lambda with B_1^k inside lambda * E, E the John ellipsoid of B_1^k."""
    normals, vertices = l1_ball(k)
    b = john_ellipsoid_symmetric(normals)
    return float(np.max(np.linalg.norm(np.linalg.solve(b, vertices.T), axis=0)))


def bm_small(k, verify=True):
    """Banach-Mazur distance d(l^1_k, l^2_k) = sqrt(k) for k in {1, 2, 3}."""
    if k not in (1, 2, 3):
        raise UnsupportedError("closed form checked only for k <= 3")
    value = math.sqrt(k)
    if verify:
        r = john_ratio(k)
        if abs(r - value) > 1e-9:
            raise ArithmeticError(f"John ellipsoid ratio {r!r} disagrees with sqrt({k})")
    return value


@dataclass(frozen=True)
class BanachProfile:
    """Growth law d_k(X) <= C k^beta for the Euclidean distance of k-dim subspaces."""

    label: str
    beta: float
    C: float

    def __post_init__(self):
        if not 0.0 <= self.beta <= 0.5:
            raise ValueError("beta must lie in [0, 1/2]")
        if self.C < 1.0:
            raise ValueError("C must be >= 1 since d_1(X) = 1")

    def d_bound(self, k):
        return self.C * k**self.beta

    def e_bound(self, k):
        # Pisier: e_k(X) <= 2 d_k(X)
        return 2.0 * self.d_bound(k)

    def noncoarse_applicable(self):
        return self.beta < 0.5


def lp_profile(p):
    """d_k(L^p) <= k^{|1/2 - 1/p|} (Lewis), as a BanachProfile."""
    return BanachProfile(f"L^{p}", abs(0.5 - 1.0 / p), 1.0)
