"""Spectra and Cheeger constants of regular multigraphs.

The canonical operator is the normalised adjacency P = A/|S| (loops on the
diagonal), whose spectrum lies in [-1, 1] with top eigenvalue 1 on the
constant vector.  Eigenpairs come from a Lanczos iteration with full
reorthogonalisation, run on the complement of already-locked eigenvectors
so repeated eigenvalues are recovered one copy at a time.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, ResourceError

__all__ = [
    "SpectralReport",
    "FamilyReport",
    "spectrum_topk",
    "cheeger_exact",
    "cheeger_bounds",
    "moore_diameter_bound",
    "spectral_report",
    "expander_report",
]

EXACT_CHEEGER_MAX = 24


def _project(x, locked):
    if locked.shape[1]:
        x = x - locked @ (locked.T @ x)
        x = x - locked @ (locked.T @ x)
    return x


def _lanczos_top(matvec, locked, m, start):
    """Largest Ritz pair of the operator on the complement of ``locked``."""
    nv = len(start)
    q = _project(start, locked)
    q /= np.linalg.norm(q)
    basis = np.zeros((nv, m))
    alpha = np.zeros(m)
    beta = np.zeros(m)
    j_end = m
    for j in range(m):
        basis[:, j] = q
        w = _project(matvec(q), locked)
        alpha[j] = q @ w
        w -= basis[:, : j + 1] @ (basis[:, : j + 1].T @ w)
        w -= basis[:, : j + 1] @ (basis[:, : j + 1].T @ w)
        b = np.linalg.norm(w)
        if b < 1e-13 or j == m - 1:
            j_end = j + 1
            break
        beta[j] = b
        q = w / b
    t = np.diag(alpha[:j_end]) + np.diag(beta[: j_end - 1], 1) + np.diag(beta[: j_end - 1], -1)
    vals, vecs = np.linalg.eigh(t)
    x = basis[:, :j_end] @ vecs[:, -1]
    x = _project(x, locked)
    x /= np.linalg.norm(x)
    return x


def spectrum_topk(graph, k_eigs, tol=1e-10, seed=0, m_start=40):
    """Largest ``k_eigs`` eigenvalues (with multiplicity) of A/|S| and their eigenvectors.

    The constant vector is locked first with eigenvalue 1.  Each further
    pair is accepted once ||P x - lambda x|| <= tol; otherwise the Krylov
    dimension doubles up to the size of the remaining space.
    Returns ``(values, vectors, residuals)``.
    """
    nv = graph.num_vertices
    k_eigs = min(k_eigs, nv)
    rng = np.random.default_rng(seed)
    matvec = graph.matvec
    ones = np.ones(nv) / math.sqrt(nv)
    locked = ones[:, None]
    values = [1.0]
    residuals = [float(np.linalg.norm(matvec(ones) - ones))]
    while len(values) < k_eigs:
        remaining = nv - locked.shape[1]
        m = min(m_start, remaining)
        start = rng.standard_normal(nv)
        while True:
            x = _lanczos_top(matvec, locked, m, start)
            px = matvec(x)
            lam = float(x @ px)
            res = float(np.linalg.norm(px - lam * x))
            if res <= tol:
                break
            if m >= remaining:
                raise ConvergenceError(
                    f"eigenpair {len(values)} stuck at residual {res:.3e} > {tol:g}", res
                )
            m = min(2 * m, remaining)
            start = x
        values.append(lam)
        residuals.append(res)
        locked = np.column_stack([locked, x])
    return np.array(values), locked, np.array(residuals)


def cheeger_exact(graph, max_vertices=EXACT_CHEEGER_MAX, chunk=1 << 20):
    """Exact h(G) = min |boundary F| / |F| over 0 < |F| <= |V|/2, edges with multiplicity."""
    nv = graph.num_vertices
    if nv > max_vertices:
        raise ResourceError(f"|V| = {nv} > {max_vertices}; use cheeger_bounds instead")
    if nv < 2:
        return math.inf
    edges = [(v, w, m) for v, w, m in graph.edges() if v != w]
    half = nv // 2
    best = math.inf
    # vertex nv-1 is left out of F w.l.o.g. only when |F| < |V|/2; enumerate all masks
    total = 1 << nv
    for lo in range(1, total, chunk):
        masks = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        size = np.bitwise_count(masks).astype(np.int64)
        keep = size <= half
        masks, size = masks[keep], size[keep]
        if not len(masks):
            continue
        bd = np.zeros(len(masks), dtype=np.int64)
        for v, w, m in edges:
            bd += m * (((masks >> v) ^ (masks >> w)) & 1)
        best = min(best, float(np.min(bd / size)))
    return best


def cheeger_bounds(gap, degree):
    """Discrete Cheeger sandwich d*gap/2 <= h <= d*sqrt(2*gap)."""
    gap = max(gap, 0.0)
    return degree * gap / 2, degree * math.sqrt(2 * gap)


def moore_diameter_bound(num_vertices, degree):
    """Smallest r with 1 + d sum_{i<r} (d-1)^i >= |V|: no d-regular graph has smaller diameter."""
    r, reach, shell = 0, 1, degree
    while reach < num_vertices:
        r += 1
        reach += shell
        shell *= max(degree - 1, 1)
    return r


@dataclass(frozen=True)
class SpectralReport:
    graph_id: str
    q: int
    num_vertices: int
    degree: int
    lambda2: float
    spectral_gap: float
    cheeger_lower: float
    cheeger_upper: float
    h_exact: float | None
    residual: float
    diameter: int
    diameter_lower: int

    def sandwich_holds(self, slack=1e-12):
        if self.h_exact is None:
            return True
        return self.cheeger_lower - slack <= self.h_exact <= self.cheeger_upper + slack


def spectral_report(graph, tol=1e-10, seed=0, exact_upto=EXACT_CHEEGER_MAX):
    vals, _, res = spectrum_topk(graph, 2, tol=tol, seed=seed)
    lam2 = float(vals[1]) if len(vals) > 1 else -1.0
    gap = 1.0 - lam2
    lo, hi = cheeger_bounds(gap, graph.degree)
    h = cheeger_exact(graph) if graph.num_vertices <= exact_upto else None
    diam = int(graph.distances_from(0).max())
    return SpectralReport(
        graph.graph_id, graph.q, graph.num_vertices, graph.degree, lam2, gap, lo, hi, h,
        float(res.max()), diam, moore_diameter_bound(graph.num_vertices, graph.degree),
    )


@dataclass(frozen=True)
class FamilyReport:
    reports: list = field(repr=False)
    min_gap: float
    min_cheeger_lower: float
    threshold: float
    uniform: bool
    sizes_increasing: bool

    def to_csv(self, fh=None):
        buf = fh if fh is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["graph_id", "q", "|V|", "degree", "lambda2", "gap",
                    "cheeger_lower", "cheeger_upper", "h_exact"])
        for r in self.reports:
            w.writerow([r.graph_id, r.q, r.num_vertices, r.degree, repr(r.lambda2),
                        repr(r.spectral_gap), repr(r.cheeger_lower), repr(r.cheeger_upper),
                        "" if r.h_exact is None else repr(r.h_exact)])
        if fh is None:
            return buf.getvalue()


def expander_report(family, threshold=0.0, tol=1e-10, seed=0, exact_upto=EXACT_CHEEGER_MAX):
    """Per-graph spectral reports and the family summary.

    ``uniform`` is True when every Cheeger lower bound is at least ``threshold``.
    """
    family = list(family)
    if not family:
        raise ValueError("empty family")
    degrees = {g.degree for g in family}
    if len(degrees) != 1:
        raise ValueError(f"graphs have mixed degrees {sorted(degrees)}")
    reports = [spectral_report(g, tol, seed, exact_upto) for g in family]
    sizes = [r.num_vertices for r in reports]
    min_lower = min(r.cheeger_lower for r in reports)
    return FamilyReport(
        reports,
        min(r.spectral_gap for r in reports),
        min_lower,
        threshold,
        min_lower >= threshold,
        all(a < b for a, b in zip(sizes, sizes[1:])),
    )
