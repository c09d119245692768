"""Schatten-class estimates for the sphere-averaging operators T_delta.

T_delta acts on L^2(S^{n-1}) by averaging over the sub-sphere
{y : <x, y> = delta}.  It is diagonal in the harmonic decomposition with
eigenvalue phi_k(delta) of multiplicity m_k, so

    ||T_delta||_{S^p}^p = sum_k m_k |phi_k(delta)|^p,

finite exactly when p > 2 + 2/(n-2).  Truncated sums come with a certified
tail: m_k <= A k^{n-2} (A from the monotone ratio m_k / k^{n-2}) and the
explicit decay envelope |phi_k(x)| <= E k^{-(n-2)/2}, summed by the
integral test.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (
    DivergenceError,
    DomainError,
    InsufficientSamplingError,
    NotCompactError,
    TruncationError,
    UnsupportedError,
)
from .gegenbauer import _check_n, envelope_constant, multiplicity, phi_values

__all__ = [
    "SpectralOperator",
    "SchattenResult",
    "HolderConstants",
    "MultiplierCoefficients",
    "critical_exponent",
    "spectral_operator",
    "schatten_norm",
    "schatten_diff",
    "schatten_partial_sums",
    "holder_fit",
    "multiplier_coeff_norm",
    "oscillation_actual",
    "oscillation_bound",
    "dense_sphere_oracle",
    "cluster_eigenvalues",
    "results_to_csv",
]

K_START = 256
K_CAP = 10**6


def critical_exponent(n):
    """2 + 2/(n-2); T_delta is in S^p iff p is strictly above it."""
    n = _check_n(n)
    return 2.0 + 2.0 / (n - 2)


def _multiplicities(n, K):
    # float product form; exact while m_k < 2**53
    k = np.arange(K + 1, dtype=float)
    m = n + 2 * k - 2
    for j in range(1, n - 2):
        m = m * (k + j)
    return m / math.factorial(n - 2)


@dataclass(frozen=True)
class SpectralOperator:
    """Diagonal model of T_delta: eigenvalue phi_k(delta) on a space of dimension m_k."""

    n: int
    delta: float

    def __post_init__(self):
        _check_n(self.n)
        if not -1.0 <= self.delta <= 1.0:
            raise DomainError(f"delta must lie in [-1, 1], got {self.delta!r}")

    def __iter__(self):
        x, n = self.delta, self.n
        prev, cur, k = None, 1.0, 0
        while True:
            yield multiplicity(n, k), cur
            if k == 0:
                prev, cur = cur, x
            else:
                prev, cur = cur, ((2 * k + n - 2) * x * cur - k * prev) / (k + n - 2)
            k += 1

    def eigenvalues(self, K):
        """(m_k, lambda_k) for k = 0..K as float arrays."""
        return _multiplicities(self.n, K), phi_values(self.n, K, self.delta)


def spectral_operator(n, delta):
    return SpectralOperator(_check_n(n), float(delta))


@dataclass(frozen=True)
class SchattenResult:
    """Certified enclosure of a Schatten norm.

    The true norm lies in ``[partial, (partial**p + tail_bound**p) ** (1/p)]``.
    """

    n: int
    delta: float
    p: float
    partial: float
    tail_bound: float
    K_used: int
    delta2: float | None = None

    @property
    def norm_low(self):
        return self.partial

    @property
    def norm_high(self):
        if math.isinf(self.p):
            return max(self.partial, self.tail_bound)
        return (self.partial**self.p + self.tail_bound**self.p) ** (1.0 / self.p)

    @property
    def width(self):
        return self.norm_high - self.norm_low


def results_to_csv(results, fh=None):
    buf = fh if fh is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "delta", "p", "norm_low", "norm_high", "K_used"])
    for r in results:
        w.writerow([r.n, repr(r.delta), repr(r.p), repr(r.norm_low), repr(r.norm_high), r.K_used])
    if fh is None:
        return buf.getvalue()


def _validate(n, p, deltas):
    for d in deltas:
        if not -1.0 <= d <= 1.0:
            raise DomainError(f"delta must lie in [-1, 1], got {d!r}")
        if abs(d) == 1.0:
            raise NotCompactError(f"T_delta at delta = {d!r} has non-decaying eigenvalues")
    if not math.isinf(p) and p <= critical_exponent(n):
        raise DivergenceError(
            f"sum_k m_k |phi_k|^p diverges for n = {n}, p = {p!r} <= {critical_exponent(n)!r}"
        )


def _series_batch(n, first, second, p, tol, k_start=K_START, k_cap=K_CAP):
    """Schatten enclosures for eigenvalue sequences phi_k(first_i) - phi_k(second_i).

    ``second`` entries may be None, meaning the plain operator T_{first_i}.
    Returns (partial_p, tail_p, K) arrays, p-th powers.
    """
    cols = len(first)
    xs = sorted({d for d in list(first) + [d for d in second if d is not None]})
    idx = {d: i for i, d in enumerate(xs)}
    s = (n - 2) * (p / 2 - 1)
    partial = np.zeros(cols)
    tail = np.full(cols, np.inf)
    k_used = np.zeros(cols, dtype=int)
    done = np.zeros(cols, dtype=bool)
    exact_zero = np.array([b is not None and a == b for a, b in zip(first, second)])
    done[exact_zero] = True
    tail[exact_zero] = 0.0
    K = k_start
    while not done.all():
        if K > k_cap:
            bad = int(np.flatnonzero(~done)[0])
            lo = partial[bad] ** (1 / p)
            raise TruncationError(
                f"tail not below tol={tol} after {k_cap} terms",
                K_used=int(k_used[bad]),
                width=(partial[bad] + tail[bad]) ** (1 / p) - lo,
            )
        vals = phi_values(n, K, np.asarray(xs))
        m = _multiplicities(n, K)
        a_coef = float(multiplicity(n, K + 1)) / (K + 1) ** (n - 2)
        for c in np.flatnonzero(~done):
            lam = vals[:, idx[first[c]]]
            env = envelope_constant(n, first[c], K + 1)
            if second[c] is not None:
                lam = lam - vals[:, idx[second[c]]]
                env += envelope_constant(n, second[c], K + 1)
            terms = m * np.abs(lam) ** p
            partial[c] = math.fsum(terms.tolist())
            tail[c] = a_coef * env**p * K ** (1 - s) / (s - 1)
            k_used[c] = K
            lo = partial[c] ** (1 / p)
            hi = (partial[c] + tail[c]) ** (1 / p)
            if hi - lo <= tol:
                done[c] = True
        K *= 2
    return partial, tail, k_used


def _sup_batch(n, first, second, k_start=K_START, k_cap=K_CAP):
    """p = infinity: exact sup_k |lambda_k| once the envelope drops below the running max."""
    out = []
    r = (n - 2) / 2
    for a, b in zip(first, second):
        if b is None:
            out.append((1.0, 0.0, 0))
            continue
        if a == b:
            out.append((0.0, 0.0, 0))
            continue
        K = k_start
        while True:
            vals = phi_values(n, K, np.array([a, b]))
            best = float(np.max(np.abs(vals[:, 0] - vals[:, 1])))
            env = (envelope_constant(n, a, K + 1) + envelope_constant(n, b, K + 1)) * (K + 1) ** -r
            if env <= best:
                out.append((best, 0.0, K))
                break
            K *= 2
            if K > k_cap:
                out.append((best, env, K // 2))
                break
    return out


def _batch(n, first, second, p, tol):
    n = _check_n(n)
    p = float(p)
    _validate(n, p, [d for d in list(first) + list(second) if d is not None])
    if math.isinf(p):
        return [
            SchattenResult(n, a, p, lo, tl, K, b)
            for (lo, tl, K), a, b in zip(_sup_batch(n, first, second), first, second)
        ]
    partial, tail, ks = _series_batch(n, first, second, p, tol)
    return [
        SchattenResult(n, a, p, float(pp ** (1 / p)), float(tt ** (1 / p)), int(k), b)
        for pp, tt, k, a, b in zip(partial, tail, ks, first, second)
    ]


def schatten_norm(op, p, tol=1e-8):
    """Certified enclosure of ||T_delta||_{S^p}.

    Doubles the truncation K from 256 until the enclosure width is below
    ``tol``; raises TruncationError past 10**6 terms.
    """
    return _batch(op.n, [float(op.delta)], [None], p, tol)[0]


def schatten_diff(n, delta, delta2, p, tol=1e-8):
    """Certified enclosure of ||T_delta - T_delta2||_{S^p}."""
    return _batch(n, [float(delta)], [float(delta2)], p, tol)[0]


def schatten_partial_sums(op, p, K):
    """Cumulative sums of m_k |phi_k(delta)|^p for k = 0..K (no convergence check)."""
    m, lam = op.eigenvalues(K)
    return np.cumsum(m * np.abs(lam) ** p)


@dataclass(frozen=True)
class HolderConstants:
    """Constants with ||T_0 - T_delta||_{S^p} <= C_p |delta|^alpha_p on ``grid``."""

    n: int
    p: float
    C_p: float
    alpha_p: float
    grid: tuple = ()
    max_violation: float | None = None
    norms: tuple = field(default=(), repr=False)

    @classmethod
    def manual(cls, n, p, C_p, alpha_p):
        """Constants supplied by hand (no verification grid)."""
        if C_p <= 0 or alpha_p <= 0:
            raise ValueError("C_p and alpha_p must be positive")
        return cls(int(n), float(p), float(C_p), float(alpha_p))

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, indent=2)


ALPHA_CLAMP = (1e-6, 1.0 - 1e-6)


def holder_fit(n, p, delta_grid=None, tol=1e-6):
    """Fit C_p |delta|^alpha_p to ||T_0 - T_delta||_{S^p} over a grid in [-1/2, 1/2].

    Log-log least squares gives alpha_p (clamped into (0, 1)); C_p is then
    raised until the bound holds at every grid point using the upper end
    of each certified enclosure, and finally floored at 2.
    """
    n = _check_n(n)
    if delta_grid is None:
        delta_grid = np.linspace(-0.5, 0.5, 25)
    grid = [float(d) for d in delta_grid]
    if any(abs(d) > 0.5 for d in grid):
        raise DomainError("holder_fit grid must lie in [-1/2, 1/2]")
    used = [d for d in grid if 1e-3 <= abs(d) <= 0.5]
    if not used:
        raise ValueError("grid has no points with 1e-3 <= |delta| <= 1/2")
    results = _batch(n, [0.0] * len(used), used, p, tol)
    y = np.array([r.norm_high for r in results])
    ad = np.abs(np.array(used))
    if np.any(y <= 0):
        raise ValueError("zero difference norm on grid; cannot fit a power law")
    slope, intercept = np.polyfit(np.log(ad), np.log(y), 1)
    alpha = float(np.clip(slope, *ALPHA_CLAMP))
    c = max(math.exp(intercept), float(np.max(y / ad**alpha)), 2.0)
    while True:
        violation = float(np.max(y - c * ad**alpha))
        if violation <= 0.0:
            break
        c = math.nextafter(c, math.inf) * (1 + 1e-15)
    return HolderConstants(n, float(p), c, alpha, tuple(used), violation, tuple(y.tolist()))


@dataclass(frozen=True)
class MultiplierCoefficients:
    """Finitely supported coefficients c_k of phi(g) = sum_k c_k m_k phi_k(g_11)."""

    n: int
    coefficients: tuple

    def __post_init__(self):
        _check_n(self.n)
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))

    def scaled(self, t):
        return MultiplierCoefficients(self.n, tuple(t * c for c in self.coefficients))

    def evaluate(self, x):
        c = np.asarray(self.coefficients)
        if c.size == 0:
            return 0.0
        m = _multiplicities(self.n, c.size - 1)
        return float(np.dot(c * m, phi_values(self.n, c.size - 1, float(x))))


def _conjugate(p):
    p = float(p)
    if p < 1:
        raise ValueError("p must be >= 1")
    if math.isinf(p):
        return 1.0
    if p == 1.0:
        return math.inf
    return p / (p - 1)


def multiplier_coeff_norm(mc, p):
    """(sum_k m_k |c_k|^q)^{1/q} with q = p/(p-1): the dual lower bound on ||phi||_{M(S^p)}."""
    q = _conjugate(p)
    c = np.abs(np.asarray(mc.coefficients, dtype=float))
    if c.size == 0:
        return 0.0
    if math.isinf(q):
        return float(c.max())
    m = _multiplicities(mc.n, c.size - 1)
    return math.fsum((m * c**q).tolist()) ** (1.0 / q)


def oscillation_actual(mc, g11, g11p):
    """|phi(g) - phi(g')| for the bi-invariant function with coefficients ``mc``."""
    return abs(mc.evaluate(g11) - mc.evaluate(g11p))


def oscillation_bound(mc, g11, g11p, p, tol=1e-8, restrict_to_support=False):
    """Hoelder bound ||c||_{q,m} * ||T_g11 - T_g11p||_{S^p} on |phi(g) - phi(g')|.

    With ``restrict_to_support`` the Schatten factor is summed over the
    finite support of ``mc`` only, which stays finite even for p at or
    below the critical exponent.  The actual oscillation is evaluated and
    checked against the returned bound.
    """
    for g in (g11, g11p):
        if not -1.0 < g < 1.0:
            raise DomainError(f"g11 must lie in (-1, 1), got {g!r}")
    coeff = multiplier_coeff_norm(mc, p)
    if restrict_to_support:
        K = max(len(mc.coefficients) - 1, 0)
        vals = phi_values(mc.n, K, np.array([g11, g11p]))
        terms = _multiplicities(mc.n, K) * np.abs(vals[:, 0] - vals[:, 1]) ** p
        diff = math.fsum(terms.tolist()) ** (1 / p)
    else:
        diff = schatten_diff(mc.n, g11, g11p, p, tol).norm_high
    bound = coeff * diff
    actual = oscillation_actual(mc, g11, g11p)
    if actual > bound * (1 + 1e-12) + 1e-14:
        raise ArithmeticError(f"Hoelder check failed: actual {actual!r} > bound {bound!r}")
    return bound


def _real_harmonics(L, theta, phi):
    """Real orthonormal spherical harmonics (probability normalisation), shape (points, (L+1)^2)."""
    from scipy.special import sph_harm_y

    cols, degrees = [], []
    scale = math.sqrt(4 * math.pi)
    for l in range(L + 1):
        for m in range(-l, l + 1):
            y = sph_harm_y(l, abs(m), theta, phi)
            if m > 0:
                cols.append(math.sqrt(2) * scale * y.real)
            elif m < 0:
                cols.append(math.sqrt(2) * scale * y.imag)
            else:
                cols.append(scale * y.real)
            degrees.append(l)
    return np.stack(cols, axis=-1), np.array(degrees)


def _to_angles(pts):
    z = np.clip(pts[..., 2], -1.0, 1.0)
    theta = np.arccos(z)
    phi = np.mod(np.arctan2(pts[..., 1], pts[..., 0]), 2 * math.pi)
    return theta, phi


def dense_sphere_oracle(n, L, delta, N=None, off_block_tol=1e-8):
    """Eigenvalues of T_delta compressed to harmonics of degree <= L on S^2.

    Builds <Y_i, T_delta Y_j> by product Gauss quadrature on the sphere,
    evaluating T_delta Y_j with N equispaced samples on each circle
    {y : <x, y> = delta}.  N > L makes the circle averages exact; a small
    N shows up as energy between different degrees and is reported as
    InsufficientSamplingError.  Returns eigenvalues sorted descending.
    """
    if n != 3:
        raise UnsupportedError("dense oracle implemented for the 2-sphere (n = 3) only")
    if not 0 <= L <= 30:
        raise DomainError("band limit L must lie in [0, 30]")
    if not -1.0 <= delta <= 1.0:
        raise DomainError("delta must lie in [-1, 1]")
    if N is None:
        N = 2 * L + 2
    ct, wt = np.polynomial.legendre.leggauss(L + 2)
    n_az = 2 * L + 4
    az = 2 * math.pi * np.arange(n_az) / n_az
    st = np.sqrt(1 - ct**2)
    pts = np.stack(
        [np.outer(st, np.cos(az)), np.outer(st, np.sin(az)), np.repeat(ct[:, None], n_az, 1)], -1
    ).reshape(-1, 3)
    w = np.repeat(wt / 2, n_az) / n_az

    ref = np.where(np.abs(pts[:, 2:3]) < 0.9, [[0.0, 0.0, 1.0]], [[1.0, 0.0, 0.0]])
    e1 = ref - np.sum(ref * pts, axis=1, keepdims=True) * pts
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(pts, e1)
    psi = 2 * math.pi * (np.arange(N) + 0.5) / N
    rad = math.sqrt(max(0.0, 1 - delta * delta))
    circ = (
        delta * pts[:, None, :]
        + rad * np.cos(psi)[None, :, None] * e1[:, None, :]
        + rad * np.sin(psi)[None, :, None] * e2[:, None, :]
    )
    y_pts, degrees = _real_harmonics(L, *_to_angles(pts))
    y_circ, _ = _real_harmonics(L, *_to_angles(circ))
    t_y = y_circ.mean(axis=1)
    mat = (y_pts * w[:, None]).T @ t_y
    off = degrees[:, None] != degrees[None, :]
    off_energy = float(np.linalg.norm(mat[off]) / max(np.linalg.norm(mat), 1e-300))
    if off_energy > off_block_tol:
        raise InsufficientSamplingError(
            f"off-block energy {off_energy:.3e} exceeds {off_block_tol:g}; increase N", off_energy
        )
    eig = np.linalg.eigvalsh(0.5 * (mat + mat.T))
    return eig[::-1]


def cluster_eigenvalues(eigs, tol=1e-6):
    """Group sorted eigenvalues into (mean, count) clusters of spread <= tol."""
    eigs = np.sort(np.asarray(eigs))[::-1]
    out = []
    start = 0
    for i in range(1, len(eigs) + 1):
        if i == len(eigs) or eigs[start] - eigs[i] > tol:
            out.append((float(eigs[start:i].mean()), i - start))
            start = i
    return out
