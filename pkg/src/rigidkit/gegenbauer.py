"""Spherical functions of the Gelfand pair (SO(n), SO(n-1)).

The k-th spherical function on S^{n-1} is the Gegenbauer polynomial
C_k^{(n-2)/2} normalised so that phi_k(1) = 1.  Two evaluators are
provided: a three-term recurrence (primary, O(k)) and adaptive
Gauss-Legendre quadrature of the Laplace-type integral

    phi_k(x) = c_n * int_0^pi (x + i sqrt(1-x^2) cos t)^k sin^{n-3} t dt,

which serves as an independent cross-check.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, SingularEndpointError

EPS = np.finfo(float).eps

__all__ = [
    "sphere_constant",
    "multiplicity",
    "phi_values",
    "phi_eval",
    "phi_quadrature",
    "phi_derivative",
    "envelope_constant",
    "DecayFit",
    "decay_fit",
    "lipschitz_fit",
    "SphericalFunctionTable",
    "spherical_table",
]


def _check_n(n):
    if int(n) != n or n < 3:
        raise DomainError(f"sphere dimension n must be an integer >= 3, got {n!r}")
    return int(n)


def _check_x(x, open_interval=False):
    x = float(x)
    if not -1.0 <= x <= 1.0 or math.isnan(x):
        raise DomainError(f"x must lie in [-1, 1], got {x!r}")
    if open_interval and abs(x) == 1.0:
        raise SingularEndpointError(f"derivative formula is singular at x = {x!r}")
    return x


def sphere_constant(n):
    """c_n = Gamma((n-1)/2) / (sqrt(pi) Gamma((n-2)/2)), making phi_k(1) = 1."""
    n = _check_n(n)
    return math.exp(math.lgamma((n - 1) / 2) - math.lgamma((n - 2) / 2)) / math.sqrt(math.pi)


def multiplicity(n, k):
    """Dimension m_k of the degree-k harmonic subspace of L^2(S^{n-1}).

    Exact integer: m_k = (n+2k-2) * C(n+k-3, k) / (n-2).  Python integers
    never wrap; callers converting to float get an ``OverflowError`` rather
    than a silent ``inf``.
    """
    n = _check_n(n)
    if int(k) != k or k < 0:
        raise DomainError(f"degree k must be a non-negative integer, got {k!r}")
    k = int(k)
    num = (n + 2 * k - 2) * math.comb(n + k - 3, k)
    m, rem = divmod(num, n - 2)
    assert rem == 0
    return m


def phi_values(n, kmax, x):
    """Array of phi_0..phi_kmax at every point of ``x`` (recurrence backend).

    Returns shape ``(kmax + 1,) + np.shape(x)``.  Uses

        phi_{k+1} = ((2k + n - 2) x phi_k - k phi_{k-1}) / (k + n - 2).
    """
    n = _check_n(n)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0) or np.any(np.isnan(x)):
        raise DomainError("x must lie in [-1, 1]")
    out = np.empty((kmax + 1,) + x.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = x
    for k in range(1, kmax):
        out[k + 1] = ((2 * k + n - 2) * x * out[k] - k * out[k - 1]) / (k + n - 2)
    return out


def _recurrence_error(k):
    # forward recurrence on [-1, 1] accumulates roughly one rounding per step
    return 4.0 * EPS * (k + 1)


def _recurrence_scalar(n, k, x):
    prev, cur = 1.0, x
    if k == 0:
        return 1.0
    for j in range(1, k):
        prev, cur = cur, ((2 * j + n - 2) * x * cur - j * prev) / (j + n - 2)
    return cur


@lru_cache(maxsize=64)
def _gl_rule(m):
    return np.polynomial.legendre.leggauss(m)


def _adaptive_gl(func, a, b, m, tol, depth=0, max_depth=40):
    """Integrate complex ``func`` on [a, b]; returns (value, error_estimate)."""
    nodes, weights = _gl_rule(m)

    def rule(lo, hi):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        return half * np.dot(weights, func(mid + half * nodes))

    mid = 0.5 * (a + b)
    whole = rule(a, b)
    halves = rule(a, mid) + rule(mid, b)
    delta = abs(halves - whole)
    if delta <= tol or depth >= max_depth:
        return halves, delta
    left, el = _adaptive_gl(func, a, mid, m, tol / 2, depth + 1, max_depth)
    right, er = _adaptive_gl(func, mid, b, m, tol / 2, depth + 1, max_depth)
    return left + right, el + er


def phi_quadrature(n, k, x, tol=1e-14):
    """Complex value of the integral formula and its error estimate.

    The imaginary part vanishes analytically (t -> pi - t symmetry); it is
    returned so callers can confirm it stays below the error estimate.
    """
    n = _check_n(n)
    x = _check_x(x)
    s = math.sqrt(max(0.0, 1.0 - x * x))
    c_n = sphere_constant(n)

    def integrand(t):
        return (x + 1j * s * np.cos(t)) ** k * np.sin(t) ** (n - 3)

    m = 2 * k + n + 16
    val, delta = _adaptive_gl(integrand, 0.0, math.pi, m, tol / c_n)
    return c_n * val, c_n * delta + EPS * (k + 1)


def phi_eval(n, k, x, backend="recurrence"):
    """phi_k(x) on S^{n-1}; returns ``(value, abs_error)``."""
    n = _check_n(n)
    x = _check_x(x)
    if int(k) != k or k < 0:
        raise DomainError(f"degree k must be a non-negative integer, got {k!r}")
    k = int(k)
    if backend == "recurrence":
        return _recurrence_scalar(n, k, x), _recurrence_error(k)
    if backend == "quadrature":
        val, err = phi_quadrature(n, k, x)
        return val.real, err
    raise ValueError(f"unknown backend {backend!r}")


def phi_derivative(n, k, x, backend="recurrence"):
    """phi_k'(x) for x in (-1, 1); returns ``(value, abs_error)``.

    Recurrence backend: phi'_{k,n}(x) = k (k+n-2)/(n-1) * phi_{k-1,n+2}(x).
    Quadrature backend differentiates under the integral sign.
    """
    n = _check_n(n)
    x = _check_x(x, open_interval=True)
    if int(k) != k or k < 0:
        raise DomainError(f"degree k must be a non-negative integer, got {k!r}")
    k = int(k)
    if k == 0:
        return 0.0, 0.0
    scale = k * (k + n - 2) / (n - 1)
    if backend == "recurrence":
        return scale * _recurrence_scalar(n + 2, k - 1, x), scale * _recurrence_error(k - 1)
    if backend == "quadrature":
        s = math.sqrt(1.0 - x * x)
        c_n = sphere_constant(n)

        def integrand(t):
            c = np.cos(t)
            return k * (1 - 1j * x * c / s) * (x + 1j * s * c) ** (k - 1) * np.sin(t) ** (n - 3)

        tol = 1e-14 * max(1.0, scale)
        val, delta = _adaptive_gl(integrand, 0.0, math.pi, 2 * k + n + 16, tol / c_n)
        return (c_n * val).real, c_n * delta + EPS * (k + 1) * scale / math.sqrt(1 - x * x)
    raise ValueError(f"unknown backend {backend!r}")


def envelope_constant(n, x, k_min=1):
    """E such that |phi_k(x)| <= E * k^{-(n-2)/2} for every k >= k_min.

    Explicit constant from the decay estimate
        |phi_k(x)| <= c_n [2 sqrt2 I_n / (k(1-x^2))^{(n-2)/2} + (pi/2) e^{-k(1-x^2)/4}],
    with I_n = int_0^inf e^{-t^2/2} t^{n-3} dt = 2^{(n-4)/2} Gamma((n-2)/2).
    The exponential piece is folded into the power law using the maximum
    of e^{-ck} k^r over k >= k_min.
    """
    n = _check_n(n)
    x = _check_x(x)
    w = 1.0 - x * x
    if w <= 0.0:
        raise DomainError("no decay envelope at |x| = 1")
    r = (n - 2) / 2
    c = w / 4
    i_n = 2.0 ** ((n - 4) / 2) * math.gamma((n - 2) / 2)
    k_peak = r / c
    if k_min >= k_peak:
        sup = math.exp(-c * k_min + r * math.log(k_min))
    else:
        sup = math.exp(-r + r * math.log(k_peak))
    c_n = sphere_constant(n)
    return c_n * (2.0 * math.sqrt(2.0) * i_n * w ** (-r) + 0.5 * math.pi * sup)


@dataclass(frozen=True)
class DecayFit:
    """Empirical constants for the two decay envelopes on a finite grid.

    ``C_emp`` bounds |phi_k(x)| (k(1-x^2))^{(n-2)/2}; ``C_deriv`` bounds
    |phi_k'(x)| (k(1-x^2))^{(n-2)/2} sqrt(1-x^2)/k.  Both are maxima over
    the grid, not certified constants for all (k, x).
    """

    n: int
    k_range: tuple
    x_grid: tuple
    C_emp: float
    C_deriv: float


def decay_fit(n, k_max, x_grid):
    n = _check_n(n)
    x = np.asarray(sorted(set(float(v) for v in x_grid)), dtype=float)
    if x.size == 0:
        raise ValueError("x_grid must be non-empty")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if np.any(np.abs(x) >= 1.0):
        raise DomainError("x_grid must lie in the open interval (-1, 1)")
    r = (n - 2) / 2
    w = 1.0 - x * x
    vals = phi_values(n, k_max, x)[1:]
    dvals = phi_values(n + 2, k_max - 1, x)
    ks = np.arange(1, k_max + 1, dtype=float)[:, None]
    dvals = dvals * (ks * (ks + n - 2) / (n - 1))
    env = (ks * w) ** r
    c_emp = float(np.max(np.abs(vals) * env))
    c_der = float(np.max(np.abs(dvals) * env * np.sqrt(w) / ks))
    return DecayFit(n, (1, int(k_max)), tuple(x.tolist()), c_emp, c_der)


def lipschitz_fit(n, k_max, x_grid):
    """Smallest C with |phi_k(x) - phi_k(0)| <= C k^{-(n-2)/2} min(1, k|x|) on the grid.

    Points outside [-1/2, 1/2] and x = 0 are ignored.
    """
    n = _check_n(n)
    x = np.asarray([v for v in x_grid if 0 < abs(v) <= 0.5], dtype=float)
    if x.size == 0:
        raise ValueError("x_grid has no points with 0 < |x| <= 1/2")
    vals = phi_values(n, k_max, np.concatenate([[0.0], x]))[1:]
    ks = np.arange(1, k_max + 1, dtype=float)[:, None]
    diff = np.abs(vals[:, 1:] - vals[:, :1])
    scale = ks ** ((n - 2) / 2) / np.minimum(1.0, ks * np.abs(x))
    return float(np.max(diff * scale))


@dataclass(frozen=True)
class SphericalFunctionTable:
    n: int
    ks: tuple
    xs: tuple
    values: np.ndarray = field(repr=False)
    errors: np.ndarray = field(repr=False)

    @property
    def c_n(self):
        return sphere_constant(self.n)

    @property
    def entries(self):
        return {
            (k, x): (float(self.values[i, j]), float(self.errors[i, j]))
            for i, k in enumerate(self.ks)
            for j, x in enumerate(self.xs)
        }

    def rows(self):
        for i, k in enumerate(self.ks):
            for j, x in enumerate(self.xs):
                yield self.n, k, x, float(self.values[i, j]), float(self.errors[i, j])

    def to_csv(self, fh=None):
        buf = fh if fh is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "k", "x", "value", "abs_error"])
        for n, k, x, v, e in self.rows():
            w.writerow([n, k, repr(x), repr(v), repr(e)])
        if fh is None:
            return buf.getvalue()


def spherical_table(n, k_max, x_grid):
    """Recurrence-backed table of phi_k(x), k = 0..k_max, over ``x_grid``."""
    n = _check_n(n)
    xs = tuple(_check_x(v) for v in x_grid)
    vals = phi_values(n, k_max, np.asarray(xs, dtype=float)) if xs else np.empty((k_max + 1, 0))
    errs = np.repeat(
        np.array([_recurrence_error(k) for k in range(k_max + 1)])[:, None], len(xs), axis=1
    )
    vals.setflags(write=False)
    errs.setflags(write=False)
    return SphericalFunctionTable(n, tuple(range(k_max + 1)), xs, vals, errs)
