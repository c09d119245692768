"""Weyl-chamber bookkeeping for SO(2n-3)-bi-invariant multipliers on SL(2n-3, R).

Everything here is explicit arithmetic: the 2x2 KAK computation behind the
rotation trick, the per-step Hoelder bounds along the chamber, the
telescoping schedule v_k and the resulting decay certificate eps_p(t).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleError

__all__ = [
    "WeylDiagonal",
    "StepBound",
    "weyl_diagonal",
    "kak2_matrix",
    "kak2_forward",
    "kak2_solve",
    "step_bound",
    "path_schedule",
    "chain_sum",
    "telescoped_sum",
    "epsilon_decay",
    "decay_table_csv",
]

TRACE_TOL = 1e-12
COS2_SLACK = 1e-12


@dataclass(frozen=True)
class WeylDiagonal:
    """D(v, u, t) = diag(e^v x (n-2), e^u, e^t x (n-2)) in SL(2n-3, R)."""

    n: int
    v: float
    u: float
    t: float

    @property
    def exponents(self):
        k = self.n - 2
        return np.array([self.v] * k + [self.u] + [self.t] * k)

    @property
    def matrix(self):
        return np.diag(np.exp(self.exponents))

    @property
    def log_det(self):
        return float(np.sum(self.exponents))


def weyl_diagonal(n, v, u, t):
    if int(n) != n or n < 3:
        raise ValueError("n must be an integer >= 3")
    n = int(n)
    resid = t + u / (n - 2) + v
    if abs(resid) > TRACE_TOL * max(1.0, abs(t), abs(u), abs(v)):
        raise ValueError(f"t + u/(n-2) + v = {resid!r}, must vanish for unit determinant")
    return WeylDiagonal(n, float(v), float(u), float(t))


def kak2_matrix(s, t, theta):
    """diag(e^{s/2}, e^{t/2}) R(theta) diag(e^{s/2}, e^{t/2})."""
    d = np.diag([math.exp(s / 2), math.exp(t / 2)])
    c, sn = math.cos(theta), math.sin(theta)
    return d @ np.array([[c, -sn], [sn, c]]) @ d


def kak2_forward(s, t, theta):
    """Log singular values (x, y), x >= y, of ``kak2_matrix(s, t, theta)``.

    Closed form: x + y = s + t and x - y = 2 asinh(|sinh((s-t)/2) cos theta|),
    which stays accurate when the singular values nearly coincide.
    """
    a = 2.0 * math.asinh(abs(math.sinh((s - t) / 2) * math.cos(theta)))
    total = s + t
    return (total + a) / 2, (total - a) / 2


def kak2_solve(v, u, s, t):
    """theta in [0, pi/2] with kak2_forward(s, t, theta) = (v, u).

    Requires t <= u <= v <= s and u + v = s + t.  The returned angle
    satisfies |cos theta| = sinh((v-u)/2) / sinh((s-t)/2) <= e^{t-u}.
    """
    scale = max(1.0, abs(s), abs(t), abs(u), abs(v))
    if abs((u + v) - (s + t)) > 1e-10 * scale:
        raise ValueError(f"u + v = {u + v!r} differs from s + t = {s + t!r}")
    if s < t:
        raise ValueError("need s >= t")
    if v < u or u < t - 1e-12 * scale or v > s + 1e-12 * scale:
        raise InfeasibleError(f"target (v={v!r}, u={u!r}) outside [t, s] = [{t!r}, {s!r}]")
    if s == t:
        return 0.0
    a = (s - t) / 2
    b = max(u - t, 0.0)
    c = math.sinh((v - u) / 2) / math.sinh(a)
    if c * c > 1.0 + COS2_SLACK:
        raise InfeasibleError(f"cos^2 theta = {c * c!r} is not attainable")
    # sin^2 = sinh(b) sinh(2a - b) / sinh(a)^2 avoids cancellation in 1 - cos^2
    sn = math.sqrt(max(math.sinh(b) * math.sinh(2 * a - b), 0.0)) / math.sinh(a)
    return math.atan2(sn, max(c, 0.0))


@dataclass(frozen=True)
class StepBound:
    n: int
    C_p: float
    alpha_p: float
    u: float
    t: float
    delta: float
    value: float
    dual: bool = False
    v: float | None = None


def step_bound(n, holder, u, t, delta, dual=False, v=None):
    """Bound 2(n-2) C_p e^{-alpha_p (gap - delta)} for one chamber move.

    Default move D(v,u,t) -> D(v + delta/(n-2), u - delta, t), gap = u - t.
    With ``dual=True`` the Cartan-dual move D(v,u,t) -> D(v, u + delta, t - delta/(n-2))
    is bounded instead, gap = v - u (``v`` required).
    """
    if dual:
        if v is None:
            raise ValueError("dual step needs v")
        gap = v - u
    else:
        gap = u - t
    if not 0.0 < delta < gap:
        raise ValueError(f"need 0 < delta < {gap!r}, got {delta!r}")
    value = 2 * (n - 2) * holder.C_p * math.exp(-holder.alpha_p * (gap - delta))
    return StepBound(n, holder.C_p, holder.alpha_p, u, t, delta, value, dual, v)


def path_schedule(n, t, s, delta=None):
    """Levels v_0 = t < v_1 < ... < v_N = s with v_k = min(s, t + k delta/(n-2)).

    ``delta`` defaults to t/2, i.e. v_k = min(s, (1 + k/(2n-4)) t).
    Returns ``(levels, N)``.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if s < t:
        raise ValueError("need t <= s")
    if delta is None:
        delta = t / 2
    if not 0 < delta < t:
        raise ValueError("need 0 < delta < t")
    levels = [float(t)]
    k = 0
    while levels[-1] < s:
        k += 1
        if delta == t / 2:
            nxt = (1 + k / (2 * n - 4)) * t
        else:
            nxt = t + k * delta / (n - 2)
        levels.append(min(float(s), nxt))
    return levels, len(levels) - 1


def chain_sum(n, holder, t, s, delta=None):
    """Sum of the exact two-move step bounds along the schedule from t to s.

    Each level v moves by a = v_{k+1} - v_k via
    D(v,0,-v) -> D(v+a, -(n-2)a, -v) -> D(v+a, 0, -v-a).
    """
    if delta is None:
        delta = t / 2
    levels, _ = path_schedule(n, t, s, delta)
    total = 0.0
    for lo, hi in zip(levels[:-1], levels[1:]):
        d = (n - 2) * (hi - lo)
        first = step_bound(n, holder, u=0.0, t=-lo, delta=d)
        second = step_bound(n, holder, u=-d, t=-lo, delta=d, dual=True, v=lo + d / (n - 2))
        total += first.value + second.value
    return total


def telescoped_sum(n, holder, t, s, delta=None):
    """sum_{k<N} 4(n-2) C_p e^{-alpha_p (v_k - delta)} over the schedule."""
    if delta is None:
        delta = t / 2
    levels, _ = path_schedule(n, t, s, delta)
    pref = 4 * (n - 2) * holder.C_p
    terms = [pref * math.exp(-holder.alpha_p * (t - delta + k * delta / (n - 2)))
             for k in range(len(levels) - 1)]
    return math.fsum(terms)


def epsilon_decay(n, holder, t, s=None, delta=None):
    """Decay certificate eps_p(t) = 4(n-2) C_p e^{-a(t-delta)} / (1 - e^{-a delta/(n-2)}).

    With the default delta = t/2 this is
    4(n-2) C_p e^{-a t/2} / (1 - e^{-a t/(2n-4)}), a = alpha_p.
    If ``s`` is given, the telescoped sum up to level s is computed and
    checked to lie below the certificate.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if delta is None:
        delta = t / 2
    a = holder.alpha_p
    eps = 4 * (n - 2) * holder.C_p * math.exp(-a * (t - delta)) / (-math.expm1(-a * delta / (n - 2)))
    if s is not None:
        raw = telescoped_sum(n, holder, t, s, delta)
        if raw > eps * (1 + 1e-12):
            raise ArithmeticError(f"telescoped sum {raw!r} exceeds certificate {eps!r}")
    return eps


def decay_table_csv(n, holder, ts, fh=None):
    buf = fh if fh is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "epsilon"])
    for t in ts:
        w.writerow([repr(float(t)), repr(epsilon_decay(n, holder, float(t)))])
    if fh is None:
        return buf.getvalue()
