"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest
from scipy.special import eval_legendre

from conftest import record
from rigidkit.cli import main
from rigidkit.congruence_graphs import cayley_build, elementary_generators, enumerate_group, sl_order
from rigidkit.embedding import (
    bm_small,
    default_measure,
    halfmass_check,
    john_ratio,
    poincare_check,
    random_lipschitz_embedding,
    uniform_measure,
)
from rigidkit.errors import DivergenceError, RigidkitError
from rigidkit.gegenbauer import multiplicity, phi_eval
from rigidkit.schatten import (
    HolderConstants,
    cluster_eigenvalues,
    dense_sphere_oracle,
    holder_fit,
    schatten_norm,
    schatten_partial_sums,
    spectral_operator,
)
from rigidkit.spectral import spectral_report
from rigidkit.weyl_path import epsilon_decay, kak2_forward, kak2_solve, telescoped_sum


def harmonic_dimension(n, k):
    return math.comb(n + k - 1, k) - (math.comb(n + k - 3, k - 2) if k >= 2 else 0)


def legendre(k, x):
    p0, p1 = 1.0, x
    if k == 0:
        return p0
    for j in range(1, k):
        p0, p1 = p1, ((2 * j + 1) * x * p1 - j * p0) / (j + 1)
    return p1


def finish(number, ok, detail, elapsed, limit):
    passed = bool(ok) and elapsed < limit
    record(number, passed, f"{detail} [{elapsed:.2f}s / limit {limit:g}s]")
    assert passed, detail


def test_criterion_01_multiplicity_exact():
    t0 = time.perf_counter()
    bad = [(n, k) for n in range(3, 7) for k in range(21) if multiplicity(n, k) != harmonic_dimension(n, k)]
    finish(1, not bad, f"multiplicity == harmonic dimension, mismatches={bad}", time.perf_counter() - t0, 1)


def test_criterion_02_legendre():
    t0 = time.perf_counter()
    xs = np.linspace(-1, 1, 50)
    err = max(abs(phi_eval(3, k, x)[0] - legendre(k, x)) for k in range(31) for x in xs)
    finish(2, err <= 1e-10, f"max |phi_k - P_k| = {err:.2e} (tol 1e-10)", time.perf_counter() - t0, 1)


def test_criterion_03_dense_oracle():
    t0 = time.perf_counter()
    eigs = dense_sphere_oracle(3, 8, 0.5)
    clusters = cluster_eigenvalues(eigs, 1e-6)
    expect = sorted((float(eval_legendre(k, 0.5)), 2 * k + 1) for k in range(9))
    got = sorted(clusters)
    ok = len(got) == len(expect) and all(
        c == m and abs(v - e) <= 1e-6 for (v, c), (e, m) in zip(got, expect)
    )
    worst = max(abs(v - e) for (v, _), (e, _) in zip(got, expect)) if len(got) == len(expect) else math.inf
    finish(3, ok, f"{len(got)} clusters, worst eigenvalue error {worst:.2e} (tol 1e-6)",
           time.perf_counter() - t0, 30)


def test_criterion_04_schatten_convergence_divergence():
    t0 = time.perf_counter()
    op = spectral_operator(3, 0.0)
    try:
        r = schatten_norm(op, 4, tol=1e-8)
        part_a = r.width < 1e-8
        note_a = f"p=4 norm in [{r.norm_low:.10f}, {r.norm_high:.10f}]"
    except RigidkitError as exc:
        part_a = False
        note_a = f"p=4 raised {type(exc).__name__}"
    try:
        schatten_norm(op, 3)
        part_b, note_b = False, "p=3 did not raise"
    except DivergenceError:
        part_b, note_b = True, "p=3 raised DivergenceError"
    s = schatten_partial_sums(op, 3, 10**5)[-1]
    part_c = s > 10
    finish(4, part_a and part_b and part_c,
           f"{note_a}; {note_b}; p=3 partial sum at K=1e5 = {s:.1f}",
           time.perf_counter() - t0, 10)


def test_criterion_05_holder_certificate():
    t0 = time.perf_counter()
    try:
        h = holder_fit(3, 4, np.linspace(-0.5, 0.5, 25))
        h2 = holder_fit(3, 4, np.linspace(-0.5, 0.5, 49))
        stable = abs(h2.C_p / h.C_p - 1) <= 0.05 and abs(h2.alpha_p / h.alpha_p - 1) <= 0.05
        ok = 0 < h.alpha_p < 1 and h.C_p >= 2 and h.max_violation <= 0 and stable
        note = f"C_p={h.C_p:.4g}, alpha_p={h.alpha_p:.4g}, violation={h.max_violation:.2e}, stable={stable}"
    except RigidkitError as exc:
        ok, note = False, f"holder_fit(3, 4) raised {type(exc).__name__}: {exc}"
    finish(5, ok, note, time.perf_counter() - t0, 20)


def test_criterion_06_kak_certificate():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    worst_rt, worst_cos = 0.0, -math.inf
    for _ in range(10**4):
        # d(x - y)/d theta ~ 2 sinh((s - t)/2), so a double theta limits |s - t| to ~30 at 1e-9
        t, s = np.sort(rng.uniform(-10, 10, 2))
        u = rng.uniform(t, (s + t) / 2)
        v = s + t - u
        theta = kak2_solve(v, u, s, t)
        x, y = kak2_forward(s, t, theta)
        worst_rt = max(worst_rt, abs(x - v), abs(y - u))
        worst_cos = max(worst_cos, abs(math.cos(theta)) - math.exp(t - u))
    ok = worst_rt <= 1e-9 and worst_cos <= 1e-12
    finish(6, ok, f"round-trip error {worst_rt:.2e}, max(|cos| - e^(t-u)) = {worst_cos:.2e}",
           time.perf_counter() - t0, 5)


def test_criterion_07_telescoping_bound():
    t0 = time.perf_counter()
    ok = True
    worst = 0.0
    consts = [(C, a) for C in (2.0, 10.0) for a in (0.1, 0.5, 0.9)]
    for n in (3, 4, 5):
        for C, a in consts:
            h = HolderConstants.manual(n, 8, C, a)
            ts = np.linspace(1, 20, 39)
            for t in ts:
                eps = epsilon_decay(n, h, t)
                for s in (t, 2 * t, 10 * t, 50 * t):
                    raw = telescoped_sum(n, h, t, s)
                    worst = max(worst, raw / eps)
                    ok &= raw <= eps * (1 + 1e-12)
            tail = [epsilon_decay(n, h, t) for t in np.linspace(2, 20, 37)]
            ok &= bool(np.all(np.diff(tail) < 0))
            ok &= epsilon_decay(n, h, 2000.0) < 1e-6 * tail[0]
    finish(7, ok, f"max raw/eps = {worst:.12f}; eps strictly decreasing and -> 0",
           time.perf_counter() - t0, 1)


def test_criterion_08_group_enumeration():
    t0 = time.perf_counter()
    sizes = {q: len(enumerate_group(2, q, elementary_generators(2, q))) for q in (2, 3, 5, 7, 11, 13)}
    ok = all(sizes[q] == sl_order(2, q) for q in sizes)
    n33 = len(enumerate_group(3, 3, elementary_generators(3, 3)))
    ok &= n33 == 5616
    finish(8, ok, f"|SL(2,q)| = {sizes}, |SL(3,3)| = {n33}", time.perf_counter() - t0, 60)


def test_criterion_09_expander_family():
    t0 = time.perf_counter()
    reps = []
    for q in (3, 5, 7, 11, 13):
        gens = elementary_generators(2, q)
        reps.append(spectral_report(cayley_build(enumerate_group(2, q, gens), gens)))
    gaps = [r.spectral_gap for r in reps]
    res = max(r.residual for r in reps)
    sandwich = [r.sandwich_holds() for r in reps if r.h_exact is not None]
    ok = min(gaps) >= 0.05 and res <= 1e-8 and sandwich and all(sandwich)
    finish(9, ok, f"gaps {[round(g, 4) for g in gaps]}, max residual {res:.1e}, "
           f"sandwich checked on {len(sandwich)} graph(s)", time.perf_counter() - t0, 300)


def test_criterion_10_poincare_harness(cayley):
    t0 = time.perf_counter()
    g = cayley(7)
    mu, nrm, power = default_measure(g)
    K = mu.max_word_length
    rng = np.random.default_rng(10)
    worst_ratio, worst_frac = 0.0, 1.0
    ok = nrm <= 0.5
    for _ in range(100):
        f = random_lipschitz_embedding(g, 8, rng)
        res = poincare_check(g, f, mu, nrm)
        frac = halfmass_check(g, f, mu, K=K, mu_norm=nrm)
        ok &= res.holds and frac >= 0.5
        worst_ratio, worst_frac = max(worst_ratio, res.ratio), min(worst_frac, frac)
    finish(10, ok, f"||pi(mu)|| = {nrm:.4f} (power {power}, K = {K}); max lhs/rhs {worst_ratio:.3f}, "
           f"min half-mass fraction {worst_frac:.3f}", time.perf_counter() - t0, 120)


def test_criterion_11_eigenvector_ratio(cayley):
    t0 = time.perf_counter()
    g = cayley(7)
    mu = uniform_measure(g)
    vals, vecs = np.linalg.eigh(g.normalized_adjacency().toarray())
    worst = 0.0
    for lam, v in zip(vals[:-1], vecs[:, :-1].T):
        res = poincare_check(g, v, mu)
        worst = max(worst, abs(res.ratio - 1 / (4 * (1 - lam) ** 2)))
    finish(11, worst <= 1e-9, f"{len(vals) - 1} eigenvectors, max ratio error {worst:.2e}",
           time.perf_counter() - t0, 10)


def test_criterion_12_banach_mazur():
    t0 = time.perf_counter()
    r = john_ratio(2)
    ok = bm_small(2) == math.sqrt(2) and abs(r - math.sqrt(2)) <= 1e-9
    finish(12, ok, f"bm_small(2) = {bm_small(2)!r}, John ratio {r!r}", time.perf_counter() - t0, 1)


@pytest.mark.parametrize("dummy", [None])
def test_criterion_13_reproducibility(tmp_path, dummy):
    t0 = time.perf_counter()
    commands = [
        ["phi", "--n", "3", "--kmax", "10", "--grid", "5"],
        ["schatten", "--n", "5", "--p", "4", "--delta", "0,0.25"],
        ["holder-fit", "--n", "5", "--p", "4"],
        ["epsilon", "--n", "4", "--p", "6", "--C", "2", "--alpha", "0.5"],
        ["expander-report", "--n", "2", "--q", "3,5,7"],
        ["poincare", "--n", "2", "--q", "5", "--seed", "4", "--samples", "10"],
        ["embed", "--n", "2", "--q", "3,5", "--seed", "4", "--samples", "5", "--iterations", "60"],
        ["embed", "--n", "2", "--q", "3", "--format", "csv", "--iterations", "60"],
    ]
    same = []
    for i, argv in enumerate(commands):
        a, b = tmp_path / f"{i}a", tmp_path / f"{i}b"
        codes = main(argv + ["--out", str(a)]), main(argv + ["--out", str(b)])
        same.append(codes == (0, 0) and a.read_bytes() == b.read_bytes())
    finish(13, all(same), f"{sum(same)}/{len(same)} commands byte-identical across two runs",
           time.perf_counter() - t0, math.inf)
