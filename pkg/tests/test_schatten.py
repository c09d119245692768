import json
import math

import numpy as np
import pytest

from rigidkit.errors import DivergenceError, InsufficientSamplingError, NotCompactError, TruncationError
from rigidkit.schatten import (
    HolderConstants,
    MultiplierCoefficients,
    cluster_eigenvalues,
    critical_exponent,
    dense_sphere_oracle,
    holder_fit,
    multiplier_coeff_norm,
    oscillation_actual,
    oscillation_bound,
    results_to_csv,
    schatten_diff,
    schatten_norm,
    schatten_partial_sums,
    spectral_operator,
)


def test_critical_exponent():
    assert critical_exponent(3) == 4
    assert critical_exponent(4) == 3
    assert critical_exponent(6) == 2.5


def test_n4_delta0_closed_form():
    # phi_k(0) = sin((k+1) pi/2)/(k+1), m_k = (k+1)^2: ||T_0||_6^6 = sum_{j odd} j^-4 = pi^4/96
    r = schatten_norm(spectral_operator(4, 0.0), 6, tol=1e-9)
    exact = (math.pi**4 / 96) ** (1 / 6)
    assert r.norm_low <= exact <= r.norm_high
    assert r.width <= 1e-9


def test_operator_iterates_multiplicity_and_eigenvalue():
    op = spectral_operator(3, 0.5)
    it = iter(op)
    pairs = [next(it) for _ in range(4)]
    assert [m for m, _ in pairs] == [1, 3, 5, 7]
    assert pairs[2][1] == pytest.approx(-0.125)


def test_domain_errors():
    with pytest.raises(NotCompactError):
        schatten_norm(spectral_operator(4, 1.0), 6)
    with pytest.raises(DivergenceError):
        schatten_norm(spectral_operator(4, 0.2), 3)
    with pytest.raises(DivergenceError):
        schatten_norm(spectral_operator(3, 0.0), 4)


def test_truncation_error_when_tail_too_slow():
    with pytest.raises(TruncationError) as info:
        schatten_norm(spectral_operator(4, 0.0), 3.5, tol=1e-12)
    assert info.value.K_used == 2**19 and info.value.width > 1e-12


def test_sup_norm_is_one_at_k0():
    r = schatten_norm(spectral_operator(5, 0.3), math.inf)
    assert r.norm_low == 1.0 and r.norm_high == 1.0


def test_identical_deltas_give_zero():
    r = schatten_diff(5, 0.2, 0.2, 4)
    assert r.norm_high == 0.0


def test_norm_decreases_in_p():
    op = spectral_operator(5, 0.3)
    a, b = schatten_norm(op, 4, 1e-8), schatten_norm(op, 8, 1e-8)
    assert b.norm_high <= a.norm_low


def test_partial_sums_increase_and_diverge_at_critical_point():
    s = schatten_partial_sums(spectral_operator(3, 0.0), 3, 20000)
    assert np.all(np.diff(s) >= 0)
    assert s[-1] > 10


def test_dense_oracle_matches_legendre():
    from scipy.special import eval_legendre

    eigs = dense_sphere_oracle(3, 6, 0.3)
    expect = np.sort(np.concatenate([[eval_legendre(k, 0.3)] * (2 * k + 1) for k in range(7)]))[::-1]
    assert np.max(np.abs(eigs - expect)) < 1e-12
    counts = sorted(c for _, c in cluster_eigenvalues(eigs, 1e-8))
    assert counts == sorted(2 * k + 1 for k in range(7))


def test_dense_oracle_detects_undersampling():
    with pytest.raises(InsufficientSamplingError):
        dense_sphere_oracle(3, 8, 0.5, N=5)


def test_holder_fit_valid_regime():
    h = holder_fit(5, 4)
    assert 0 < h.alpha_p < 1 and h.C_p >= 2 and h.max_violation <= 0
    grid = np.abs(np.array(h.grid))
    assert np.all(np.array(h.norms) <= h.C_p * grid**h.alpha_p)
    data = json.loads(h.to_json())
    assert data["C_p"] == h.C_p


def test_manual_constants_validated():
    with pytest.raises(ValueError):
        HolderConstants.manual(3, 4, -1.0, 0.5)


def test_coefficient_norm_duality():
    mc = MultiplierCoefficients(3, (0.0, 0.5, 0.25))
    # q = 2 for p = 2: sqrt(3 * 0.25 + 5 * 0.0625)
    assert multiplier_coeff_norm(mc, 2) == pytest.approx(math.sqrt(3 * 0.25 + 5 * 0.0625))
    assert multiplier_coeff_norm(mc, 1) == 0.5


def test_oscillation_bound_dominates():
    rng = np.random.default_rng(1)
    mc = MultiplierCoefficients(3, tuple(rng.normal(size=6) / 10))
    for a, b in [(0.1, 0.3), (-0.4, 0.2)]:
        bound = oscillation_bound(mc, a, b, 4, restrict_to_support=True)
        assert oscillation_actual(mc, a, b) <= bound
    mc5 = MultiplierCoefficients(5, (0.2, -0.1, 0.05))
    assert oscillation_actual(mc5, 0.0, 0.3) <= oscillation_bound(mc5, 0.0, 0.3, 4)


def test_csv_columns():
    r = schatten_norm(spectral_operator(5, 0.1), 4)
    lines = results_to_csv([r]).splitlines()
    assert lines[0] == "n,delta,p,norm_low,norm_high,K_used"
    assert len(lines) == 2


def test_n3_p4_partial_sums_grow_logarithmically():
    # m_k phi_k(0)^4 ~ (4/pi^2)/k on even k, so each decade adds (4/pi^2) ln 10
    s = schatten_partial_sums(spectral_operator(3, 0.0), 4, 200000)
    per_decade = s[200000] - s[20000]
    assert per_decade == pytest.approx(4 / math.pi**2 * math.log(10), rel=1e-3)


def test_holder_fit_n3_above_critical_exponent():
    h = holder_fit(3, 8, tol=1e-4)
    assert 0 < h.alpha_p < 1 and h.C_p >= 2 and h.max_violation <= 0
