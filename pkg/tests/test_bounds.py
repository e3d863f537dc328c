import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thirdlaw import bounds as B
from thirdlaw.oracle import enumerate_joint, exhaustive_optimal_error, greedy_optimal_error, validate_bound
from thirdlaw.spectra import (
    AnalyticBathModel,
    build_system,
    build_thermal_system,
    compose_bath,
    erasure_system,
    exponential_count_bath,
    explicit_bath,
    oscillator_mode,
    radiation_bath,
)
from thirdlaw.statmech import canonical_ensemble, micro_entropy

FIVE = [1.0, 1.31, 1.73, 2.09, 2.47]
SIX = FIVE + [2.83]


@pytest.fixture(scope="module")
def five_osc():
    return compose_bath([oscillator_mode(f, 14) for f in FIVE], 14, 1.0)


@pytest.fixture(scope="module")
def six_osc():
    return compose_bath([oscillator_mode(f, 26) for f in SIX], 26, 1.0)


@pytest.fixture(scope="module")
def exp_bath():
    # I(E) = round(e^E) on the integer grid
    return exponential_count_bath(1.0, 30, 1.0, step=1.0)


# ----------------------------------------------------------------- xi and thresholds

def test_xi_examples():
    th = build_thermal_system([0, 1.5], 2.0)
    assert B.compute_xi(th, 2.0, 0.7)[0] == pytest.approx(2 * 1.5 + 0.7)
    assert B.compute_xi(erasure_system(2), 1.0, 0.3)[0] == pytest.approx(0.3)
    s = build_system([0, 1], [0.9, 0.1])
    xi, w0 = B.compute_xi(s, 1.0, 2.0)
    assert xi == pytest.approx(1 + math.log(9) + 2)
    assert w0 == pytest.approx(1 + math.log(0.9) + 2)


def test_threshold_examples(exp_bath):
    small = explicit_bath([0, 1, 1, 2], 1.0)
    assert B.threshold_energy_general(small, 2, 2, 0.5) == math.inf
    assert B.threshold_energy_general(small, 2, 1, 0.5) == 0.0
    assert B.threshold_energy_general(exp_bath, 2, 1, 1.0) == math.inf
    assert B.threshold_energy_general(exp_bath, 2, 1, 0.5) == 0.0


def test_perfect_cooling_examples(exp_bath):
    assert B.perfect_cooling_check(exp_bath, 2, 1, 1.0)
    assert B.perfect_cooling_check(explicit_bath([0, 1, 1, 2], 1.0), 3, 3, 0.0)
    assert not B.perfect_cooling_check(explicit_bath([0, 1, 1, 2], 1.0), 2, 1, 0.5)


# ----------------------------------------------------------------- error bounds

def test_general_bound_trivial_cases(exp_bath):
    q = erasure_system(2)
    rep = B.error_bound_general(q, exp_bath, 1.0)
    assert rep.epsilon_lb == 0.0 and rep.perfect_cooling
    rep = B.error_bound_general(erasure_system(2, 2), exp_bath, 0.0)
    assert rep.epsilon_lb == 0.0 and rep.perfect_cooling


def test_general_bound_below_exhaustive_optimum():
    q = erasure_system(2)
    bath = explicit_bath([0, 1, 2, 3], 1.0)
    rep = B.error_bound_general(q, bath, 1.0)
    table, slots = enumerate_joint(q, bath)
    exact = exhaustive_optimal_error(table, slots, 1.0)
    relaxed = greedy_optimal_error(table, slots, 1.0)
    assert 0 < rep.epsilon_lb <= relaxed <= exact
    # hand count: one E=1 entry, one E=2 entry and both E=3 entries find no slot;
    # the bound is attained at E = 1 where 2 I(1) - I(2) = 1
    z = sum(math.exp(-k) for k in range(4))
    assert relaxed == pytest.approx((math.exp(-1) + math.exp(-2) + 2 * math.exp(-3)) / (2 * z), rel=1e-14)
    assert rep.epsilon_lb == pytest.approx(math.exp(-1) / (2 * z), rel=1e-14)


def test_general_bound_dominates_threshold_window(five_osc):
    rep = B.error_bound_general(erasure_system(2), five_osc, 0.5)
    assert rep.epsilon_lb >= rep.extras["epsilon_at_threshold"]


def test_premise_examples(exp_bath):
    q = erasure_system(2)
    tiny = explicit_bath([0, 1, 2], 1.0)
    ok, detail = B.premise_check(q, canonical_ensemble(tiny), 100.0)
    assert not ok and "heat-capacity clause FAILED" in detail and "1.3-form" in detail
    ok, detail = B.premise_check(q, canonical_ensemble(exp_bath), 0.1)
    assert not ok and "C_mic clause FAILED" in detail
    rad = radiation_bath(1.0, 3, 1e4, 1.0)
    ok, detail = B.premise_check(q, canonical_ensemble(rad), 2.0)
    assert ok, detail


def test_smooth_analytic_threshold():
    rad = radiation_bath(1.0, 3, 50.0, 1.0)
    s = build_thermal_system([0, 1], 1.0)
    rep = B.error_bound_smooth(s, rad, 3.0)
    L, xi = math.log(4 / 3), 5.0
    assert rep.E_threshold == pytest.approx(50.0 * (L / (0.75 * xi)) ** (1 / (0.75 - 1)))


def test_smooth_falls_back_at_ratio_three_halves(five_osc):
    s = build_system([0, 0, 1], [0.4, 0.4, 0.2])
    assert s.d / s.g == 1.5
    rep = B.error_bound_smooth(s, five_osc, 0.5)
    assert rep.method == "general" and any("inapplicable" in n for n in rep.notes)
    with pytest.raises(B.BoundInapplicableError):
        B.error_bound_smooth(s, radiation_bath(1.0, 1, 10.0, 1.0), 0.5)


@pytest.mark.parametrize("w_max", [0.5, 1.0])
def test_smooth_not_above_general(five_osc, w_max):
    q = erasure_system(2)
    sm = B.error_bound_smooth(q, five_osc, w_max)
    assert sm.method == "smooth"
    assert sm.epsilon_lb <= B.error_bound_general(q, five_osc, w_max).epsilon_lb


# ----------------------------------------------------------------- temperatures

def test_temperature_from_error():
    s = build_thermal_system([0, 1], 1.0)
    assert B.temperature_from_error(s, 2 / math.e) == pytest.approx(1.0)
    vals = [B.temperature_from_error(s, e) for e in (1e-1, 1e-3, 1e-9, 1e-100)]
    assert all(a > b > 0 for a, b in zip(vals, vals[1:]))
    assert B.temperature_from_error(s, 0.0) is None
    assert B.temperature_from_error(s, 2.0) is None
    eps = 0.0123
    T = B.temperature_from_error(s, eps)
    assert (s.d / s.g) * math.exp(-s.Delta / T) == pytest.approx(eps, rel=1e-12)
    with pytest.raises(B.BoundInapplicableError):
        B.temperature_from_error(erasure_system(2), 0.1)


def test_thermal_bound_specialization(six_osc):
    s = build_thermal_system([0, 0.25], 1.0)
    rep = B.thermal_cooling_bound(s, six_osc, 0.5)
    assert rep.xi == pytest.approx(2 * 0.25 + 0.5)
    assert rep.f_mic >= rep.f_can


@pytest.mark.parametrize("J,w_max", [(0.25, 0.0), (0.25, 0.5), (0.25, 1.0), (0.5, 0.25)])
def test_consistency_chain(six_osc, J, w_max):
    s = build_thermal_system([0, J], 1.0)
    sm = B.error_bound_smooth(s, six_osc, w_max)
    assert sm.method == "smooth"
    direct = B.thermal_cooling_bound(s, six_osc, w_max).T_prime_lb
    assert B.temperature_from_error(s, sm.epsilon_lb) >= direct - 1e-9


def test_thermal_analytic_reduces_to_radiation():
    s = build_thermal_system([0, 1], 1.0)
    rad = radiation_bath(1.0, 2, 500.0, 1.0)
    th = B.thermal_cooling_bound(s, rad, 10.0)
    rb = B.radiation_bound(s, rad, 10.0)
    assert th.T_prime_asymptote == pytest.approx(rb.extras["T_prime_unrelaxed"], rel=1e-9)
    assert rb.T_prime_lb <= rb.extras["T_prime_unrelaxed"]


def test_radiation_bath_term_scales_as_xi_to_the_fourth():
    s = build_thermal_system([0, 1], 1.0)
    rad = radiation_bath(1.0, 3, 10.0, 1.0)
    tail = 1.0 + math.log(6)

    def bath_term(w):
        return 1.0 / B.radiation_bound(s, rad, w).T_prime_lb - tail

    # xi = 2 + w_max: 8 -> 16
    assert bath_term(14.0) / bath_term(6.0) == pytest.approx(16.0, rel=1e-12)


def test_radiation_strictly_decreasing_in_work():
    s = build_thermal_system([0, 1], 1.0)
    rad = radiation_bath(1.0, 3, 10.0, 1.0)
    vals = [B.radiation_bound(s, rad, w).T_prime_lb for w in np.linspace(0, 10, 10)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_radiation_requires_analytic(five_osc):
    with pytest.raises(TypeError):
        B.radiation_bound(build_thermal_system([0, 1], 1.0), five_osc, 1.0)


# ----------------------------------------------------------------- time

@pytest.mark.parametrize("D,n", [(1, 3), (2, 5), (3, 7)])
def test_time_bound_exponent(D, n):
    s = build_thermal_system([0, 1], 1.0)
    rad = radiation_bath(1.0, D, 1.0, 1.0)
    rep, exponent = B.time_bound(s, rad, B.ResourceBudget.at_time(1e5, 1.0, 1.0, D))
    assert exponent == n == rep.extras["exponent"]
    assert rep.T_prime_lb == pytest.approx(rep.T_prime_asymptote, rel=0.05)


def test_time_bound_rejects_mismatched_bath():
    s = build_thermal_system([0, 1], 1.0)
    bad = AnalyticBathModel(1.0, 0.6, 1.0, 3, 1.0)
    with pytest.raises(B.BoundInapplicableError):
        B.time_bound(s, bad, B.ResourceBudget.at_time(10.0, 1.0, 1.0, 3))


def test_characteristic_time_exponent():
    assert B.characteristic_time_exponent(3) == Fraction(4, 7)
    assert B.characteristic_time_exponent(1) == Fraction(2, 3)
    assert abs(float(B.characteristic_time_exponent(10**6)) - 0.5) < 1e-6


def test_characteristic_time_inverts_asymptote():
    s = build_thermal_system([0, 1], 1.0)
    rad = radiation_bath(1.0, 3, 1.0, 1.0)
    t = B.characteristic_time(s, rad, 1.0, 1.0, 1e-30)
    rep, _ = B.time_bound(s, rad, B.ResourceBudget.at_time(t, 1.0, 1.0, 3))
    assert rep.T_prime_asymptote == pytest.approx(1e-30, rel=1e-9)


def test_resource_budget_frontier():
    b = B.ResourceBudget.at_time(2.0, 3.0, 5.0, 2)
    assert b.V == 100.0 and b.w_max == 6.0
    with pytest.raises(ValueError):
        B.ResourceBudget(w_max=7.0, u=3.0, v=5.0, D=2, V=100.0, t=2.0)
    with pytest.raises(ValueError):
        B.ResourceBudget(w_max=1.0, u=3.0, v=5.0, D=2, V=101.0, t=2.0)


# ----------------------------------------------------------------- truncation and remaps

@pytest.fixture(scope="module")
def three_osc_60():
    return compose_bath([oscillator_mode(f, 60) for f in (1.0, 1.414, 1.732)], 60, 1.0)


def test_truncation_optimize(three_osc_60):
    res = B.truncation_optimize(lambda k: float(k), 1.0, three_osc_60, 5.0, range(1, 31))
    sweep = dict(res.sweep)
    assert sweep[1] == 0.0
    assert sweep[2] > 0
    assert 2 < res.best_dim < 30
    assert res.best.epsilon_lb >= sweep[2]
    assert sweep[30] < res.best.epsilon_lb
    with pytest.raises(ValueError):
        B.truncation_optimize(lambda k: float(k), 1.0, three_osc_60, 5.0, [])


def test_remap_identity_and_larger_target(five_osc):
    s = build_thermal_system([0, 1, 2, 3], 1.0)
    same = B.remap_changed_hamiltonian(s, s.g, s.Delta)
    assert B.error_bound_general(same, five_osc, 0.5) == B.error_bound_general(s, five_osc, 0.5)
    wider = B.remap_changed_hamiltonian(s, 2 * s.g, s.Delta)
    assert B.error_bound_general(wider, five_osc, 0.5).epsilon_lb <= B.error_bound_general(s, five_osc, 0.5).epsilon_lb


def test_remap_to_degenerate_ground_checked_by_oracle():
    q = erasure_system(3)
    bath = explicit_bath([0, 0.5, 1.0, 1.5, 2.0, 2.5], 1.0)
    remapped = B.remap_changed_hamiltonian(q, 2, 1.0)
    rep = validate_bound(remapped, bath, 0.5)
    assert rep.ok and rep.epsilon_bound > 0


def test_discard_ratio():
    assert B.discard_subsystem_ratio(2, 1, 3) == (6, 3)
    assert B.discard_subsystem_ratio(5, 2, 1) == (5, 2)


@pytest.mark.parametrize("method", [B.error_bound_general, B.error_bound_smooth])
def test_discard_invariance(five_osc, method):
    s = build_thermal_system([0, 0.5], 1.0)
    vals = [method(B.discard_subsystem(s, k), five_osc, 0.5).epsilon_lb for k in (1, 2, 4, 8)]
    assert np.ptp(vals) <= 1e-9 * max(vals)


def test_isothermal_shift_protocol():
    pts = B.isothermal_shift_protocol(1.0, 1.0, 1.0, [0.0, 1.0, 4.0])
    assert pts[0].T_prime == 1.0
    assert pts[1].T_prime == 0.5
    assert all(p.W == pytest.approx(math.log(1 + math.exp(-1))) for p in pts)
    assert pts[2].p_ground == pytest.approx(1 / (1 + math.exp(-5)))


# ----------------------------------------------------------------- properties

energies = st.lists(st.floats(0, 4, allow_nan=False), min_size=2, max_size=30)


@given(energies, st.floats(0.1, 5), st.lists(st.floats(0, 6), min_size=2, max_size=6))
def test_general_bound_monotone_in_work(e, beta, ws):
    bath = explicit_bath(e, beta)
    s = build_system([0, 0.5, 1.0], [0.5, 0.3, 0.2])
    vals = [B.error_bound_general(s, bath, w).epsilon_lb for w in sorted(ws)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


@given(energies, st.floats(0.1, 5), st.floats(0, 3))
def test_epsilon_within_unit_interval(e, beta, w):
    rep = B.error_bound_general(erasure_system(3), explicit_bath(e, beta), w)
    assert 0.0 <= rep.epsilon_lb <= 1.0
    if rep.perfect_cooling:
        assert rep.epsilon_lb == 0.0


@given(st.integers(3, 14), st.floats(0.2, 2), st.sampled_from([1.0, 0.5, 2.0]))
def test_perfect_cooling_implies_zero_error(n, alpha, factor):
    bath = exponential_count_bath(alpha, n, 1.0)
    w = factor * math.log(2) / alpha
    q = erasure_system(2)
    if B.perfect_cooling_check(bath, 2, 1, w):
        table, slots = enumerate_joint(q, bath)
        assert B.error_bound_general(q, bath, w).epsilon_lb == 0.0
        assert greedy_optimal_error(table, slots, w) == 0.0
