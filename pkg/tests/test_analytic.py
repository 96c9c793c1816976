import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from ipdage import analytic as A
from ipdage.model import (
    PRESETS,
    DomainError,
    FailureCountDist,
    InvalidParameter,
    NoInteriorMinimum,
    ScenarioParams,
    SingleFrequency,
    SplitFrequency,
    TimeDist,
)

from .oracles import compound_poisson_variance, grid_argmin, paoi_mixed_direct, uniform_mean

RF1, RF2 = PRESETS["RF1"], PRESETS["RF2"]


def test_derived_constants():
    c = A.derived_constants(RF1)
    assert (c.c1, c.c2) == (63, 700)
    assert (c.c3, c.c4) == (15 * 63 + 700, 7500)


@pytest.mark.parametrize("k,d", [(50, 5), (1, 1), (20, 5), (5, 5)])
def test_expected_wasted_work_enumeration(k, d):
    assert A.expected_wasted_work(k, d) == uniform_mean(k + d)


def test_expected_wasted_work_values():
    assert A.expected_wasted_work(50, 5) == 28
    assert A.expected_wasted_work(1, 1) == 1.5
    assert A.expected_wasted_work(RF1.mean_processing / 10, RF1.checkpoint_cost) == 28
    with pytest.raises(DomainError):
        A.expected_wasted_work(0.5, 5)
    with pytest.raises(DomainError):
        A.expected_wasted_work(10, 0)


def test_expected_inter_completion():
    assert A.expected_inter_completion(RF1, 10) == 2070
    assert A.expected_inter_completion(RF2, 10) == 1428
    assert A.expected_completion(RF1, 10) == 1870
    free = RF1.replace(mean_failures=0)
    assert A.expected_inter_completion(free, 7) == 200 + 500 + 5 * 7
    with pytest.raises(DomainError):
        A.expected_inter_completion(RF1, 0)


def test_paoi_mixed():
    assert A.paoi_mixed(RF1, 10) == 3940
    assert A.paoi_mixed(RF2, 10) == 2656
    free = RF1.replace(mean_failures=0)
    hs = np.linspace(0.5, 100, 50)
    vals = [A.paoi_mixed(free, h) for h in hs]
    assert vals == [700 + 500 + 10 * h for h in hs]
    assert all(np.diff(vals) > 0)
    with pytest.raises(DomainError):
        A.paoi_mixed(RF1, -1)


def test_optimal_h_paoi_against_grid():
    for params, expected in ((RF1, math.sqrt(750)), (RF2, math.sqrt(300))):
        h = A.optimal_h_paoi(params)
        assert h == pytest.approx(expected, abs=1e-12)
        fn = lambda xs: paoi_mixed_direct(params.mean_failures, 500, params.mean_offtime, 200, 5, 10, xs)
        h_grid, v_grid = grid_argmin(fn, 0, 200, 1e-3)
        assert abs(h_grid - h) <= 1e-3
        assert A.paoi_mixed(params, h) <= v_grid
        assert abs(A.paoi_mixed_derivative(params, h)) < 1e-9


def test_optimal_h_paoi_unit_and_errors():
    # E[f] E[P] / (2D) == 1
    params = RF1.replace(mean_failures=2 * 5 / 500)
    assert A.optimal_h_paoi(params) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(DomainError):
        A.optimal_h_paoi(RF1.replace(mean_failures=0))


def test_variance_rf1_exact_convolution():
    # X = L + R + V with L uniform on {1..55}, R = 50, V = 10
    pmf = {60 + l: 1 / 55 for l in range(1, 56)}
    exact = compound_poisson_variance(15, pmf)
    assert exact == pytest.approx(119940, rel=1e-12)
    assert A.variance_inter_completion(RF1, SingleFrequency(10)) == 119940
    assert A.variance_inter_completion(RF1, 10) == 119940


def test_variance_degenerate_cases():
    assert A.variance_inter_completion(RF1.replace(mean_failures=0), 10) == 0
    # K = 0.5, D = 0.5 -> K + D = 1 so L == 1; R = V = 0, one failure on average
    unit = ScenarioParams(1, 0, 1, 0, 0.5, 0)
    assert A.variance_inter_completion(unit, 2) == 1


def test_variance_other_distributions():
    fixed = RF1.replace(failure_count_dist=FailureCountDist.FIXED)
    assert A.variance_inter_completion(fixed, 10) == 15 * 252
    expo = RF1.replace(offtime_dist=TimeDist.EXPONENTIAL, idle_dist=TimeDist.EXPONENTIAL)
    # geometric off-time: Var R = 50*51; E[X^2] = 252 + 2550 + 88^2; idle adds 200*201
    assert A.variance_inter_completion(expo, 10) == 15 * (252 + 2550 + 88**2) + 200 * 201


def test_variance_split_mixture():
    pol = SplitFrequency(5, 20, 20, 20)
    pa, pb = 5 / 25, 20 / 25
    l_vals_a, l_vals_b = np.arange(1, 11), np.arange(1, 26)
    e_l2 = pa * (l_vals_a**2).mean() + pb * (l_vals_b**2).mean()
    e_x2 = e_l2 + 2 * 11.5 * 60 + 60**2
    assert A.variance_inter_completion(RF1, pol) == pytest.approx(15 * e_x2, rel=1e-12)


def test_avg_aoi_mixed():
    assert A.avg_aoi_mixed(RF1, 10, 0) == pytest.approx(2905, rel=1e-12)
    assert A.avg_aoi_mixed(RF1, 10, 119940) == pytest.approx(2905 + 119940 / 4140, rel=1e-12)
    assert A.avg_aoi_mixed(RF1, 10, 119940) == pytest.approx(2933.97, abs=5e-3)
    free = RF1.replace(mean_failures=0)
    assert A.avg_aoi_mixed(free, 10, 0) == pytest.approx(1.5 * 750 - 200, rel=1e-12)
    with pytest.raises(DomainError):
        A.avg_aoi_mixed(RF1, 10, -1)


@given(st.floats(1, 1e3), st.floats(0, 1e6))
def test_avg_aoi_matches_generic_form(h, var_y):
    mean_y = A.expected_inter_completion(RF1, h)
    generic = var_y / (2 * mean_y) + 1.5 * mean_y - RF1.mean_idle
    assert A.avg_aoi_mixed(RF1, h, var_y) == pytest.approx(generic, rel=1e-9)


def test_optimal_h_aoi_var_free_matches_paoi_optimum():
    h = A.optimal_h_aoi(RF1, var_y=0)
    assert h == pytest.approx(math.sqrt(750), abs=1e-6)


def _aoi_full(params, hs):
    # independent vectorized evaluation: Var(Y) = E[f] E[X^2], Eq. 18 generic form
    k = params.mean_processing / hs
    n = k + params.checkpoint_cost
    e_l = (n + 1) / 2
    e_x2 = (n * n - 1) / 12 + (e_l + params.mean_offtime + params.restore_cost) ** 2
    var_y = params.mean_failures * e_x2
    e_y = (params.mean_idle + params.mean_failures * (e_l + params.mean_offtime + params.restore_cost)
           + params.mean_processing + params.checkpoint_cost * hs)
    return var_y / (2 * e_y) + 1.5 * e_y - params.mean_idle


@pytest.mark.parametrize("params", [RF1, RF2])
def test_optimal_h_aoi_full_model_against_grid(params):
    h = A.optimal_h_aoi(params)
    assert 0 < h <= params.mean_processing
    h_grid, v_grid = grid_argmin(lambda xs: _aoi_full(params, xs), 1, 500, 1e-3)
    assert abs(h - h_grid) <= 1e-3
    best = A.avg_aoi_mixed(params, h, A.variance_inter_completion(params, h))
    assert best <= v_grid * (1 + 1e-15)
    obj = lambda x: A.avg_aoi_mixed(params, x, A.variance_inter_completion(params, x))
    # within 1e-6 of h the objective is flat to rounding; allow a few ulps
    for x in (h - 1e-6, h + 1e-6):
        assert best <= obj(x) * (1 + 4 * np.finfo(float).eps)


def test_optimal_h_aoi_no_interior_minimum():
    with pytest.raises(NoInteriorMinimum):
        A.optimal_h_aoi(RF1.replace(mean_failures=1e-12))
    with pytest.raises(NoInteriorMinimum):
        A.optimal_h_aoi(RF1.replace(mean_failures=0))


def test_baselines():
    assert A.paoi_nvm(RF1) == 2700
    assert A.paoi_nvm(RF2) == 2100
    assert A.paoi_vm(RF1) == 16215
    assert A.paoi_vm(RF2) == 7506
    free = RF1.replace(mean_failures=0)
    assert A.paoi_nvm(free) == A.paoi_vm(free) == 200 + 1000


def test_gap():
    assert A.paoi_gap_mm_nvm(RF1, 10) == 1240 == 3940 - 2700
    assert A.paoi_gap_mm_nvm(RF2, 10) == 556 == 2656 - 2100
    assert A.paoi_gap_mm_nvm(RF1.replace(mean_failures=0), 7) == 70


def test_lemma2_witnesses():
    assert A.paoi_vm(RF1) > A.paoi_mixed(RF1, 10)
    free = RF1.replace(mean_failures=0)
    for h in (1, 10, 100):
        assert A.paoi_vm(free) < A.paoi_mixed(free, h)


def test_wasted_work_split():
    assert A.expected_wasted_work_split(5, 20, 5) == 11.5
    pa, pb = 5 / 25, 20 / 25
    assert A.expected_wasted_work_split(5, 20, 5) == pytest.approx(pa * uniform_mean(10) + pb * uniform_mean(25), abs=1e-12)
    assert A.expected_wasted_work_split(1, 1, 1) == 1.5
    for k in (1, 7, 50):
        assert A.expected_wasted_work_split(k, k, 5) == A.expected_wasted_work(k, 5)


def test_paoi_sfc():
    assert A.paoi_sfc(RF1, SplitFrequency(5, 20, 20, 20)) == 3745
    assert A.paoi_sfc(RF1.replace(mean_failures=0), SplitFrequency(5, 20, 20, 20)) == 1600
    assert A.paoi_sfc(RF1, SplitFrequency(50, 50, 5, 5)) == A.paoi_mixed(RF1, 10)
    with pytest.raises(InvalidParameter):
        A.paoi_sfc(RF1, SplitFrequency(5, 20, 20, 19))


def test_policy_dispatch():
    pol = SplitFrequency(5, 20, 20, 20)
    assert A.inter_completion_for(RF1, pol, "mixed") - (A.paoi_sfc(RF1, pol) - A.inter_completion_for(RF1, pol, "mixed")) == 200
    assert A.inter_completion_for(RF1, None, "nvm") * 2 - 200 == A.paoi_nvm(RF1)
    assert A.inter_completion_for(RF1, None, "vm") * 2 - 200 == A.paoi_vm(RF1)


# ---------------------------------------------------------------- properties

fuzz_params = st.builds(
    ScenarioParams,
    mean_processing=st.floats(1, 1e5),
    mean_offtime=st.floats(0, 1e4),
    mean_failures=st.floats(0, 200),
    mean_idle=st.floats(0, 1e4),
    checkpoint_cost=st.floats(1e-2, 100),
    restore_cost=st.floats(0, 1e3),
)


@settings(max_examples=300)
@given(fuzz_params, st.floats(1e-2, 1e4))
def test_paoi_identity(params, h):
    lhs = A.paoi_mixed(params, h)
    rhs = A.expected_inter_completion(params, h) + A.expected_completion(params, h)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    assert lhs == pytest.approx(paoi_mixed_direct(params.mean_failures, params.mean_processing,
                                                  params.mean_offtime, params.mean_idle,
                                                  params.checkpoint_cost, params.restore_cost, h), rel=1e-12)


@settings(max_examples=300)
@given(fuzz_params, st.floats(1e-2, 1e4))
def test_lemma1(params, h):
    gap = A.paoi_gap_mm_nvm(params, h)
    assert gap >= 0
    assert A.paoi_nvm(params) <= A.paoi_mixed(params, h)
    # the difference of two large values carries their rounding error
    mm = A.paoi_mixed(params, h)
    assert gap == pytest.approx(mm - A.paoi_nvm(params), rel=1e-9, abs=1e-12 * mm)


@settings(max_examples=300)
@given(fuzz_params, st.floats(1, 1e3), st.floats(1e-2, 1e3))
def test_sfc_reduction(params, k, h_half):
    params = params.replace(mean_processing=2 * h_half * k)
    pol = SplitFrequency(k, k, h_half, h_half)
    assert A.paoi_sfc(params, pol) == pytest.approx(A.paoi_mixed(params, 2 * h_half), rel=1e-12)


@settings(max_examples=200)
@given(fuzz_params)
def test_optimum_beats_grid(params):
    assume(params.mean_failures > 1e-3)
    h_star = A.optimal_h_paoi(params)
    best = A.paoi_mixed(params, h_star)
    for h in np.arange(1, 401) * h_star / 100:
        assert best <= A.paoi_mixed(params, h) * (1 + 1e-14)


@settings(max_examples=200)
@given(fuzz_params, st.floats(1e-3, 1.0))
def test_under_checkpointing_asymmetry(params, frac):
    assume(params.mean_failures > 1e-3)
    h_star = A.optimal_h_paoi(params)
    assume(h_star > 1.01)
    delta = frac * (h_star - 1)
    assert A.paoi_mixed(params, h_star - delta) > A.paoi_mixed(params, h_star + delta)


@settings(max_examples=200)
@given(fuzz_params, st.floats(1e-1, 1e3))
def test_derivative_finite_difference(params, h):
    eps = 1e-4 * h
    fd = (A.paoi_mixed(params, h + eps) - A.paoi_mixed(params, h - eps)) / (2 * eps)
    exact = A.paoi_mixed_derivative(params, h)
    scale = 2 * params.checkpoint_cost + params.mean_failures * params.mean_processing / h**2
    # compare relative to the size of the two terms: the derivative itself can cancel to ~0
    assert abs(fd - exact) <= 1e-6 * scale + 1e-13 * A.paoi_mixed(params, h) / eps
