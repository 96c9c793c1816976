"""Closed-form PAoI/AoI expressions for a checkpointing intermittently-powered device.

``h`` is the mean number of checkpoints per cycle and is treated as a real
number throughout; the interval is ``K = E[P] / h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import minimize_scalar

from .model import (
    Architecture,
    CheckpointPolicy,
    DomainError,
    FailureCountDist,
    NoInteriorMinimum,
    ScenarioParams,
    SingleFrequency,
    SplitFrequency,
    TimeDist,
    Unsupported,
    validate,
)


@dataclass(frozen=True)
class DerivedConstants:
    c1: float
    c2: float
    c3: float
    c4: float


def derived_constants(params: ScenarioParams) -> DerivedConstants:
    c1 = params.mean_offtime + params.restore_cost + (params.checkpoint_cost + 1) / 2
    c2 = params.mean_idle + params.mean_processing
    return DerivedConstants(
        c1=c1,
        c2=c2,
        c3=params.mean_failures * c1 + c2,
        c4=params.mean_failures * params.mean_processing,
    )


def _check_h(h):
    if not h > 0:
        raise DomainError(f"checkpoints per cycle must be > 0, got {h!r}")


def expected_wasted_work(k: float, d: float) -> float:
    """Mean ticks lost per failure when L is uniform on {1 .. k + d}."""
    if not k >= 1:
        raise DomainError(f"interval must be >= 1 tick, got {k!r}")
    if not d > 0:
        raise DomainError(f"checkpoint cost must be > 0, got {d!r}")
    return (k + d + 1) / 2


def expected_inter_completion(params: ScenarioParams, h: float) -> float:
    _check_h(h)
    c = derived_constants(params)
    return (
        params.mean_failures * (c.c1 + params.mean_processing / (2 * h))
        + c.c2
        + params.checkpoint_cost * h
    )


def expected_completion(params: ScenarioParams, h: float) -> float:
    return expected_inter_completion(params, h) - params.mean_idle


def paoi_mixed(params: ScenarioParams, h: float) -> float:
    """Average peak age of the mixed-memory device checkpointing ``h`` times per cycle."""
    _check_h(h)
    c = derived_constants(params)
    return (
        2 * params.mean_failures * (c.c1 + params.mean_processing / (2 * h))
        + c.c2
        + params.mean_processing
        + 2 * params.checkpoint_cost * h
    )


def paoi_mixed_derivative(params: ScenarioParams, h: float) -> float:
    _check_h(h)
    return 2 * params.checkpoint_cost - params.mean_failures * params.mean_processing / h**2


def optimal_h_paoi(params: ScenarioParams) -> float:
    """Checkpoints per cycle minimising the mixed-memory PAoI."""
    f, p, d = params.mean_failures, params.mean_processing, params.checkpoint_cost
    if not f > 0:
        raise DomainError("mean_failures must be > 0: without failures checkpointing never helps")
    if not (p > 0 and d > 0):
        raise DomainError("mean_processing and checkpoint_cost must be > 0")
    return math.sqrt(f * p / (2 * d))


# ---------------------------------------------------------------- variance


def _time_variance(dist: TimeDist, mean: float) -> float:
    # Exponential durations are realized as geometric ticks on {0, 1, ...}
    # with the same mean, so the variance is mean * (mean + 1).
    if dist is TimeDist.DETERMINISTIC:
        return 0.0
    if dist is TimeDist.EXPONENTIAL:
        return mean * (mean + 1)
    raise Unsupported(f"no closed-form variance for {dist!r}")


def _wasted_work_moments(params: ScenarioParams, policy: CheckpointPolicy) -> tuple[float, float]:
    """Mean and second moment of L, mixing intervals in proportion to their length."""
    d = params.checkpoint_cost
    if isinstance(policy, SingleFrequency):
        parts = [(1.0, policy.interval(params.mean_processing))]
    elif isinstance(policy, SplitFrequency):
        total = policy.k_alpha + policy.k_beta
        parts = [(policy.k_alpha / total, policy.k_alpha), (policy.k_beta / total, policy.k_beta)]
    else:
        raise Unsupported(f"unknown policy {policy!r}")
    m1 = m2 = 0.0
    for weight, k in parts:
        n = k + d
        mean = (n + 1) / 2
        m1 += weight * mean
        m2 += weight * ((n * n - 1) / 12 + mean * mean)
    return m1, m2


def variance_inter_completion(params: ScenarioParams, policy) -> float:
    """Var(Y) for the mixed-memory device.

    ``policy`` may be a CheckpointPolicy or a bare ``h``. The failure term is a
    random sum over the failure count, so Var = E[N] Var(X) + Var(N) E[X]^2 with
    X = L + R + V per failure.
    """
    if not isinstance(policy, (SingleFrequency, SplitFrequency)):
        _check_h(policy)
        policy = SingleFrequency(policy)
    el, el2 = _wasted_work_moments(params, policy)
    var_l = el2 - el * el
    var_x = var_l + _time_variance(params.offtime_dist, params.mean_offtime)
    mean_x = el + params.mean_offtime + params.restore_cost

    if params.failure_count_dist is FailureCountDist.POISSON:
        n_mean = n_var = params.mean_failures
    elif params.failure_count_dist is FailureCountDist.FIXED:
        n_mean, n_var = float(round(params.mean_failures)), 0.0
    else:
        raise Unsupported(f"no closed-form variance for {params.failure_count_dist!r}")

    return (
        n_mean * var_x
        + n_var * mean_x * mean_x
        + _time_variance(params.idle_dist, params.mean_idle)
    )


# ---------------------------------------------------------------- average AoI


def avg_aoi_from_moments(mean_y: float, var_y: float, mean_idle: float) -> float:
    return var_y / (2 * mean_y) + 1.5 * mean_y - mean_idle


def avg_aoi_mixed(params: ScenarioParams, h: float, var_y: float) -> float:
    _check_h(h)
    if not var_y >= 0:
        raise DomainError(f"var_y must be >= 0, got {var_y!r}")
    c = derived_constants(params)
    d = params.checkpoint_cost
    return (
        var_y / (2 * c.c3 + c.c4 / h + 2 * d * h)
        + 1.5 * (c.c3 + c.c4 / (2 * h) + d * h)
        - params.mean_idle
    )


def optimal_h_aoi(params: ScenarioParams, var_y: float | None = None, tol: float = 1e-6) -> float:
    """Minimise the average AoI over h in [1, E[P]].

    With ``var_y`` None the variance follows ``variance_inter_completion`` at each
    h; otherwise it is held fixed. At least one checkpoint per cycle is needed
    since transmission follows a final checkpoint, hence the lower bound of 1.
    """
    if not params.checkpoint_cost > 0:
        raise DomainError("checkpoint_cost must be > 0")
    lo, hi = 1.0, params.mean_processing
    if not hi > lo:
        raise NoInteriorMinimum(f"bracket [1, {hi:g}] is empty")

    if var_y is None:
        def objective(h):
            return avg_aoi_mixed(params, h, variance_inter_completion(params, h))
    else:
        def objective(h):
            return avg_aoi_mixed(params, h, var_y)

    res = minimize_scalar(objective, bounds=(lo, hi), method="bounded", options={"xatol": tol / 10})
    h = float(res.x)
    # Brent's bounded method never evaluates the endpoints themselves.
    if h - lo < 10 * tol and objective(lo) <= objective(h):
        raise NoInteriorMinimum(f"average AoI is increasing on [{lo:g}, {hi:g}]")
    if hi - h < 10 * tol and objective(hi) <= objective(h):
        raise NoInteriorMinimum(f"average AoI is decreasing on [{lo:g}, {hi:g}]")
    return h


# ---------------------------------------------------------------- single-memory baselines


def paoi_nvm(params: ScenarioParams) -> float:
    return params.mean_idle + 2 * params.mean_failures * params.mean_offtime + 2 * params.mean_processing


def paoi_vm(params: ScenarioParams) -> float:
    wasted = (params.mean_processing + 1) / 2
    return (
        2 * params.mean_failures * (params.mean_offtime + wasted + params.mean_idle)
        + params.mean_idle
        + 2 * params.mean_processing
    )


def paoi_gap_mm_nvm(params: ScenarioParams, h: float) -> float:
    """PAoI penalty of mixed memory over an all-NVM device; never negative."""
    _check_h(h)
    d, f = params.checkpoint_cost, params.mean_failures
    return 2 * d * h + f * (2 * params.restore_cost + d + 1 + params.mean_processing / h)


# ---------------------------------------------------------------- split frequency


def expected_wasted_work_split(k_alpha: float, k_beta: float, d: float) -> float:
    if not (k_alpha >= 1 and k_beta >= 1):
        raise DomainError(f"intervals must be >= 1 tick, got {k_alpha!r}, {k_beta!r}")
    if not d > 0:
        raise DomainError(f"checkpoint cost must be > 0, got {d!r}")
    return (k_alpha**2 + k_beta**2) / (2 * (k_alpha + k_beta)) + (d + 1) / 2


def paoi_sfc(params: ScenarioParams, policy: SplitFrequency) -> float:
    validate(params, policy)
    c = derived_constants(params)
    d = params.checkpoint_cost
    # C1 already carries (D+1)/2; only the interval-dependent part of E[L] is added.
    interval_part = expected_wasted_work_split(policy.k_alpha, policy.k_beta, d) - (d + 1) / 2
    return (
        c.c2
        + 2 * d * (policy.h_alpha + policy.h_beta)
        + params.mean_processing
        + 2 * params.mean_failures * (c.c1 + interval_part)
    )


# ---------------------------------------------------------------- policy / architecture dispatch


def expected_wasted_work_policy(params: ScenarioParams, policy: CheckpointPolicy) -> float:
    if isinstance(policy, SplitFrequency):
        return expected_wasted_work_split(policy.k_alpha, policy.k_beta, params.checkpoint_cost)
    return expected_wasted_work(policy.interval(params.mean_processing), params.checkpoint_cost)


def inter_completion_for(params: ScenarioParams, policy: CheckpointPolicy | None, architecture) -> float:
    """E[Y] for any architecture; ``policy`` only matters for mixed memory."""
    architecture = Architecture(architecture)
    f = params.mean_failures
    if architecture is Architecture.NVM:
        return params.mean_idle + f * params.mean_offtime + params.mean_processing
    if architecture is Architecture.VM:
        wasted = (params.mean_processing + 1) / 2
        return params.mean_idle + f * (params.mean_offtime + wasted + params.mean_idle) + params.mean_processing
    if isinstance(policy, SingleFrequency):
        return expected_inter_completion(params, policy.checkpoints_per_cycle)
    validate(params, policy)
    c = derived_constants(params)
    el = expected_wasted_work_policy(params, policy)
    return (
        f * (el + params.mean_offtime + params.restore_cost)
        + c.c2
        + params.checkpoint_cost * policy.checkpoints_per_cycle
    )


def paoi_for(params: ScenarioParams, policy: CheckpointPolicy | None, architecture) -> float:
    architecture = Architecture(architecture)
    if architecture is Architecture.NVM:
        return paoi_nvm(params)
    if architecture is Architecture.VM:
        return paoi_vm(params)
    if isinstance(policy, SplitFrequency):
        return paoi_sfc(params, policy)
    return paoi_mixed(params, policy.checkpoints_per_cycle)


def avg_aoi_policy(params: ScenarioParams, policy: CheckpointPolicy) -> float:
    """Average AoI of the mixed-memory device from E[Y] and Var(Y)."""
    mean_y = inter_completion_for(params, policy, Architecture.MIXED)
    return avg_aoi_from_moments(mean_y, variance_inter_completion(params, policy), params.mean_idle)
