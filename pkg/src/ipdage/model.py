"""Domain types shared by the analytic engine and the simulator.

All durations are in clock ticks. The analytic layer works with real-valued
means; the simulator realizes integer ticks from them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Union


class InvalidParameter(ValueError):
    """One or more parameter invariants are violated.

    ``violations`` holds every ``(name, reason)`` pair found, not just the first.
    """

    def __init__(self, violations):
        if isinstance(violations, tuple) and len(violations) == 2 and isinstance(violations[0], str):
            violations = [violations]
        self.violations = list(violations)
        msg = "; ".join(f"{name}: {reason}" for name, reason in self.violations)
        super().__init__(msg)

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.violations]


class DomainError(ValueError):
    """An analytic expression was evaluated outside its domain."""


class NoInteriorMinimum(ValueError):
    pass


class Unsupported(NotImplementedError):
    pass


class EmptyTrace(ValueError):
    pass


class InsufficientCycles(ValueError):
    pass


class FailureCountDist(str, enum.Enum):
    POISSON = "poisson"
    FIXED = "fixed"  # round(mean_failures) every cycle


class TimeDist(str, enum.Enum):
    DETERMINISTIC = "deterministic"
    EXPONENTIAL = "exponential"


class Architecture(str, enum.Enum):
    MIXED = "mixed"
    NVM = "nvm"
    VM = "vm"

    @property
    def label(self) -> str:
        return {"mixed": "MM", "nvm": "NVM", "vm": "VM"}[self.value]


@dataclass(frozen=True)
class ScenarioParams:
    mean_processing: float  # E[P]
    mean_offtime: float  # E[R]
    mean_failures: float  # E[f], failures per cycle
    mean_idle: float  # E[I]
    checkpoint_cost: float  # D
    restore_cost: float  # V
    failure_count_dist: FailureCountDist = FailureCountDist.POISSON
    offtime_dist: TimeDist = TimeDist.DETERMINISTIC
    idle_dist: TimeDist = TimeDist.DETERMINISTIC

    def __post_init__(self):
        for name in NUMERIC_FIELDS:
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "failure_count_dist", FailureCountDist(self.failure_count_dist))
        object.__setattr__(self, "offtime_dist", TimeDist(self.offtime_dist))
        object.__setattr__(self, "idle_dist", TimeDist(self.idle_dist))

    def replace(self, **changes) -> "ScenarioParams":
        data = self.to_dict()
        data.update(changes)
        return ScenarioParams.from_dict(data)

    def to_dict(self) -> dict:
        data = asdict(self)
        for key in ("failure_count_dist", "offtime_dist", "idle_dist"):
            data[key] = getattr(self, key).value
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioParams":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise KeyError(f"unknown scenario keys: {', '.join(unknown)}")
        return cls(**data)


NUMERIC_FIELDS = (
    "mean_processing",
    "mean_offtime",
    "mean_failures",
    "mean_idle",
    "checkpoint_cost",
    "restore_cost",
)

# Table 1 scenarios (ms converted to ticks).
PRESETS = {
    "RF1": ScenarioParams(500, 50, 15, 200, 5, 10),
    "RF2": ScenarioParams(500, 75, 6, 200, 5, 10),
}


@dataclass(frozen=True)
class SingleFrequency:
    """Checkpoint every ``mean_processing / checkpoints_per_cycle`` processing ticks."""

    checkpoints_per_cycle: float

    def __post_init__(self):
        object.__setattr__(self, "checkpoints_per_cycle", float(self.checkpoints_per_cycle))

    @classmethod
    def from_interval(cls, interval: float, mean_processing: float) -> "SingleFrequency":
        return cls(mean_processing / interval)

    def interval(self, mean_processing: float) -> float:
        return mean_processing / self.checkpoints_per_cycle

    def to_dict(self) -> dict:
        return {"kind": "single", "checkpoints_per_cycle": self.checkpoints_per_cycle}


@dataclass(frozen=True)
class SplitFrequency:
    """Alternate between intervals ``k_alpha`` (``h_alpha`` times) and ``k_beta`` (``h_beta`` times)."""

    k_alpha: float
    k_beta: float
    h_alpha: float
    h_beta: float

    def __post_init__(self):
        for name in ("k_alpha", "k_beta", "h_alpha", "h_beta"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def equal_count(cls, k_alpha: float, k_beta: float, mean_processing: float) -> "SplitFrequency":
        h = mean_processing / (k_alpha + k_beta)
        return cls(k_alpha, k_beta, h, h)

    @property
    def checkpoints_per_cycle(self) -> float:
        return self.h_alpha + self.h_beta

    def to_dict(self) -> dict:
        return {
            "kind": "split",
            "k_alpha": self.k_alpha,
            "k_beta": self.k_beta,
            "h_alpha": self.h_alpha,
            "h_beta": self.h_beta,
        }


CheckpointPolicy = Union[SingleFrequency, SplitFrequency]


def policy_from_dict(data: dict, mean_processing: float | None = None) -> CheckpointPolicy:
    """Build a policy from its mapping form.

    Single-frequency policies accept ``checkpoints_per_cycle`` or ``interval``;
    split policies may omit ``h_alpha``/``h_beta`` for an equal-count allocation.
    Both shortcuts need ``mean_processing``.
    """
    data = dict(data)
    kind = data.pop("kind", "single")
    if kind == "single":
        allowed = {"checkpoints_per_cycle", "interval"}
        _reject_unknown(data, allowed, "policy")
        if ("checkpoints_per_cycle" in data) == ("interval" in data):
            raise KeyError("policy: give exactly one of checkpoints_per_cycle, interval")
        if "interval" in data:
            if mean_processing is None:
                raise KeyError("policy: interval needs mean_processing")
            return SingleFrequency.from_interval(float(data["interval"]), mean_processing)
        return SingleFrequency(data["checkpoints_per_cycle"])
    if kind == "split":
        _reject_unknown(data, {"k_alpha", "k_beta", "h_alpha", "h_beta"}, "policy")
        for key in ("k_alpha", "k_beta"):
            if key not in data:
                raise KeyError(f"policy: missing {key}")
        has_counts = [k in data for k in ("h_alpha", "h_beta")]
        if all(has_counts):
            return SplitFrequency(data["k_alpha"], data["k_beta"], data["h_alpha"], data["h_beta"])
        if any(has_counts):
            raise KeyError("policy: give both h_alpha and h_beta or neither")
        if mean_processing is None:
            raise KeyError("policy: equal-count split needs mean_processing")
        return SplitFrequency.equal_count(float(data["k_alpha"]), float(data["k_beta"]), mean_processing)
    raise KeyError(f"policy: unknown kind {kind!r}")


def _reject_unknown(data, allowed, section):
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise KeyError(f"{section}: unknown keys: {', '.join(unknown)}")


def validate(params: ScenarioParams, policy: CheckpointPolicy | None = None):
    """Check every invariant of ``params`` and ``policy``.

    Returns the pair unchanged, or raises InvalidParameter listing all violations.
    """
    problems = []

    def finite(name, value):
        if not math.isfinite(value):
            problems.append((name, "must be finite"))
            return False
        return True

    for name in NUMERIC_FIELDS:
        value = getattr(params, name)
        if not finite(name, value):
            continue
        if name in ("mean_processing", "checkpoint_cost"):
            if value <= 0:
                problems.append((name, f"must be > 0, got {value:g}"))
        elif value < 0:
            problems.append((name, f"must be >= 0, got {value:g}"))

    if isinstance(policy, SingleFrequency):
        h = policy.checkpoints_per_cycle
        if not finite("checkpoints_per_cycle", h):
            pass
        elif h <= 0:
            problems.append(("checkpoints_per_cycle", f"must be > 0, got {h:g}"))
        elif params.mean_processing > 0 and params.mean_processing / h < 1:
            problems.append(
                ("checkpoints_per_cycle", f"interval mean_processing/h = {params.mean_processing / h:g} is below one tick")
            )
    elif isinstance(policy, SplitFrequency):
        ok = True
        for name in ("k_alpha", "k_beta", "h_alpha", "h_beta"):
            value = getattr(policy, name)
            if not finite(name, value):
                ok = False
            elif value <= 0:
                problems.append((name, f"must be > 0, got {value:g}"))
                ok = False
        if ok:
            budget = policy.h_alpha * policy.k_alpha + policy.h_beta * policy.k_beta
            if abs(budget - params.mean_processing) > 1e-9 * max(abs(params.mean_processing), 1.0):
                problems.append(
                    ("processing_budget", f"h_alpha*k_alpha + h_beta*k_beta = {budget:g} != mean_processing {params.mean_processing:g}")
                )
    elif policy is not None:
        problems.append(("policy", f"unknown policy type {type(policy).__name__}"))

    if problems:
        raise InvalidParameter(problems)
    return params, policy


# ---------------------------------------------------------------- traces


@dataclass(frozen=True)
class Processing:
    interval_index: int
    ticks: int


@dataclass(frozen=True)
class Checkpoint:
    ticks: int


@dataclass(frozen=True)
class Failure:
    wasted_ticks: int  # L, or Gamma for volatile-only devices
    offtime_ticks: int  # R
    restore_ticks: int  # V (0 when there is nothing to restore)
    resense_idle_ticks: int = 0  # volatile-only devices idle again before re-sensing
    interval_ticks: int = 0  # length of the interval active at failure (0 when not checkpointing)


@dataclass(frozen=True)
class Transmit:
    pass


Segment = Union[Processing, Checkpoint, Failure, Transmit]


@dataclass(frozen=True)
class CycleTrace:
    idle_ticks: int
    segments: tuple
    inter_completion: int  # Y
    completion: int  # S = Y - I
    failures: int

    @property
    def processing_ticks(self) -> int:
        return sum(s.ticks for s in self.segments if isinstance(s, Processing))

    @property
    def checkpoints(self) -> int:
        return sum(1 for s in self.segments if isinstance(s, Checkpoint))


@dataclass(frozen=True)
class AoiStats:
    mean_y: float
    mean_y_sq: float
    mean_s: float
    mean_idle: float
    mean_peak_age: float | None  # None when fewer than two cycles
    time_avg_age: float
    arrival_rate: float
    n_cycles: int
    std_err_peak: float | None
    std_err_y: float = field(default=math.nan)
    var_y: float = field(default=math.nan)
