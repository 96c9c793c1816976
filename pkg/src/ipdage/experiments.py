"""Parameter sweeps comparing checkpoint policies and memory architectures.

Columns follow ``<metric>_<series>[_stderr]``: ``paoi`` for the closed form,
``simpaoi`` for the simulated mean peak age.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .model import (
    PRESETS,
    Architecture,
    CheckpointPolicy,
    InvalidParameter,
    ScenarioParams,
    SingleFrequency,
    SplitFrequency,
    validate,
)
from .simulator import RunConfig, empirical_stats, run


class SweptVariable(str, enum.Enum):
    CHECKPOINTS = "h"
    FAILURES = "f"


class Experiment(str, enum.Enum):
    PAOI_VS_H = "paoi_vs_h"
    ARCHITECTURES = "architectures"
    POLICIES = "policies"

    @property
    def variable(self) -> SweptVariable:
        if self is Experiment.PAOI_VS_H:
            return SweptVariable.CHECKPOINTS
        return SweptVariable.FAILURES


@dataclass(frozen=True)
class SweepSpec:
    base: ScenarioParams
    swept_variable: SweptVariable
    grid: tuple
    policies: tuple = ()  # (label, CheckpointPolicy) pairs
    architectures: tuple = ()
    with_simulation: bool = False
    sim_cycles: int = 10_000
    seed: int = 0
    base_label: str = "base"
    extra_scenarios: tuple = ()  # (label, ScenarioParams) pairs, h sweeps only

    def __post_init__(self):
        object.__setattr__(self, "swept_variable", SweptVariable(self.swept_variable))
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        object.__setattr__(self, "architectures", tuple(Architecture(a) for a in self.architectures))

    def scenarios(self):
        return ((self.base_label, self.base),) + tuple(self.extra_scenarios)

    def check(self) -> None:
        problems = []
        if not self.grid:
            problems.append(("grid", "must not be empty"))
        elif any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            problems.append(("grid", "must be strictly increasing"))
        elif not all(math.isfinite(g) for g in self.grid):
            problems.append(("grid", "must be finite"))
        elif self.swept_variable is SweptVariable.CHECKPOINTS and self.grid[0] <= 0:
            problems.append(("grid", "checkpoint counts must be > 0"))
        elif self.swept_variable is SweptVariable.FAILURES and self.grid[0] < 0:
            problems.append(("grid", "failure means must be >= 0"))
        if self.sim_cycles < 1:
            problems.append(("sim_cycles", "must be >= 1"))
        labels = [label for label, _ in self.policies]
        if len(set(labels)) != len(labels):
            problems.append(("policies", "labels must be unique"))
        if problems:
            raise InvalidParameter(problems)
        for _, params in self.scenarios():
            validate(params)
        for _, policy in self.policies:
            validate(self.base, policy)


@dataclass
class SweepResult:
    variable: str
    columns: list
    rows: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([row[j] for row in self.rows], dtype=float)

    @property
    def grid(self) -> np.ndarray:
        return self.column(self.variable)

    def argmin(self, name: str) -> float:
        return float(self.grid[int(np.argmin(self.column(name)))])

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        lines += [",".join(fmt(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, variable: str | None = None) -> "SweepResult":
        header, *body = text.strip("\n").split("\n")
        columns = header.split(",")
        rows = [[float(v) for v in line.split(",")] for line in body]
        return cls(variable or columns[0], columns, rows)


def fmt(x: float) -> str:
    """Locale-independent numeric formatting with 12 significant digits."""
    return format(float(x), ".12g")


def _cell_seed(seed: int, row: int, col: int) -> int:
    ss = np.random.SeedSequence([seed, row, col])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _simulate_cell(args):
    config = args
    stats = empirical_stats(run(config))
    return stats.mean_peak_age, stats.std_err_peak


def _simulate_cells(configs, jobs):
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_simulate_cell, configs))
    return [_simulate_cell(c) for c in configs]


def _assemble(spec: SweepSpec, series, jobs: int) -> SweepResult:
    """``series`` is a list of (label, fn) where fn(x) -> (params, policy, architecture)."""
    columns = [spec.swept_variable.value] + [f"paoi_{label}" for label, _ in series]
    if spec.with_simulation:
        for label, _ in series:
            columns += [f"simpaoi_{label}", f"simpaoi_{label}_stderr"]

    rows, configs = [], []
    for i, x in enumerate(spec.grid):
        row = [x]
        for j, (label, build) in enumerate(series):
            params, policy, arch = build(x)
            row.append(analytic.paoi_for(params, policy, arch))
            if spec.with_simulation:
                configs.append(RunConfig(spec.sim_cycles, _cell_seed(spec.seed, i, j), params, policy, arch))
        rows.append(row)

    if spec.with_simulation:
        sims = iter(_simulate_cells(configs, jobs))
        for row in rows:
            for _ in series:
                mean, se = next(sims)
                row += [math.nan if mean is None else mean, math.nan if se is None else se]
    return SweepResult(spec.swept_variable.value, columns, rows)


def _require(spec: SweepSpec, variable: SweptVariable):
    if spec.swept_variable is not variable:
        raise InvalidParameter([("swept_variable", f"this experiment sweeps {variable.value!r}")])
    spec.check()


def sweep_paoi_vs_h(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Mixed-memory PAoI of each scenario as the checkpoint count varies."""
    _require(spec, SweptVariable.CHECKPOINTS)
    series = []
    for label, params in spec.scenarios():
        series.append((label, lambda h, p=params: (p, SingleFrequency(h), Architecture.MIXED)))
    return _assemble(spec, series, jobs)


def compare_architectures(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """PAoI of mixed, all-NVM and all-VM devices as the failure mean varies."""
    _require(spec, SweptVariable.FAILURES)
    policy = spec.policies[0][1] if spec.policies else SingleFrequency(10)
    archs = spec.architectures or (Architecture.MIXED, Architecture.NVM, Architecture.VM)
    series = []
    for arch in archs:
        series.append((arch.label,
                       lambda f, a=arch: (spec.base.replace(mean_failures=f),
                                          policy if a is Architecture.MIXED else None, a)))
    return _assemble(spec, series, jobs)


def optimal_reference(params: ScenarioParams) -> float:
    """Smallest mixed-memory PAoI over h in [1, E[P]]."""
    if params.mean_failures > 0:
        h = analytic.optimal_h_paoi(params)
    else:
        h = 1.0
    h = min(max(h, 1.0), params.mean_processing)
    return analytic.paoi_mixed(params, h)


def compare_policies(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """PAoI of each checkpoint policy as the failure mean varies, plus the optimal-h reference."""
    _require(spec, SweptVariable.FAILURES)
    series = [(label, lambda f, p=policy: (spec.base.replace(mean_failures=f), p, Architecture.MIXED))
              for label, policy in spec.policies]
    result = _assemble(spec, series, jobs)
    result.columns.append("paoi_opt")
    for row, f in zip(result.rows, spec.grid):
        row.append(optimal_reference(spec.base.replace(mean_failures=f)))
    return result


EXPERIMENTS = {
    Experiment.PAOI_VS_H: sweep_paoi_vs_h,
    Experiment.ARCHITECTURES: compare_architectures,
    Experiment.POLICIES: compare_policies,
}


# ---------------------------------------------------------------- default figure specs


def fig3a_spec(**overrides) -> SweepSpec:
    grid = tuple(np.arange(100, 10001) / 100)  # h = 1.00 .. 100.00
    kw = dict(base=PRESETS["RF1"], swept_variable=SweptVariable.CHECKPOINTS, grid=grid,
              base_label="RF1", extra_scenarios=(("RF2", PRESETS["RF2"]),))
    kw.update(overrides)
    return SweepSpec(**kw)


def fig3b_spec(**overrides) -> SweepSpec:
    kw = dict(base=PRESETS["RF1"], swept_variable=SweptVariable.FAILURES,
              grid=tuple(float(f) for f in range(0, 61)),
              policies=(("MM", SingleFrequency(10)),),
              architectures=(Architecture.MIXED, Architecture.NVM, Architecture.VM))
    kw.update(overrides)
    return SweepSpec(**kw)


def fig3c_spec(**overrides) -> SweepSpec:
    p = PRESETS["RF1"].mean_processing
    kw = dict(base=PRESETS["RF1"], swept_variable=SweptVariable.FAILURES,
              grid=tuple(float(f) for f in range(0, 101)),
              policies=(("K5", SingleFrequency.from_interval(5, p)),
                        ("K20", SingleFrequency.from_interval(20, p)),
                        ("SFC5x20", SplitFrequency.equal_count(5, 20, p))))
    kw.update(overrides)
    return SweepSpec(**kw)


FIGURES = {
    "fig3a": (Experiment.PAOI_VS_H, fig3a_spec),
    "fig3b": (Experiment.ARCHITECTURES, fig3b_spec),
    "fig3c": (Experiment.POLICIES, fig3c_spec),
}
