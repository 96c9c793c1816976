"""Monte Carlo generation of device cycles and empirical AoI statistics.

Cycles are drawn in fixed-size blocks, each with its own child of
``SeedSequence(seed)``, so a run is bit-identical however many workers
generate it.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import (
    AoiStats,
    Architecture,
    Checkpoint,
    CheckpointPolicy,
    CycleTrace,
    EmptyTrace,
    Failure,
    FailureCountDist,
    InsufficientCycles,
    Processing,
    ScenarioParams,
    SingleFrequency,
    SplitFrequency,
    TimeDist,
    Transmit,
    validate,
)

BLOCK_CYCLES = 1 << 14


def ticks(x: float) -> int:
    """Round half up to an integer tick count."""
    return int(math.floor(x + 0.5))


def interval_layout(params: ScenarioParams, policy: CheckpointPolicy) -> np.ndarray:
    """Integer processing intervals executed each cycle, in order.

    The realized processing time is the sum of the layout, so it is always an
    exact multiple of the interval(s).
    """
    if isinstance(policy, SingleFrequency):
        h = max(1, ticks(policy.checkpoints_per_cycle))
        k = max(1, ticks(params.mean_processing / h))
        return np.full(h, k, dtype=np.int64)
    if isinstance(policy, SplitFrequency):
        ka, kb = max(1, ticks(policy.k_alpha)), max(1, ticks(policy.k_beta))
        na, nb = ticks(policy.h_alpha), ticks(policy.h_beta)
        out = []
        while na or nb:
            if na:
                out.append(ka)
                na -= 1
            if nb:
                out.append(kb)
                nb -= 1
        if not out:
            out = [ka]
        return np.asarray(out, dtype=np.int64)
    raise TypeError(f"unknown policy {policy!r}")


@dataclass(frozen=True)
class RunConfig:
    n_cycles: int
    seed: int
    params: ScenarioParams
    policy: CheckpointPolicy | None = None
    architecture: Architecture = Architecture.MIXED

    def __post_init__(self):
        object.__setattr__(self, "architecture", Architecture(self.architecture))
        if self.n_cycles < 1:
            raise ValueError(f"n_cycles must be >= 1, got {self.n_cycles}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.architecture is Architecture.MIXED and self.policy is None:
            raise ValueError("mixed-memory runs need a checkpoint policy")


class RunTrace:
    """Columnar record of a run: per-cycle arrays plus per-failure arrays.

    ``cycles`` materializes CycleTrace objects on access.
    """

    def __init__(self, architecture, layout, checkpoint_ticks, restore_ticks, processing_ticks,
                 idle, failures, y, position, wasted, offtime, resense):
        self.architecture = Architecture(architecture)
        self.layout = layout
        self.checkpoint_ticks = int(checkpoint_ticks)
        self.restore_ticks = int(restore_ticks)
        self.processing_ticks = int(processing_ticks)
        self.idle = idle
        self.failures = failures
        self.y = y
        self.position = position  # processing tick at which each failure struck
        self.wasted = wasted
        self.offtime = offtime
        self.resense = resense
        self.offsets = np.concatenate(([0], np.cumsum(failures)))

    @property
    def s(self) -> np.ndarray:
        return self.y - self.idle

    @property
    def n_cycles(self) -> int:
        return len(self.y)

    @property
    def total_ticks(self) -> int:
        return int(self.y.sum())

    @property
    def cycles(self) -> "_CycleView":
        return _CycleView(self)

    def interval_index(self) -> np.ndarray:
        """Index of the checkpoint interval active at each failure (mixed memory only)."""
        ends = np.cumsum(self.layout)
        return np.searchsorted(ends, self.position, side="right")

    def cycle(self, i: int) -> CycleTrace:
        lo, hi = self.offsets[i], self.offsets[i + 1]
        pos = self.position[lo:hi]
        wasted = self.wasted[lo:hi]
        off = self.offtime[lo:hi]
        res = self.resense[lo:hi]
        segments = []
        if self.architecture is Architecture.MIXED:
            idx = np.searchsorted(np.cumsum(self.layout), pos, side="right")
            order = np.argsort(idx, kind="stable")
            j = 0
            for n, k in enumerate(self.layout):
                while j < len(order) and idx[order[j]] == n:
                    m = order[j]
                    segments.append(Failure(int(wasted[m]), int(off[m]), self.restore_ticks, 0, int(k)))
                    j += 1
                segments.append(Processing(n, int(k)))
                segments.append(Checkpoint(self.checkpoint_ticks))
        elif self.architecture is Architecture.NVM:
            done = 0
            for m in np.argsort(pos, kind="stable"):
                if pos[m] > done:
                    segments.append(Processing(0, int(pos[m] - done)))
                    done = int(pos[m])
                segments.append(Failure(0, int(off[m]), 0))
            segments.append(Processing(0, self.processing_ticks - done))
        else:
            for m in range(len(pos)):
                segments.append(Failure(int(wasted[m]), int(off[m]), 0, int(res[m])))
            segments.append(Processing(0, self.processing_ticks))
        segments.append(Transmit())
        y = int(self.y[i])
        idle = int(self.idle[i])
        return CycleTrace(idle_ticks=idle, segments=tuple(segments), inter_completion=y,
                          completion=y - idle, failures=int(hi - lo))

    @classmethod
    def concatenate(cls, parts: list["RunTrace"]) -> "RunTrace":
        first = parts[0]
        cat = lambda name: np.concatenate([getattr(p, name) for p in parts])
        return cls(first.architecture, first.layout, first.checkpoint_ticks, first.restore_ticks,
                   first.processing_ticks, cat("idle"), cat("failures"), cat("y"), cat("position"),
                   cat("wasted"), cat("offtime"), cat("resense"))

    def write_csv(self, path_or_file) -> None:
        """Per-cycle export with header ``cycle,idle,failures,Y,S,peak``; the first peak is nan."""
        s = self.s
        lines = ["cycle,idle,failures,Y,S,peak"]
        for i in range(self.n_cycles):
            peak = "nan" if i == 0 else str(int(s[i - 1] + self.y[i]))
            lines.append(f"{i + 1},{self.idle[i]},{self.failures[i]},{self.y[i]},{s[i]},{peak}")
        text = "\n".join(lines) + "\n"
        if hasattr(path_or_file, "write"):
            path_or_file.write(text)
        else:
            with open(path_or_file, "w", newline="\n") as fh:
                fh.write(text)


class _CycleView(Sequence):
    def __init__(self, trace):
        self._trace = trace

    def __len__(self):
        return self._trace.n_cycles

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self._trace.cycle(j) for j in range(*i.indices(len(self)))]
        n = len(self)
        if i < 0:
            i += n
        if not 0 <= i < n:
            raise IndexError(i)
        return self._trace.cycle(i)


def _durations(rng, dist: TimeDist, mean: float, size: int) -> np.ndarray:
    if dist is TimeDist.DETERMINISTIC:
        return np.full(size, ticks(mean), dtype=np.int64)
    # Geometric on {0, 1, ...} with the requested mean: the integer-tick analogue of an exponential.
    return rng.geometric(1.0 / (1.0 + mean), size=size).astype(np.int64) - 1


def _draw_block(params: ScenarioParams, policy, architecture: Architecture, rng, n: int) -> RunTrace:
    if architecture is Architecture.MIXED:
        layout = interval_layout(params, policy)
        processing = int(layout.sum())
        d = max(1, ticks(params.checkpoint_cost))
        v = ticks(params.restore_cost)
    else:
        layout = np.zeros(0, dtype=np.int64)
        processing = max(1, ticks(params.mean_processing))
        d = v = 0

    idle = _durations(rng, params.idle_dist, params.mean_idle, n)
    if params.failure_count_dist is FailureCountDist.POISSON:
        failures = rng.poisson(params.mean_failures, size=n).astype(np.int64)
    else:
        failures = np.full(n, ticks(params.mean_failures), dtype=np.int64)
    total = int(failures.sum())
    owner = np.repeat(np.arange(n), failures)

    # Failures strike uniformly over processing time; for mixed memory this
    # picks the interval with probability proportional to its length.
    position = rng.integers(0, processing, size=total, dtype=np.int64)

    if architecture is Architecture.MIXED:
        active = layout[np.searchsorted(np.cumsum(layout), position, side="right")]
        wasted = rng.integers(1, active + d + 1, dtype=np.int64)
    elif architecture is Architecture.VM:
        wasted = position + 1  # uniform on {1 .. P}
    else:
        wasted = np.zeros(total, dtype=np.int64)
    offtime = _durations(rng, params.offtime_dist, params.mean_offtime, total)
    if architecture is Architecture.VM:
        resense = _durations(rng, params.idle_dist, params.mean_idle, total)
    else:
        resense = np.zeros(total, dtype=np.int64)

    per_failure = wasted + offtime + resense + v
    lost = np.bincount(owner, weights=per_failure, minlength=n).astype(np.int64)
    y = idle + lost + processing + d * len(layout)
    return RunTrace(architecture, layout, d, v, processing, idle, failures, y,
                    position, wasted, offtime, resense)


def simulate_cycle(params: ScenarioParams, policy: CheckpointPolicy | None,
                   architecture=Architecture.MIXED, rng=None) -> CycleTrace:
    """Draw one cycle. ``rng`` is a numpy Generator (a fresh unseeded one if omitted)."""
    architecture = Architecture(architecture)
    validate(params, policy if architecture is Architecture.MIXED else None)
    if rng is None:
        rng = np.random.default_rng()
    return _draw_block(params, policy, architecture, rng, 1).cycle(0)


def _run_block(args):
    config, child, n = args
    rng = np.random.Generator(np.random.PCG64(child))
    return _draw_block(config.params, config.policy, config.architecture, rng, n)


def run(config: RunConfig, jobs: int = 1) -> RunTrace:
    """Generate ``config.n_cycles`` independent cycles.

    Identical configs give bit-identical traces for any ``jobs``.
    """
    validate(config.params, config.policy if config.architecture is Architecture.MIXED else None)
    n_blocks = -(-config.n_cycles // BLOCK_CYCLES)
    children = np.random.SeedSequence(config.seed).spawn(n_blocks)
    tasks = []
    for b, child in enumerate(children):
        size = min(BLOCK_CYCLES, config.n_cycles - b * BLOCK_CYCLES)
        tasks.append((config, child, size))
    if jobs > 1 and n_blocks > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, n_blocks)) as pool:
            parts = list(pool.map(_run_block, tasks))
    else:
        parts = [_run_block(t) for t in tasks]
    return RunTrace.concatenate(parts)


# ---------------------------------------------------------------- statistics


def _mean_stderr_1dep(x: np.ndarray) -> float:
    # Consecutive peaks share a cycle (peak_i = S_{i-1} + Y_i), so they are
    # 1-dependent; the variance of their mean needs the lag-1 autocovariance.
    m = len(x)
    if m < 2:
        return math.nan
    c = x - x.mean()
    g0 = float(c @ c) / (m - 1)
    g1 = float(c[:-1] @ c[1:]) / (m - 1)
    var = g0 + 2 * g1 * (m - 1) / m
    if var < 0:
        var = g0
    return math.sqrt(var / m)


def empirical_stats(trace: RunTrace) -> AoiStats:
    n = trace.n_cycles
    if n == 0:
        raise EmptyTrace("trace has no cycles")
    y = trace.y.astype(np.float64)
    s = trace.s.astype(np.float64)
    mean_y = float(y.mean())
    mean_y_sq = float((y * y).mean())
    mean_s = float(s.mean())
    if n >= 2:
        peaks = s[:-1] + y[1:]
        mean_peak = float(peaks.mean())
        se_peak = _mean_stderr_1dep(peaks)
        var_y = float(y.var(ddof=1))
        se_y = math.sqrt(var_y / n)
    else:
        mean_peak = se_peak = None
        var_y = se_y = math.nan
    return AoiStats(
        mean_y=mean_y,
        mean_y_sq=mean_y_sq,
        mean_s=mean_s,
        mean_idle=float(trace.idle.mean()),
        mean_peak_age=mean_peak,
        time_avg_age=mean_y_sq / (2 * mean_y) + mean_s,
        arrival_rate=1.0 / mean_y,
        n_cycles=n,
        std_err_peak=se_peak,
        std_err_y=se_y,
        var_y=var_y,
    )


def integrate_sawtooth(trace: RunTrace) -> float:
    """Time-average of t - u(t) from the trapezoid areas of cycles 2..n."""
    if trace.n_cycles == 0:
        raise EmptyTrace("trace has no cycles")
    if trace.n_cycles < 2:
        raise InsufficientCycles("sawtooth integration needs at least two cycles")
    y = trace.y.astype(np.float64)
    s = trace.s.astype(np.float64)
    area = 0.5 * ((s[:-1] + y[1:]) ** 2 - s[1:] ** 2)
    return float(area.sum() / y[1:].sum())


def wasted_work_stats(trace: RunTrace) -> tuple[float, float]:
    """Mean and standard error of the ticks lost per failure."""
    w = trace.wasted.astype(np.float64)
    if len(w) < 2:
        raise InsufficientCycles("need at least two failures")
    return float(w.mean()), float(w.std(ddof=1) / math.sqrt(len(w)))
