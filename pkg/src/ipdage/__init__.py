"""Age of Information of an intermittently-powered, checkpointing, mixed-memory sensor."""

from .model import (
    PRESETS,
    AoiStats,
    Architecture,
    CycleTrace,
    FailureCountDist,
    InvalidParameter,
    ScenarioParams,
    SingleFrequency,
    SplitFrequency,
    TimeDist,
    validate,
)

__all__ = [
    "PRESETS",
    "AoiStats",
    "Architecture",
    "CycleTrace",
    "FailureCountDist",
    "InvalidParameter",
    "ScenarioParams",
    "SingleFrequency",
    "SplitFrequency",
    "TimeDist",
    "validate",
]
