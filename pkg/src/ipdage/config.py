"""TOML scenario/experiment configuration.

Grammar (every section optional unless the command needs it)::

    [scenario]
    preset = "RF1"                 # or "RF2"; explicit fields below override it
    mean_processing = 500          # E[P]
    mean_offtime = 50              # E[R]
    mean_failures = 15             # E[f]
    mean_idle = 200                # E[I]
    checkpoint_cost = 5            # D
    restore_cost = 10              # V
    failure_count_dist = "poisson" # or "fixed"
    offtime_dist = "deterministic" # or "exponential"
    idle_dist = "deterministic"    # or "exponential"

    [policy]
    kind = "single"                # checkpoints_per_cycle = h, or interval = K
    checkpoints_per_cycle = 10
    # kind = "split": k_alpha, k_beta, and optionally h_alpha, h_beta
    # (omitted counts mean an equal-count allocation)

    [run]
    n_cycles = 100000
    seed = 1
    architecture = "mixed"         # or "nvm", "vm"

    [sweep]
    experiment = "policies"        # "paoi_vs_h" | "architectures" | "policies"
    variable = "f"                 # optional; must match the experiment ("h" or "f")
    grid = [0, 10, 20]
    label = "RF1"                  # label of the base scenario (default: preset or "base")
    architectures = ["mixed", "nvm", "vm"]
    with_simulation = false
    sim_cycles = 10000
    seed = 1

    [[sweep.policies]]
    label = "K5"
    kind = "single"
    interval = 5

    [sweep.scenarios.RF2]          # extra scenarios for paoi_vs_h sweeps
    preset = "RF2"
"""

from __future__ import annotations

import math
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .experiments import Experiment, SweepSpec
from .model import PRESETS, Architecture, CheckpointPolicy, ScenarioParams, policy_from_dict
from .simulator import RunConfig


class ConfigError(Exception):
    """The config file is unreadable, malformed, or has unknown/missing keys."""


SECTIONS = {"scenario", "policy", "run", "sweep"}
SCENARIO_KEYS = {"preset"} | set(ScenarioParams.__dataclass_fields__)
RUN_KEYS = {"n_cycles", "seed", "architecture"}
SWEEP_KEYS = {"experiment", "variable", "grid", "label", "architectures", "with_simulation",
              "sim_cycles", "seed", "policies", "scenarios"}


@dataclass
class Config:
    scenario: ScenarioParams | None = None
    scenario_label: str = "base"
    policy: CheckpointPolicy | None = None
    run: RunConfig | None = None
    experiment: Experiment | None = None
    sweep: SweepSpec | None = None


def _unknown(section: str, data: dict, allowed: set):
    extra = sorted(set(data) - allowed)
    if extra:
        raise ConfigError(f"[{section}] unknown key(s): {', '.join(extra)}")


def parse_scenario(data: dict, section: str = "scenario") -> tuple[ScenarioParams, str]:
    if not isinstance(data, dict):
        raise ConfigError(f"[{section}] must be a table")
    _unknown(section, data, SCENARIO_KEYS)
    data = dict(data)
    preset = data.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"[{section}] preset: expected one of {sorted(PRESETS)}, got {preset!r}")
        merged = PRESETS[preset].to_dict()
    else:
        merged = {}
    merged.update(data)
    missing = sorted(set(ScenarioParams.__dataclass_fields__) - set(merged)
                     - {"failure_count_dist", "offtime_dist", "idle_dist"})
    if missing:
        raise ConfigError(f"[{section}] missing key(s): {', '.join(missing)}")
    try:
        params = ScenarioParams.from_dict(merged)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {exc}") from None
    return params, preset or "base"


def parse_policy(data: dict, mean_processing: float, section: str = "policy") -> CheckpointPolicy:
    if not isinstance(data, dict):
        raise ConfigError(f"[{section}] must be a table")
    try:
        return policy_from_dict(data, mean_processing)
    except KeyError as exc:
        raise ConfigError(f"[{section}] {exc.args[0]}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {exc}") from None


def _int(section, key, value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"[{section}] {key}: expected an integer, got {value!r}")
    return value


def parse_config(text: str) -> Config:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax error: {exc}") from None
    _unknown("top level", doc, SECTIONS)
    cfg = Config()

    if "scenario" in doc:
        cfg.scenario, cfg.scenario_label = parse_scenario(doc["scenario"])
    if "policy" in doc:
        if cfg.scenario is None:
            raise ConfigError("[policy] needs a [scenario] section")
        cfg.policy = parse_policy(doc["policy"], cfg.scenario.mean_processing)

    if "run" in doc:
        data = doc["run"]
        _unknown("run", data, RUN_KEYS)
        if cfg.scenario is None:
            raise ConfigError("[run] needs a [scenario] section")
        try:
            arch = Architecture(data.get("architecture", "mixed"))
        except ValueError:
            raise ConfigError(f"[run] architecture: unknown value {data['architecture']!r}") from None
        n = _int("run", "n_cycles", data.get("n_cycles", 100_000))
        seed = _int("run", "seed", data.get("seed", 0))
        if arch is Architecture.MIXED and cfg.policy is None:
            raise ConfigError("[run] mixed-memory runs need a [policy] section")
        try:
            cfg.run = RunConfig(n, seed, cfg.scenario, cfg.policy, arch)
        except ValueError as exc:
            raise ConfigError(f"[run] {exc}") from None

    if "sweep" in doc:
        cfg.experiment, cfg.sweep = parse_sweep(doc["sweep"], cfg)
    return cfg


def parse_sweep(data: dict, cfg: Config) -> tuple[Experiment, SweepSpec]:
    _unknown("sweep", data, SWEEP_KEYS)
    if cfg.scenario is None:
        raise ConfigError("[sweep] needs a [scenario] section")
    if "experiment" not in data:
        raise ConfigError("[sweep] missing key: experiment")
    try:
        experiment = Experiment(data["experiment"])
    except ValueError:
        raise ConfigError(f"[sweep] experiment: unknown value {data['experiment']!r}") from None
    variable = data.get("variable", experiment.variable.value)
    if variable not in ("h", "f"):
        raise ConfigError(f"[sweep] variable: expected 'h' or 'f', got {variable!r}")

    grid = data.get("grid")
    if not isinstance(grid, list) or not all(isinstance(g, (int, float)) and not isinstance(g, bool) for g in grid):
        raise ConfigError("[sweep] grid: expected a list of numbers")

    policies = []
    for i, entry in enumerate(data.get("policies", [])):
        entry = dict(entry)
        label = entry.pop("label", None)
        if not isinstance(label, str) or not label:
            raise ConfigError(f"[[sweep.policies]] #{i + 1}: missing label")
        policies.append((label, parse_policy(entry, cfg.scenario.mean_processing, "sweep.policies")))
    if not policies and cfg.policy is not None:
        policies.append(("MM" if experiment is Experiment.ARCHITECTURES else "policy", cfg.policy))

    try:
        archs = tuple(Architecture(a) for a in data.get("architectures", ()))
    except ValueError as exc:
        raise ConfigError(f"[sweep] architectures: {exc}") from None

    extra = []
    for label, table in data.get("scenarios", {}).items():
        params, _ = parse_scenario(table, f"sweep.scenarios.{label}")
        extra.append((label, params))

    with_sim = data.get("with_simulation", False)
    if not isinstance(with_sim, bool):
        raise ConfigError("[sweep] with_simulation: expected true or false")
    spec = SweepSpec(
        base=cfg.scenario,
        swept_variable=variable,
        grid=tuple(grid),
        policies=tuple(policies),
        architectures=archs,
        with_simulation=with_sim,
        sim_cycles=_int("sweep", "sim_cycles", data.get("sim_cycles", 10_000)),
        seed=_int("sweep", "seed", data.get("seed", 0)),
        base_label=str(data.get("label", cfg.scenario_label)),
        extra_scenarios=tuple(extra),
    )
    return experiment, spec


def load_config(path) -> Config:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise ConfigError(f"{path} is not UTF-8 text") from None
    return parse_config(text)


# ---------------------------------------------------------------- writing


def _toml_value(value) -> str:
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def dumps(params: ScenarioParams | None = None, policy: CheckpointPolicy | None = None) -> str:
    """Serialize a scenario and/or policy; ``parse_config(dumps(p, q))`` gives them back exactly."""
    out = []
    if params is not None:
        out.append("[scenario]")
        out += [f"{k} = {_toml_value(v)}" for k, v in params.to_dict().items()]
    if policy is not None:
        if out:
            out.append("")
        out.append("[policy]")
        out += [f"{k} = {_toml_value(v)}" for k, v in policy.to_dict().items()]
    return "\n".join(out) + "\n"
