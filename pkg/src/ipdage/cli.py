"""Command-line front end.

Exit codes: 0 success, 2 config parse error, 3 validation error, 4 runtime error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace

from . import analytic
from .config import ConfigError, load_config
from .experiments import EXPERIMENTS, FIGURES, fmt
from .model import Architecture, InvalidParameter, SplitFrequency, validate
from .plotdata import to_dat, to_svg
from .simulator import RunConfig, empirical_stats, integrate_sawtooth, interval_layout, run

EXIT_CONFIG, EXIT_INVALID, EXIT_RUNTIME = 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _report(pairs, as_csv: bool) -> str:
    if as_csv:
        return ",".join(k for k, _ in pairs) + "\n" + ",".join(_val(v) for _, v in pairs) + "\n"
    width = max(len(k) for k, _ in pairs)
    return "".join(f"{k:<{width}} = {_val(v)}\n" for k, v in pairs)


def _val(v) -> str:
    if isinstance(v, str):
        return v
    return fmt(v)


def analytic_report(params, policy):
    """(key, value) pairs for the closed-form summary of one scenario/policy."""
    validate(params, policy)
    mean_y = analytic.inter_completion_for(params, policy, Architecture.MIXED)
    var_y = analytic.variance_inter_completion(params, policy)
    if isinstance(policy, SplitFrequency):
        paoi = analytic.paoi_sfc(params, policy)
        aoi = analytic.avg_aoi_policy(params, policy)
    else:
        paoi = analytic.paoi_mixed(params, policy.checkpoints_per_cycle)
        aoi = analytic.avg_aoi_mixed(params, policy.checkpoints_per_cycle, var_y)
    try:
        h_paoi = analytic.optimal_h_paoi(params)
    except analytic.DomainError:
        h_paoi = math.nan
    try:
        h_aoi = analytic.optimal_h_aoi(params)
    except (analytic.NoInteriorMinimum, analytic.DomainError):
        h_aoi = math.nan
    return [
        ("checkpoints_per_cycle", policy.checkpoints_per_cycle),
        ("mean_y", mean_y),
        ("mean_s", mean_y - params.mean_idle),
        ("mean_wasted", analytic.expected_wasted_work_policy(params, policy)),
        ("paoi_mm", paoi),
        ("var_y", var_y),
        ("aoi_mm", aoi),
        ("optimal_h_paoi", h_paoi),
        ("optimal_h_aoi", h_aoi),
        ("paoi_nvm", analytic.paoi_nvm(params)),
        ("paoi_vm", analytic.paoi_vm(params)),
    ]


def cmd_analytic(args) -> str:
    cfg = load_config(args.config)
    if cfg.scenario is None or cfg.policy is None:
        raise ConfigError("analytic needs [scenario] and [policy] sections")
    return _report(analytic_report(cfg.scenario, cfg.policy), args.csv)


def simulate_report(config: RunConfig, jobs: int = 1, trace_path=None):
    trace = run(config, jobs=jobs)
    if trace_path:
        _write_atomic(trace_path, trace.write_csv)
    stats = empirical_stats(trace)
    params, policy, arch = config.params, config.policy, config.architecture
    pairs = [("architecture", arch.value), ("n_cycles", config.n_cycles), ("seed", str(config.seed))]
    if arch is Architecture.MIXED:
        layout = interval_layout(params, policy)
        pairs += [("realized_checkpoints", len(layout)), ("realized_processing", int(layout.sum()))]

    an_y = analytic.inter_completion_for(params, policy, arch)
    an_peak = analytic.paoi_for(params, policy, arch)
    pairs += [
        ("mean_y", stats.mean_y),
        ("mean_y_stderr", stats.std_err_y),
        ("mean_y_sq", stats.mean_y_sq),
        ("var_y", stats.var_y),
        ("mean_s", stats.mean_s),
        ("mean_idle", stats.mean_idle),
        ("arrival_rate", stats.arrival_rate),
        ("time_avg_age", stats.time_avg_age),
    ]
    if stats.mean_peak_age is None:
        pairs += [
            ("mean_peak_age", "absent (insufficient cycles: need >= 2)"),
            ("sawtooth_age", "absent (insufficient cycles: need >= 2)"),
        ]
    else:
        pairs += [
            ("mean_peak_age", stats.mean_peak_age),
            ("mean_peak_age_stderr", stats.std_err_peak),
            ("sawtooth_age", integrate_sawtooth(trace)),
        ]
    pairs += [("analytic_mean_y", an_y), ("analytic_paoi", an_peak)]
    if arch is Architecture.MIXED:
        pairs += [("analytic_aoi", analytic.avg_aoi_policy(params, policy))]
    if stats.mean_peak_age is not None:
        pairs += [
            ("z_mean_y", (stats.mean_y - an_y) / stats.std_err_y if stats.std_err_y > 0 else math.nan),
            ("z_peak", (stats.mean_peak_age - an_peak) / stats.std_err_peak if stats.std_err_peak > 0 else math.nan),
        ]
    return pairs


def cmd_simulate(args) -> str:
    cfg = load_config(args.config)
    if cfg.run is None:
        raise ConfigError("simulate needs a [run] section")
    config = cfg.run
    if args.seed is not None:
        config = RunConfig(config.n_cycles, args.seed, config.params, config.policy, config.architecture)
    return _report(simulate_report(config, args.jobs, args.trace), args.csv)


def _write_atomic(path, write):
    tmp = f"{path}.part"
    try:
        with open(tmp, "w", newline="\n") as fh:
            write(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def _emit_sweep(result, args, title) -> str:
    written = []
    try:
        for path, render in ((args.output, result.to_csv), (args.plot, lambda: to_dat(result)),
                             (args.svg, lambda: to_svg(result, title))):
            if path:
                _write_atomic(path, lambda fh, r=render: fh.write(r()))
                written.append(path)
    except BaseException:
        for path in written:
            os.remove(path)
        raise
    summary = "".join(f"# argmin {c} at {result.variable} = {fmt(result.argmin(c))}\n"
                      for c in result.columns[1:] if c.startswith("paoi_") and result.variable == "h")
    if args.output:
        return summary
    sys.stderr.write(summary)
    return result.to_csv()


def cmd_sweep(args) -> str:
    cfg = load_config(args.config)
    if cfg.sweep is None:
        raise ConfigError("sweep needs a [sweep] section")
    spec = cfg.sweep
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    result = EXPERIMENTS[cfg.experiment](spec, jobs=args.jobs)
    return _emit_sweep(result, args, cfg.experiment.value)


def cmd_figure(args) -> str:
    experiment, make_spec = FIGURES[args.command]
    overrides = {}
    if args.sim_cycles:
        overrides.update(with_simulation=True, sim_cycles=args.sim_cycles)
    if args.seed is not None:
        overrides["seed"] = args.seed
    spec = make_spec(**overrides)
    if args.grid:
        try:
            grid = tuple(float(g) for g in args.grid.split(","))
        except ValueError:
            raise ConfigError(f"--grid: expected comma-separated numbers, got {args.grid!r}") from None
        spec = replace(spec, grid=grid)
    result = EXPERIMENTS[experiment](spec, jobs=args.jobs)
    return _emit_sweep(result, args, args.command)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ipdage", description="Age of Information of a checkpointing intermittently-powered device.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analytic", help="closed-form expectations for one scenario/policy")
    p.add_argument("--config", required=True)
    p.add_argument("--csv", action="store_true", help="emit a single CSV row instead of text")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("simulate", help="Monte Carlo run compared against the closed forms")
    p.add_argument("--config", required=True)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--trace", metavar="PATH", help="write the per-cycle trace CSV")
    p.add_argument("--seed", type=_u64)
    p.add_argument("--jobs", type=_positive, default=1)
    p.set_defaults(func=cmd_simulate)

    def sweep_flags(p):
        p.add_argument("-o", "--output", metavar="PATH", help="CSV path (default: stdout)")
        p.add_argument("--plot", metavar="PATH", help="write plot-ready whitespace-delimited data")
        p.add_argument("--svg", metavar="PATH", help="also render a simple SVG line chart")
        p.add_argument("--seed", type=_u64)
        p.add_argument("--jobs", type=_positive, default=1)

    p = sub.add_parser("sweep", help="run the [sweep] experiment of a config file")
    p.add_argument("--config", required=True)
    sweep_flags(p)
    p.set_defaults(func=cmd_sweep)

    for name, (experiment, _) in FIGURES.items():
        p = sub.add_parser(name, help=f"default {experiment.value} sweep")
        sweep_flags(p)
        p.add_argument("--sim-cycles", type=_positive, help="add simulated columns with this many cycles per point")
        p.add_argument("--grid", help="comma-separated grid overriding the default")
        p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidParameter as exc:
        print(f"invalid parameter: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
