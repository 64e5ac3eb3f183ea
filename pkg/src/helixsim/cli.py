"""Command-line entry point: ``helix-sim run|suite|sweep|compare``."""
from __future__ import annotations

import argparse
import dataclasses
import enum
import sys
from pathlib import Path

import numpy as np

from . import output
from .config import RunConfig, config_help, load_config
from .errors import ConfigurationError, HelixSimError, InvalidInputError
from .excitation import StrategyKind
from .farm import THREADS_ENV, SimulationConfig, relative_report, run_case, run_strategy_suite, sweep_strouhal


class ExitStatus(enum.IntEnum):
    OK = 0
    CONFIG_ERROR = 2
    RUNTIME_ERROR = 3


def _settings(args) -> RunConfig | None:
    return load_config(args.config) if getattr(args, "config", None) else None


def _sim(cfg: RunConfig | None, seed):
    sim = SimulationConfig() if cfg is None else cfg.sim
    return sim if seed is None else dataclasses.replace(sim, seed=seed)


def _out_dir(args, cfg: RunConfig | None) -> Path:
    if args.out_dir:
        return Path(args.out_dir)
    return Path(cfg.out_dir if cfg else "helix_out")


def cmd_run(args) -> ExitStatus:
    cfg = load_config(args.config)
    sim = _sim(cfg, args.seed)
    result = run_case(cfg.layout, cfg.strategies, cfg.turbine, cfg.inflow, cfg.mixing, sim,
                      name=Path(args.config).stem)
    metrics = result.metrics
    out = _out_dir(args, cfg)
    output.atomic_write(out / "timeseries.csv", output.timeseries_csv(result))
    output.atomic_write(out / "planes.csv", output.planes_csv(result))
    output.atomic_write(out / "aggregates.txt", output.format_records(metrics, result.name))
    output.atomic_write(out / "summary.txt", output.case_summary(result, metrics))
    print(f"wrote {out}")
    return ExitStatus.OK


def cmd_suite(args) -> ExitStatus:
    cfg = _settings(args)
    sim = _sim(cfg, args.seed)
    kwargs = {} if cfg is None else dict(turbine=cfg.turbine, inflow=cfg.inflow, mixing=cfg.mixing,
                                         spacing_d=cfg.spacing_d)
    results = run_strategy_suite(two_turbine=not args.single_turbine, sim=sim, **kwargs)
    metrics = {r.name: r.metrics for r in results}
    report = relative_report(metrics, "baseline")
    out = _out_dir(args, cfg)
    records = "\n".join(output.format_records(m, name) for name, m in metrics.items())
    output.atomic_write(out / "aggregates.txt", records)
    summary = output.table1(report)
    if not args.single_turbine:
        summary += "\n" + output.table2(report)
    output.atomic_write(out / "summary.txt", summary)
    print(summary, end="")
    return ExitStatus.OK


def _strouhal_values(st_min: float, st_max: float, steps: int) -> list:
    if steps < 1:
        raise InvalidInputError("--st-steps must be at least 1", "st_steps")
    if st_max < st_min:
        raise InvalidInputError("--st-max must not be below --st-min", "st_max")
    if st_min == st_max:
        return [float(st_min)]
    return [float(s) for s in np.linspace(st_min, st_max, steps)]


def cmd_sweep(args) -> ExitStatus:
    cfg = _settings(args)
    sim = _sim(cfg, args.seed)
    try:
        kind = StrategyKind(args.kind)
    except ValueError:
        raise InvalidInputError(f"unknown strategy kind {args.kind!r}", "kind") from None
    kwargs = {} if cfg is None else dict(turbine=cfg.turbine, inflow=cfg.inflow, mixing=cfg.mixing)
    rows = sweep_strouhal(_strouhal_values(args.st_min, args.st_max, args.st_steps), kind, args.amplitude,
                          sim=sim, **kwargs)
    out = _out_dir(args, cfg)
    output.atomic_write(out / "sweep.csv", output.sweep_csv(rows))
    table = output.sweep_table(rows)
    output.atomic_write(out / "summary.txt", table)
    print(table, end="")
    return ExitStatus.OK


def _read_aggregates(path: Path) -> dict:
    if path.is_dir():
        path = path / "aggregates.txt"
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigurationError(f"aggregate file not found: {path}", [str(path)]) from None
    try:
        cases = output.parse_records(text)
    except ValueError as err:
        raise ConfigurationError(f"{path}: {err}", [str(path)]) from None
    return cases


def cmd_compare(args) -> ExitStatus:
    metrics = {}
    for p in args.aggregates:
        for name, values in _read_aggregates(Path(p)).items():
            if name in metrics:
                raise ConfigurationError(f"case {name!r} appears more than once", [name])
            metrics[name] = values
    baseline = args.baseline or next(iter(metrics))
    report = relative_report(metrics, baseline)
    text = output.relative_table(report)
    if args.output:
        output.atomic_write(args.output, text)
    print(text, end="")
    return ExitStatus.OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="helix-sim",
        description="Wake-mixing wind farm surrogate: static/dynamic induction and helix individual pitch control.",
        epilog=config_help() + f"\n\nenvironment:\n  {THREADS_ENV}  maximum number of cases run in parallel",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        p.add_argument("--config", required=config_required, help="sectioned key=value configuration file")
        p.add_argument("--seed", type=int, help="override the turbulence seed")
        p.add_argument("--out-dir", help="output directory (overrides [sim].out_dir)")

    p = sub.add_parser("run", help="simulate one configured case")
    p.add_argument("config", help="configuration file")
    p.add_argument("--seed", type=int, help="override the turbulence seed")
    p.add_argument("--out-dir", help="output directory (overrides [sim].out_dir)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("suite", help="run the nine-case strategy comparison")
    common(p)
    p.add_argument("--single-turbine", action="store_true", help="omit the downstream turbine")
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("sweep", help="normalized wake velocity against Strouhal number")
    common(p)
    p.add_argument("--st-min", type=float, default=0.1)
    p.add_argument("--st-max", type=float, default=0.6)
    p.add_argument("--st-steps", type=int, default=11)
    p.add_argument("--amplitude", type=float, default=4.0, help="pitch amplitude [deg]")
    p.add_argument("--kind", default=StrategyKind.DYNAMIC_INDUCTION.value,
                   choices=[k.value for k in StrategyKind if k.is_dynamic])
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="relative change of aggregate records against a baseline case")
    p.add_argument("aggregates", nargs="+", help="aggregates.txt files or run directories")
    p.add_argument("--baseline", help="baseline case name (default: first case read)")
    p.add_argument("--output", help="also write the table to this file")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args))
    except ConfigurationError as err:
        print(f"helix-sim: configuration error: {err}", file=sys.stderr)
        return int(ExitStatus.CONFIG_ERROR)
    except InvalidInputError as err:
        field = f" ({err.field})" if err.field else ""
        print(f"helix-sim: invalid input{field}: {err}", file=sys.stderr)
        return int(ExitStatus.CONFIG_ERROR)
    except (HelixSimError, OSError, ArithmeticError, RuntimeError) as err:
        print(f"helix-sim: runtime error: {err}", file=sys.stderr)
        return int(ExitStatus.RUNTIME_ERROR)


if __name__ == "__main__":
    sys.exit(main())
