"""Command-line front end.

Exit codes:
    0  success
    1  output could not be written
    2  invalid command line or scenario (including unknown presets)
    3  numerical blow-up in at least one run (partial outputs are kept)
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import PRESETS, ConfigError, ScenarioConfig, apply_override, dump_config, load_config, preset
from .limiter import Strategy, qss_current_tva, qss_current_vav
from .plant import Event
from .runner import SimResult, run_simulation, write_csv, write_metrics

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_BLOWUP = 3

log = logging.getLogger("gfm_htva")

METRIC_COLUMNS = ("peak_i", "time_above_imax", "settle_time", "final_p", "final_q")


class UsageError(Exception):
    pass


def _scenario_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", help=f"built-in scenario ({', '.join(PRESETS)})")
    src.add_argument("--config", type=Path, help="scenario file in INI format")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override one config value; repeatable, last write wins",
    )
    p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    p.add_argument("--csv", action="store_true", help="machine-readable CSV on standard output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gfm-htva", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="simulate one scenario with one strategy")
    _scenario_args(p)
    p.add_argument("--strategy", help="tva, vav or htva (default: the scenario's own)")

    p = sub.add_parser("compare", help="run the same scenario with several strategies")
    _scenario_args(p)
    p.add_argument("--strategy", default="tva,vav,htva", help="comma-separated list, at least two")
    p.add_argument("--jobs", type=int, default=1, help="parallel runs (default 1)")

    p = sub.add_parser("sweep", help="run a scenario across values of one numeric key")
    _scenario_args(p)
    p.add_argument("--strategy", help="tva, vav or htva (default: the scenario's own)")
    p.add_argument("--key", required=True, help="section.key, or events.eventN.value / events.eventN.time")
    p.add_argument("--values", help="comma-separated values")
    p.add_argument("--range", nargs=2, type=float, metavar=("START", "STOP"), help="inclusive linear range")
    p.add_argument("--num", type=int, default=5, help="points in --range (default 5)")
    p.add_argument("--jobs", type=int, default=1, help="parallel runs (default 1)")
    p.add_argument("--save", action="store_true", help="also write one CSV and metrics file per value")

    p = sub.add_parser("oracle", help="quasi-steady current magnitudes for given |v_gfm - v_o|")
    p.add_argument("--dv", action="append", required=True, help="drive magnitude(s) in pu; repeatable or comma-separated")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE")
    p.add_argument("--csv", action="store_true", help="machine-readable CSV on standard output")

    p = sub.add_parser("presets", help="list built-in scenarios or print one as config text")
    p.add_argument("name", nargs="?", help="preset to print")
    return parser


def load_scenario(args) -> ScenarioConfig:
    if getattr(args, "config", None) is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc.strerror or exc}") from None
        cfg = load_config(text, name=args.config.stem)
    else:
        cfg = preset(getattr(args, "preset", None) or "testcase1")
    for item in args.overrides:
        cfg = apply_override(cfg, item)
    return cfg


def _strategies(text: str) -> list[Strategy]:
    try:
        return [Strategy.parse(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(str(exc), "strategy") from None


def _run_one(cfg: ScenarioConfig) -> SimResult:
    return run_simulation(cfg)


def run_many(configs: list[ScenarioConfig], jobs: int = 1) -> list[SimResult]:
    """Run independent scenarios; results keep the order of ``configs``."""
    if jobs <= 1 or len(configs) <= 1:
        return [run_simulation(c) for c in configs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, configs))


def _save(result: SimResult, out: Path, stem: str) -> tuple[Path, Path]:
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{stem}.csv"
    json_path = out / f"{stem}_metrics.json"
    write_csv(result, csv_path)
    if result.metrics is not None:
        write_metrics(result.metrics, json_path)
    return csv_path, json_path


def _fmt(value) -> str:
    if value is None:
        return "not settled"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _table(header: list[str], rows: list[list], machine: bool) -> str:
    if machine:
        lines = [",".join(header)]
        lines += [",".join("" if v is None else (repr(v) if isinstance(v, float) else str(v)) for v in r) for r in rows]
        return "\n".join(lines)
    cells = [header] + [[_fmt(v) for v in r] for r in rows]
    widths = [max(len(c[j]) for c in cells) for j in range(len(header))]
    return "\n".join("  ".join(c[j].rjust(widths[j]) for j in range(len(header))) for c in cells)


def _metric_row(result: SimResult) -> list:
    m = result.metrics
    if m is None:
        return [None] * len(METRIC_COLUMNS)
    return [getattr(m, k) for k in METRIC_COLUMNS]


def _report_errors(results: list[SimResult], labels: list[str]) -> int:
    code = EXIT_OK
    for label, r in zip(labels, results):
        if r.error:
            print(f"{label}: {r.error}", file=sys.stderr)
            code = EXIT_BLOWUP
    return code


def cmd_run(args) -> int:
    cfg = load_scenario(args)
    if args.strategy:
        cfg = cfg.with_strategy(_strategies(args.strategy)[0])
    result = run_simulation(cfg)
    stem = f"{cfg.name}_{cfg.strategy.value}"
    csv_path, _ = _save(result, args.out, stem)
    print(_table(["strategy", *METRIC_COLUMNS], [[cfg.strategy.value, *_metric_row(result)]], args.csv))
    if not args.csv:
        print(f"wrote {csv_path}")
    return _report_errors([result], [stem])


def cmd_compare(args) -> int:
    cfg = load_scenario(args)
    strategies = _strategies(args.strategy)
    if len(strategies) < 2:
        raise UsageError("compare needs at least two strategies")
    configs = [cfg.with_strategy(s) for s in strategies]
    results = run_many(configs, args.jobs)
    labels = [f"{cfg.name}_{s.value}" for s in strategies]
    for label, r in zip(labels, results):
        _save(r, args.out, label)
    rows = [[s.value, *_metric_row(r)] for s, r in zip(strategies, results)]
    print(_table(["strategy", *METRIC_COLUMNS], rows, args.csv))
    return _report_errors(results, labels)


def sweep_values(args) -> list[float]:
    if args.values is not None:
        try:
            vals = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"--values must be numbers, got {args.values!r}") from None
    elif args.range is not None:
        if args.num < 1:
            raise UsageError("--num must be at least 1")
        vals = [float(v) for v in np.linspace(args.range[0], args.range[1], args.num)]
    else:
        raise UsageError("sweep needs --values or --range")
    if not vals:
        raise UsageError("empty sweep range")
    return vals


def with_value(cfg: ScenarioConfig, key: str, value: float) -> ScenarioConfig:
    """``cfg`` with the numeric ``key`` set to ``value``."""
    parts = key.split(".")
    if len(parts) == 3 and parts[0] == "events":
        idx = parts[1]
        if not (idx.startswith("event") and idx[5:].isdigit()):
            raise ConfigError("expected events.eventN.value or events.eventN.time", key)
        n = int(idx[5:]) - 1
        if not 0 <= n < len(cfg.events) or parts[2] not in ("time", "value"):
            raise ConfigError("no such event field", key)
        events = list(cfg.events)
        events[n] = replace(events[n], **{parts[2]: value})
        return replace(cfg, events=tuple(events))
    if key == "limiter.strategy" or key == "limiter.dv_source":
        raise ConfigError("not a numeric key", key)
    return apply_override(cfg, f"{key}={value!r}")


def cmd_sweep(args) -> int:
    cfg = load_scenario(args)
    if args.strategy:
        cfg = cfg.with_strategy(_strategies(args.strategy)[0])
    values = sweep_values(args)
    configs = [with_value(cfg, args.key, v) for v in values]
    results = run_many(configs, args.jobs)
    labels = [f"{cfg.name}_{cfg.strategy.value}_{n:03d}" for n in range(len(values))]
    if args.save:
        for label, r in zip(labels, results):
            _save(r, args.out, label)
    rows = [[v, *_metric_row(r)] for v, r in zip(values, results)]
    print(_table([args.key, *METRIC_COLUMNS], rows, args.csv))
    return _report_errors(results, labels)


def cmd_oracle(args) -> int:
    cfg = ScenarioConfig()
    for item in args.overrides:
        cfg = apply_override(cfg, item)
    try:
        dvs = [float(v) for item in args.dv for v in item.split(",") if v.strip()]
    except ValueError:
        raise UsageError("--dv must be numbers") from None
    if not dvs:
        raise UsageError("no --dv values given")
    bad = [v for v in dvs if not v >= 0]
    if bad:
        raise UsageError(f"dv must be non-negative, got {bad[0]!r}")
    rows = []
    for dv in dvs:
        tva = qss_current_tva(dv, cfg.limiter)
        vav = qss_current_vav(dv, cfg.limiter)
        if args.csv:
            rows.append([dv, "" if tva is None else tva, vav])
        else:
            rows.append(
                [
                    f"{dv:g}",
                    "sub-threshold" if tva is None else f"{tva:.12g}",
                    f"{vav:.12g} (when active)" if dv == 0 else f"{vav:.12g}",
                ]
            )
    print(_table(["dv", "tva", "vav"], rows, args.csv))
    return EXIT_OK


def cmd_presets(args) -> int:
    if args.name:
        print(dump_config(preset(args.name)), end="")
    else:
        for name in PRESETS:
            print(name)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "presets": cmd_presets,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.verb](args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
