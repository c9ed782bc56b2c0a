"""Command-line interface: ``isocrit estimate | simulate | table``."""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from . import applied
from .errors import ConfigError, EmptyDomain, IsocritError
from .simlab import presets
from .simlab.engine import run_replications
from .simlab.scenarios import ScenarioConfig

EXIT_INPUT = 2
EXIT_EMPTY_DOMAIN = 3


def _dump(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_estimate(args) -> int:
    edges = applied.parse_edges(args.bin_edges) if args.bin_edges else None
    order = [s.strip() for s in args.domain_order.split(",")] if args.domain_order else None
    data = applied.read_survey_csv(
        args.input, args.value_col, args.weight_col, domain_col=args.domain_col,
        bin_col=args.bin_col, bin_edges=edges, stratum_col=args.stratum_col, domain_order=order,
    )
    config = {
        "input": str(args.input),
        "value_col": args.value_col,
        "weight_col": args.weight_col,
        "domain_col": args.domain_col,
        "bin_col": args.bin_col,
        "bin_edges": edges,
        "stratum_col": args.stratum_col,
        "C": args.C,
        "seed": args.seed,
        "mc_draws": args.mc_draws,
        "decreasing": args.decreasing,
    }
    report = applied.analyze(data, C=args.C, seed=args.seed, mc_draws=args.mc_draws,
                             decreasing=args.decreasing, config=config)
    _dump(report.to_json(), args.out)
    if args.csv_out:
        applied.write_estimates_csv(report, args.csv_out)
    return 0


def load_scenario(name: str) -> ScenarioConfig:
    path = Path(name)
    if path.suffix == ".json" or path.exists():
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read scenario file {name}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("scenario file must hold a JSON object")
        return ScenarioConfig.from_dict(data)
    return presets.preset(name)


def cmd_simulate(args) -> int:
    config = load_scenario(args.scenario)
    changes = {}
    if args.reps is not None:
        changes["reps"] = args.reps
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.mc_draws is not None:
        changes["mc_draws"] = args.mc_draws
    config = config.replace(**changes)
    start = time.perf_counter()
    summary = run_replications(config, workers=args.workers)
    out = {
        "schema": applied.SCHEMA_VERSION,
        "config": config.to_dict(),
        "summary": summary.to_dict(),
        "wall_time_s": round(time.perf_counter() - start, 3),
    }
    _dump(out, args.out)
    return 0


def _fmt(v) -> str:
    if v is None:
        return "*"
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return f"{v:.3f}"


def run_table(number: int, scale: str, reps: int | None = None, seed: int | None = None, workers: int | None = None) -> dict:
    spec = presets.table(number)
    reps = reps or (presets.FULL_REPS if scale == "full" else presets.DESK_REPS)
    spec = spec.with_reps(reps, seed)
    cells = []
    for i, (label, cfg) in enumerate(spec.cells):
        s = run_replications(cfg, workers=workers)
        measured = dict(s.prop_unconstrained)
        measured["ratio_constrained"] = s.ratio_constrained
        measured["ratio_adaptive"] = s.ratio_adaptive
        se = dict(s.prop_std_error)
        se["ratio_constrained"] = s.ratio_std_error["constrained"]
        se["ratio_adaptive"] = s.ratio_std_error["adaptive"]
        cells.append({
            "label": label,
            "config": cfg.to_dict(),
            "measured": measured,
            "reported": {row: spec.reported[row][i] for row in presets.ROWS},
            # three Monte Carlo standard errors around the measured value
            "tolerance": {row: (None if se[row] is None else 3 * se[row]) for row in presets.ROWS},
            "unavailable_count": s.unavailable_count,
            "reps_used": s.reps_used,
        })
    return {"schema": applied.SCHEMA_VERSION, "table": number, "title": spec.title, "scale": scale,
            "reps": reps, "cells": cells}


def format_table(result: dict) -> str:
    lines = [f"Table {result['table']}: {result['title']}  ({result['scale']} scale, {result['reps']} reps)"]
    width = max(len(c["label"]) for c in result["cells"])
    lines.append(f"{'cell':<{width}}  {'row':<18} {'measured':>9} {'+/-':>7} {'reported':>9}")
    for c in result["cells"]:
        for row in presets.ROWS:
            tol = c["tolerance"][row]
            lines.append(f"{c['label']:<{width}}  {row:<18} {_fmt(c['measured'][row]):>9} "
                         f"{_fmt(tol) if tol is not None else '-':>7} {_fmt(c['reported'][row]):>9}")
    return "\n".join(lines) + "\n"


def cmd_table(args) -> int:
    result = run_table(args.table, args.scale, args.reps, args.seed, args.workers)
    sys.stdout.write(format_table(result))
    if args.out:
        _dump(result, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isocrit", description="Monotone domain-mean estimation for survey data with CIC_s.")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="analyze a survey CSV")
    est.add_argument("input", help="CSV file with a header row")
    est.add_argument("--value-col", required=True)
    est.add_argument("--weight-col", required=True, help="survey weight w_k = 1/pi_k")
    est.add_argument("--domain-col")
    est.add_argument("--domain-order", help="comma-separated domain labels in increasing order")
    est.add_argument("--bin-col")
    est.add_argument("--bin-edges", help="comma-separated increasing edges, e.g. 21,25,29")
    est.add_argument("--stratum-col", help="strata for exact STSI joint inclusion probabilities")
    est.add_argument("--decreasing", action="store_true", help="fit a nonincreasing trend")
    est.add_argument("--C", type=float, default=2.0, help="CIC_s penalty constant")
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--mc-draws", type=int, default=10_000)
    est.add_argument("--out", help="JSON report path (default stdout)")
    est.add_argument("--csv-out", help="also write per-domain estimates as CSV")
    est.set_defaults(func=cmd_estimate)

    sim = sub.add_parser("simulate", help="run one simulation scenario")
    sim.add_argument("--scenario", required=True, help="preset tableK[:cell] or a scenario JSON file")
    sim.add_argument("--reps", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--mc-draws", type=int)
    sim.add_argument("--workers", type=int)
    sim.add_argument("--out")
    sim.set_defaults(func=cmd_simulate)

    tab = sub.add_parser("table", help="reproduce a published simulation table")
    tab.add_argument("--table", type=int, required=True)
    tab.add_argument("--scale", choices=("full", "desk"), default="desk")
    tab.add_argument("--reps", type=int)
    tab.add_argument("--seed", type=int)
    tab.add_argument("--workers", type=int)
    tab.add_argument("--out")
    tab.set_defaults(func=cmd_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EmptyDomain as exc:
        print(f"isocrit: {exc}", file=sys.stderr)
        return EXIT_EMPTY_DOMAIN
    except (applied.InputError, ConfigError) as exc:
        print(f"isocrit: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except IsocritError as exc:
        print(f"isocrit: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
