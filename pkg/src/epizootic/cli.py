"""Command-line campaign runner.

Verbs: ``campaign`` (one scenario, all replicates), ``sweep`` (1-2 axis
grid), ``sensitivity`` (50%-150% one-parameter sweep), ``optimize``
(allocation search only) and ``validate`` (check input files). All
inputs are JSON/CSV files; outputs are CSV plus a JSON manifest that
reproduces the run when passed back as a scenario.

Exit codes: 0 success, 1 at least one replicate failed, 2 bad
configuration or usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import ValidationError, load_graph, load_param_ranges
from .experiments import (ConfigError, Scenario, SweepSpec, load_scenario,
                          load_temperature, plan_interventions, run_campaign,
                          run_sensitivity, run_sweep)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", help="scenario JSON (or manifest)")
    parser.add_argument("--graph", help="override graph JSON path")
    parser.add_argument("--params", help="override parameter-ranges JSON path")
    parser.add_argument("--temperature", help="override temperature CSV path")
    parser.add_argument("--engine", choices=("ode", "abs"))
    parser.add_argument("--replicates", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out", default="out",
                        help="output directory (default: ./out)")


def _load(args) -> Scenario:
    if not args.scenario:
        raise ConfigError("--scenario is required")
    scenario = load_scenario(args.scenario)
    if args.graph:
        scenario = scenario.with_(graph=json.load(open(args.graph)))
    if args.params:
        scenario = scenario.with_(ranges=json.load(open(args.params)))
    if args.temperature:
        scenario = scenario.with_(
            temperature=load_temperature(args.temperature).values.tolist())
    for name in ("engine", "replicates", "seed", "workers"):
        value = getattr(args, name)
        if value is not None:
            scenario = scenario.with_(**{name: value})
    return scenario


def _cmd_campaign(args) -> int:
    scenario = _load(args)
    result = run_campaign(scenario, out_dir=args.out)
    for entry in result.summary:
        print(f"{entry['scenario']:>22}  {entry['metric']:>4} "
              f"mean={entry['mean']:.6g} std={entry['std']:.6g} "
              f"n={entry['replicates']}")
    if result.failed:
        print(f"{result.failed} replicate(s) failed", file=sys.stderr)
        return 1
    return 0


def _parse_axis(text: str) -> tuple[str, list[float]]:
    try:
        name, raw = text.split("=", 1)
        values = [float(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad axis spec {text!r}; want NAME=v1,v2,...")
    if not values:
        raise ConfigError(f"axis {name!r} lists no values")
    return name, values


def _cmd_sweep(args) -> int:
    scenario = _load(args)
    axes = [_parse_axis(a) for a in args.axis]
    rows = run_sweep(SweepSpec(axes=axes, scenario=scenario),
                     out_dir=args.out)
    failed = sum(row["failed"] for row in rows)
    print(f"wrote {len(rows)} grid rows to {Path(args.out) / 'grid.csv'}")
    return 1 if failed else 0


def _cmd_sensitivity(args) -> int:
    scenario = _load(args)
    rows = run_sensitivity(args.parameter, scenario, out_dir=args.out)
    for row in rows:
        print(f"{row['parameter']} x{row['multiplier']:<5} "
              f"ARN={row['arn_mean']:.6g} +- {row['arn_std']:.6g}")
    failed = sum(row["failed"] for row in rows)
    return 1 if failed else 0


def _cmd_optimize(args) -> int:
    scenario = _load(args)
    if not scenario.eip_mode.startswith("optimal"):
        scenario = scenario.with_(eip_mode=f"optimal-{args.kind}")
    fixed, manifest = plan_interventions(scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "eip_mode": scenario.eip_mode,
        "allocations": {kind: {"amounts": list(alloc.amounts),
                               "tau": alloc.tau}
                        for kind, alloc in fixed.items()},
        "search": manifest,
    }
    path = out / "optimizer.json"
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for kind, alloc in fixed.items():
        print(f"{kind}: {list(alloc.amounts)} at t={alloc.tau}")
    print(f"wrote {path}")
    return 0


def _cmd_validate(args) -> int:
    checked = 0
    if args.graph:
        load_graph(args.graph)
        print(f"graph ok: {args.graph}")
        checked += 1
    if args.params:
        load_param_ranges(args.params)
        print(f"ranges ok: {args.params}")
        checked += 1
    if args.temperature:
        series = load_temperature(args.temperature)
        print(f"temperature ok: {args.temperature} "
              f"({len(series.values)} hours)")
        checked += 1
    if args.scenario:
        scenario = load_scenario(args.scenario)
        print(f"scenario ok: {args.scenario} (engine={scenario.engine}, "
              f"eip_mode={scenario.eip_mode})")
        checked += 1
    if not checked:
        raise ConfigError("nothing to validate; pass --scenario/--graph/"
                          "--params/--temperature")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epizootic",
        description="Rabies outbreak simulation and intervention "
                    "optimization campaigns")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("campaign", help="run one scenario's replicates")
    _add_common(p)
    p.set_defaults(func=_cmd_campaign)

    p = sub.add_parser("sweep", help="grid over 1-2 scenario axes")
    _add_common(p)
    p.add_argument("--axis", action="append", required=True,
                   metavar="NAME=V1,V2,...",
                   help="axis spec; repeat for a second axis")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("sensitivity",
                       help="50%%-150%% sweep of one parameter, no EIPs")
    _add_common(p)
    p.add_argument("--parameter", required=True,
                   help="ranges key, e.g. beta, phi or c")
    p.set_defaults(func=_cmd_sensitivity)

    p = sub.add_parser("optimize", help="allocation search only")
    _add_common(p)
    p.add_argument("--kind", choices=("vaccination", "dilution", "both"),
                   default="vaccination")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("validate", help="check input files")
    _add_common(p)
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValidationError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
