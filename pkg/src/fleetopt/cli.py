"""Command-line entry point: ``fleetopt {solve,gen,suite,baseline}``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from fleetopt import bench
from fleetopt.evaluation import company_baseline, decode, evaluate
from fleetopt.model import GeneratorSpec, dump_instance, generate_instance, load_instance
from fleetopt.paco import ConfigError

EXIT_OK = 0
EXIT_INVALID = 2


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _read_instance(path):
    return load_instance(Path(path).read_bytes())


def cmd_solve(args) -> int:
    instance = _read_instance(args.instance)
    overrides = {"workers": args.workers} if args.algorithm != "ga" else {}
    if args.max_modify is not None or args.escape_prob is not None:
        if args.algorithm not in ("paco", "paco-ph"):
            raise ConfigError("--max-modify and --escape-prob apply to paco and paco-ph only")
        if args.max_modify is not None:
            overrides["max_modify"] = args.max_modify
        if args.escape_prob is not None:
            overrides["escape_prob"] = args.escape_prob
    result = bench.solve(instance, args.algorithm, seed=args.seed, evals=args.evals, **overrides)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "solution.json").write_text(_dump(result.solution.to_json()))
    report = result.report.to_dict()
    report["assignment"] = decode(instance, result.solution)
    report["algorithm"] = args.algorithm
    report["seed"] = args.seed
    report["stats"] = result.stats.to_dict()
    (out / "report.json").write_text(_dump(report))
    (out / "trace.jsonl").write_text(result.stats.trace_jsonl())
    print(f"{args.algorithm} seed={args.seed} C={result.report.C:.6f} "
          f"serviced={100.0 * result.report.serviced_fraction:.2f}% L={result.report.L:.2f}")
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = GeneratorSpec(n_vehicles=args.vehicles, n_jobs=args.jobs, window_fraction=args.window_frac,
                         target_total_service=args.service_total, seed=args.seed)
    Path(args.out).write_text(dump_instance(generate_instance(spec)))
    return EXIT_OK


def cmd_suite(args) -> int:
    rows = bench.paper_suite(args.out, args.scale, runs=args.runs, evals=args.evals)
    for row in rows:
        print(",".join(row.csv_row()))
    return EXIT_OK


def cmd_baseline(args) -> int:
    instance = _read_instance(args.instance)
    solution = company_baseline(instance)
    report = evaluate(instance, solution)
    doc = {"solution": solution.to_json(), "assignment": decode(instance, solution), **report.to_dict()}
    Path(args.out).write_text(_dump(doc))
    print(f"baseline C={report.C:.6f} serviced={100.0 * report.serviced_fraction:.2f}% L={report.L:.2f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fleetopt", description="Fleet routing metaheuristics and benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one solver on an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--algorithm", choices=bench.ALGORITHMS, default="paco")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--evals", type=int, default=None, help="evaluation budget (default: iteration limit)")
    p.add_argument("--max-modify", type=float, default=None)
    p.add_argument("--escape-prob", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="generate a synthetic instance")
    p.add_argument("--vehicles", type=int, required=True)
    p.add_argument("--jobs", type=int, required=True)
    p.add_argument("--window-frac", type=float, default=0.1)
    p.add_argument("--service-total", type=float, default=None, help="rescale service times to this total")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("suite", help="run the benchmark suite")
    p.add_argument("--scale", choices=sorted(bench.SCALES), default="small")
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--evals", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("baseline", help="evaluate the company-style schedule")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:  # model, config and JSON errors are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
