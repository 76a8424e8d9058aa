"""Experiment harness: multi-seed runs, baseline comparison and CSV/JSONL reports."""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from fleetopt import _backend
from fleetopt.baselines import GaConfig, MmasConfig, run_ga, run_mmas
from fleetopt.evaluation import QualityReport, company_baseline, evaluate, evaluate_indices
from fleetopt.model import GeneratorSpec, Instance, dump_instance, generate_instance
from fleetopt.paco import PacoConfig, RunResult, run_paco

ALGORITHMS = ("paco", "paco-ph", "mmas", "ga")
CSV_COLUMNS = (
    "problem", "algorithm", "runs", "serviced_mean", "serviced_sd",
    "reduction_mean", "reduction_sd", "evals", "comparisons_mean",
)
BRUTE_FORCE_LIMIT = 10


class BruteForceLimitError(ValueError):
    pass


def default_config(algorithm: str):
    if algorithm == "paco":
        return PacoConfig.for_variant("matrix-free")
    if algorithm == "paco-ph":
        return PacoConfig.for_variant("ph")
    if algorithm == "mmas":
        return MmasConfig()
    if algorithm == "ga":
        return GaConfig()
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


def solve(instance: Instance, algorithm: str, seed: int = 0, evals: Optional[int] = None,
          kernels=None, **overrides) -> RunResult:
    """Run one solver with its default parameters plus ``overrides``."""
    config = replace(default_config(algorithm), seed=seed, eval_budget=evals, **overrides)
    if algorithm == "paco":
        return run_paco(instance, config, "matrix-free", kernels)
    if algorithm == "paco-ph":
        return run_paco(instance, config, "ph", kernels)
    if algorithm == "mmas":
        return run_mmas(instance, config, kernels)
    return run_ga(instance, config, kernels)


@dataclass
class ExperimentSpec:
    problem: str
    instance: Union[Instance, GeneratorSpec, str, Path]
    algorithm: str
    runs: int = 25
    base_seed: int = 0
    evals: Optional[int] = None
    overrides: dict = field(default_factory=dict)
    out_dir: Optional[Path] = None

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")

    def load(self) -> Instance:
        if isinstance(self.instance, Instance):
            return self.instance
        if isinstance(self.instance, GeneratorSpec):
            return generate_instance(self.instance)
        from fleetopt.model import load_instance
        return load_instance(Path(self.instance).read_text())


@dataclass(frozen=True)
class RunRecord:
    seed: int
    s: float
    L: float
    C: float
    S: float
    serviced_pct: float
    reduction_pct: Optional[float]  # None when service differs from the baseline
    evaluations: int
    comparisons_per_candidate: float

    @property
    def flagged(self) -> bool:
        return self.reduction_pct is None


@dataclass(frozen=True)
class SummaryRow:
    problem: str
    algorithm: str
    runs: int
    serviced_mean: float
    serviced_sd: float
    reduction_mean: Optional[float]
    reduction_sd: Optional[float]
    evals: int
    comparisons_mean: float
    flagged_runs: int = 0

    def csv_row(self) -> list[str]:
        def fmt(x):
            return "" if x is None else repr(float(x))
        return [self.problem, self.algorithm, str(self.runs), fmt(self.serviced_mean), fmt(self.serviced_sd),
                fmt(self.reduction_mean), fmt(self.reduction_sd), str(self.evals), fmt(self.comparisons_mean)]


@dataclass
class ExperimentResult:
    summary: SummaryRow
    records: list[RunRecord]
    baseline: QualityReport


def mean_sd(values: Sequence[float]) -> tuple[float, float]:
    """Mean and sample standard deviation (0 for a single value)."""
    values = [float(v) for v in values]
    m = statistics.fmean(values)
    return m, (statistics.stdev(values) if len(values) > 1 else 0.0)


def reduction_pct(base: QualityReport, report: QualityReport) -> Optional[float]:
    if not math.isclose(report.s, base.s, rel_tol=1e-9, abs_tol=1e-6):
        return None
    if base.L == 0:
        return 0.0 if report.L == 0 else None
    return 100.0 * (base.L - report.L) / base.L


def summarise(problem: str, algorithm: str, records: Sequence[RunRecord]) -> SummaryRow:
    records = sorted(records, key=lambda r: r.seed)
    serviced = mean_sd([r.serviced_pct for r in records])
    comparable = [r.reduction_pct for r in records if r.reduction_pct is not None]
    reduction = mean_sd(comparable) if comparable else (None, None)
    return SummaryRow(
        problem=problem,
        algorithm=algorithm,
        runs=len(records),
        serviced_mean=serviced[0],
        serviced_sd=serviced[1],
        reduction_mean=reduction[0],
        reduction_sd=reduction[1],
        evals=max(r.evaluations for r in records),
        comparisons_mean=statistics.fmean(r.comparisons_per_candidate for r in records),
        flagged_runs=len(records) - len(comparable),
    )


def write_csv(path: Path, rows: Sequence[SummaryRow]):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.csv_row())
    Path(path).write_text(buf.getvalue())


def read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run_experiment(spec: ExperimentSpec, baseline: Optional[QualityReport] = None) -> ExperimentResult:
    instance = spec.load()
    if baseline is None:
        baseline = evaluate(instance, company_baseline(instance))
    out = Path(spec.out_dir) if spec.out_dir is not None else None
    if out is not None:
        (out / "traces").mkdir(parents=True, exist_ok=True)
    records = []
    for i in range(spec.runs):
        seed = spec.base_seed + i
        result = solve(instance, spec.algorithm, seed, spec.evals, **spec.overrides)
        rep = result.report
        records.append(RunRecord(
            seed=seed, s=rep.s, L=rep.L, C=rep.C, S=rep.S,
            serviced_pct=100.0 * rep.serviced_fraction,
            reduction_pct=reduction_pct(baseline, rep),
            evaluations=result.stats.evaluations,
            comparisons_per_candidate=result.stats.comparisons_per_candidate,
        ))
        if out is not None:
            name = f"{spec.problem}_{spec.algorithm}_seed{seed}.jsonl"
            (out / "traces" / name).write_text(result.stats.trace_jsonl())
    summary = summarise(spec.problem, spec.algorithm, records)
    if out is not None:
        stem = f"{spec.problem}_{spec.algorithm}"
        write_csv(out / f"{stem}.csv", [summary])
        lines = []
        for r in records:
            d = dict(r.__dict__, flagged=r.flagged)
            lines.append(json.dumps(d) + "\n")
        (out / f"{stem}_runs.jsonl").write_text("".join(lines))
    return ExperimentResult(summary, records, baseline)


# (name, vehicles, jobs, target service minutes)
SUITE_PROBLEMS = (
    ("Week_1", 8, 77, 2829), ("Week_2", 8, 79, 2904), ("Week_3", 8, 81, 2913), ("Week_4", 8, 61, 3292),
    ("Fortnight_1", 16, 156, 5733), ("Fortnight_2", 16, 138, 6121),
    ("Fortnight_3", 16, 160, 5817), ("Fortnight_4", 16, 142, 6205),
    ("ThreeWeek_1", 24, 237, 8646), ("ThreeWeek_2", 24, 217, 9025),
    ("ThreeWeek_3", 24, 219, 9034), ("ThreeWeek_4", 24, 221, 9109),
    ("Month_1", 32, 298, 11938),
)
SCALES = {"small": (200_000, 5), "full": (None, 25)}


def suite_spec(name: str, seed: int = 0) -> GeneratorSpec:
    row = next(p for p in SUITE_PROBLEMS if p[0] == name)
    return GeneratorSpec(n_vehicles=row[1], n_jobs=row[2], target_total_service=row[3], seed=seed)


def paper_suite(out_dir, scale: str = "small", *, runs: Optional[int] = None, evals: Optional[int] = None,
                problems: Optional[Sequence[str]] = None, algorithms: Sequence[str] = ALGORITHMS,
                instance_seed: int = 0) -> list[SummaryRow]:
    """Run every algorithm on every suite problem and write ``summary.csv``.

    ``scale="small"`` uses 200,000 evaluations and 5 runs; ``"full"`` runs
    each solver to its own iteration limit 25 times. ``runs`` and ``evals``
    override the scale.
    """
    if scale not in SCALES:
        raise ValueError(f"scale must be one of {sorted(SCALES)}")
    default_evals, default_runs = SCALES[scale]
    runs = runs if runs is not None else default_runs
    evals = evals if evals is not None else default_evals
    names = list(problems) if problems is not None else [p[0] for p in SUITE_PROBLEMS]
    out = Path(out_dir)
    (out / "instances").mkdir(parents=True, exist_ok=True)
    rows = []
    baselines = {}
    for k, name in enumerate(names):
        instance = generate_instance(suite_spec(name, instance_seed + k))
        (out / "instances" / f"{name}.json").write_text(dump_instance(instance))
        base = evaluate(instance, company_baseline(instance))
        baselines[name] = {"s_min": base.s, "L_min": base.L, "C": base.C,
                           "serviced_pct": 100.0 * base.serviced_fraction}
        for algorithm in algorithms:
            spec = ExperimentSpec(name, instance, algorithm, runs=runs, evals=evals, out_dir=out / "runs")
            rows.append(run_experiment(spec, base).summary)
    write_csv(out / "summary.csv", rows)
    (out / "baselines.json").write_text(json.dumps(baselines, indent=2, sort_keys=True) + "\n")
    return rows


def brute_force(instance: Instance, kernels=None) -> QualityReport:
    """Exhaustive optimum over every distinct decoding.

    Rotations decode identically, so the first vehicle gene is pinned to
    the front and the remaining genes are permuted.
    """
    n = instance.n_genes
    if n > BRUTE_FORCE_LIMIT:
        raise BruteForceLimitError(f"brute force is limited to {BRUTE_FORCE_LIMIT} genes, got {n}")
    k = kernels or _backend.kernels
    prob = instance.arrays
    best, best_c = None, math.inf
    order = np.zeros(n, dtype=np.int32)
    for rest in itertools.permutations(range(1, n)):
        order[1:] = rest
        c = k.evaluate(prob, order)[2]
        if c < best_c:
            best, best_c = order.copy(), c
    return evaluate_indices(instance, best)
