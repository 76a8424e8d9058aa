import json
import math
import statistics

import numpy as np
import pytest

from conftest import line_instance, make_instance
from fleetopt.bench import (
    ALGORITHMS,
    CSV_COLUMNS,
    SUITE_PROBLEMS,
    BruteForceLimitError,
    ExperimentSpec,
    brute_force,
    mean_sd,
    paper_suite,
    read_csv,
    reduction_pct,
    run_experiment,
    solve,
    suite_spec,
)
from fleetopt.evaluation import QualityReport, decode, evaluate, evaluate_indices
from fleetopt.model import GeoPoint, Instance, Vehicle, generate_instance, load_instance
from oracles import brute_force_single_vehicle


def report(s, L, S=100.0):
    return QualityReport(s=s, L=L, C=(S - s + 1) * L, S=S)


def test_reduction_examples():
    base = report(100.0, 80.0)
    assert reduction_pct(base, report(100.0, 80.0)) == 0.0
    assert reduction_pct(base, report(100.0, 40.0)) == 50.0
    assert reduction_pct(base, report(90.0, 40.0)) is None


def test_mean_sd():
    assert mean_sd([5.0]) == (5.0, 0.0)
    m, sd = mean_sd([1.0, 2.0, 3.0, 4.0])
    assert m == 2.5 and sd == pytest.approx(math.sqrt(5 / 3))


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec("p", make_instance(1, 3), "paco", runs=0)
    with pytest.raises(ValueError):
        ExperimentSpec("p", make_instance(1, 3), "aco")


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_run_experiment_outputs(tmp_path, algorithm):
    inst = make_instance(2, 10, seed=3)
    spec = ExperimentSpec("tiny", inst, algorithm, runs=3, base_seed=10, evals=400,
                          overrides={"n_ants": 8} if algorithm != "ga" else {"population_size": 8},
                          out_dir=tmp_path)
    res = run_experiment(spec)
    assert [r.seed for r in res.records] == [10, 11, 12]
    rows = read_csv(tmp_path / f"tiny_{algorithm}.csv")
    assert list(rows[0]) == list(CSV_COLUMNS)
    row = rows[0]
    serviced = [r.serviced_pct for r in res.records]
    assert float(row["serviced_mean"]) == statistics.fmean(serviced)
    assert float(row["serviced_sd"]) == statistics.stdev(serviced)
    comparable = [r.reduction_pct for r in res.records if r.reduction_pct is not None]
    if comparable:
        assert float(row["reduction_mean"]) == statistics.fmean(comparable)
    assert int(row["evals"]) == 400
    lines = (tmp_path / f"tiny_{algorithm}_runs.jsonl").read_text().splitlines()
    assert len(lines) == 3 and "flagged" in json.loads(lines[0])
    for seed in (10, 11, 12):
        trace = (tmp_path / "traces" / f"tiny_{algorithm}_seed{seed}.jsonl").read_text().splitlines()
        assert set(json.loads(trace[0])) == {"iter", "evals", "best_C", "comparisons"}


def test_run_experiment_byte_identical(tmp_path):
    inst = make_instance(2, 10, seed=1)
    for d in ("a", "b"):
        run_experiment(ExperimentSpec("p", inst, "paco", runs=4, evals=300, overrides={"n_ants": 6},
                                      out_dir=tmp_path / d))
    for name in ("p_paco.csv", "p_paco_runs.jsonl"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_experiment_from_file_and_generator(tmp_path):
    inst = make_instance(2, 6, seed=1)
    from fleetopt.model import dump_instance
    path = tmp_path / "i.json"
    path.write_text(dump_instance(inst))
    a = run_experiment(ExperimentSpec("f", path, "ga", runs=1, evals=200, overrides={"population_size": 10}))
    from fleetopt.model import GeneratorSpec
    b = run_experiment(ExperimentSpec("g", GeneratorSpec(2, 6, seed=1), "ga", runs=1, evals=200,
                                      overrides={"population_size": 10}))
    assert a.records == b.records
    assert a.summary.serviced_sd == 0.0


def test_solver_results_revalidate():
    inst = make_instance(3, 12, seed=8, window_fraction=0.3)
    for alg in ALGORITHMS:
        res = solve(inst, alg, seed=1, evals=500, **({"population_size": 10} if alg == "ga" else {"n_ants": 10}))
        inst.to_indices(res.solution)
        assert evaluate(inst, res.solution).C == res.report.C


def test_suite_problems_table():
    assert len(SUITE_PROBLEMS) == 13
    month = generate_instance(suite_spec("Month_1"))
    assert (month.n_vehicles, month.n_jobs) == (32, 298)
    scales = {name.split("_")[0]: (v, j) for name, v, j, _ in SUITE_PROBLEMS}
    assert scales["Week"][0] == 8 and scales["Fortnight"][0] == 16 and scales["ThreeWeek"][0] == 24
    windowed = sum(j.window is not None for j in month.jobs)
    assert abs(windowed - 29.8) <= 3 * math.sqrt(298 * 0.09)


def test_small_suite_smoke(tmp_path):
    rows = paper_suite(tmp_path, "small", runs=2, evals=600, problems=["Week_1", "Month_1"])
    assert len(rows) == 2 * len(ALGORITHMS)
    for row in rows:
        assert row.runs == 2 and row.evals == 600
        assert 0.0 <= row.serviced_mean <= 100.0 and row.serviced_sd >= 0.0
        assert row.comparisons_mean >= 0.0
    assert len(read_csv(tmp_path / "summary.csv")) == len(rows)
    assert set(json.loads((tmp_path / "baselines.json").read_text())) == {"Week_1", "Month_1"}
    load_instance((tmp_path / "instances" / "Month_1.json").read_text())


def test_suite_rejects_bad_scale(tmp_path):
    with pytest.raises(ValueError):
        paper_suite(tmp_path, "huge")


def test_brute_force_single_job():
    inst = make_instance(1, 1, seed=0)
    assert brute_force(inst).C == evaluate_indices(inst, [0, 1]).C


def test_brute_force_collinear_sweep():
    inst = line_instance([1.0, 2.0, 3.0])
    best = brute_force(inst)
    assert best.C == pytest.approx(2 * 3 * 60 / 13)
    assert best.routes[0].visited in (("J1", "J2", "J3"), ("J3", "J2", "J1"))


def test_brute_force_no_jobs():
    inst = Instance((Vehicle("A", GeoPoint(52.4, -1.9)), Vehicle("B", GeoPoint(52.5, -1.8))), ())
    assert brute_force(inst).C == 0.0


def test_brute_force_limit():
    with pytest.raises(BruteForceLimitError):
        brute_force(make_instance(2, 9))


def test_brute_force_matches_oracle_and_evaluate(kernels):
    import itertools
    for seed in range(6):
        inst = make_instance(1, 5, seed=seed, window_fraction=0.4)
        assert brute_force(inst, kernels).C == pytest.approx(brute_force_single_vehicle(inst), rel=1e-12)
    inst = make_instance(2, 4, seed=3, window_fraction=0.3)
    for rest in itertools.permutations(range(1, inst.n_genes)):
        order = np.array((0,) + rest, dtype=np.int32)
        assert kernels.evaluate(inst.arrays, order)[2] == evaluate_indices(inst, order).C
