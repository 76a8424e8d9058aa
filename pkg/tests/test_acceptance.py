"""Acceptance criteria 1-8, each printing one PASS/FAIL line.

Criterion 5 runs 15 month-scale solves of 2M evaluations and takes
roughly 40 minutes on one core.
"""
import statistics
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from fleetopt.baselines import GaConfig, MmasConfig
from fleetopt.bench import brute_force, solve, suite_spec
from fleetopt.cli import main
from fleetopt.evaluation import evaluate
from fleetopt.model import GeneratorSpec, generate_instance
from fleetopt.paco import PacoConfig
from fleetopt.pheromone import EdgeMatrix, PopulationView, deposit_amount, deposit_tour, reconstruct_weights

pytestmark = pytest.mark.acceptance


@pytest.fixture
def verdict(capsys):
    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert passed, line
    return record


def test_criterion_1_oracle_optimality(verdict):
    t0 = time.perf_counter()
    hits = {"paco": 0, "mmas": 0, "ga": 0}
    for i in range(20):
        inst = generate_instance(GeneratorSpec(1, 6, window_fraction=0.0, seed=i))
        optimum = brute_force(inst).C
        hits["paco"] += solve(inst, "paco", seed=i, evals=50_000, max_modify=0.5).best_quality == optimum
        hits["mmas"] += solve(inst, "mmas", seed=i, evals=50_000).best_quality == optimum
        hits["ga"] += solve(inst, "ga", seed=i, evals=50_000).best_quality == optimum
    elapsed = time.perf_counter() - t0
    ok = all(h >= 19 for h in hits.values()) and elapsed < 300
    verdict(1, ok, f"optimum hits /20 {hits}, {elapsed:.0f}s (need >= 19 each, < 300s)")


def test_criterion_2_evaluator_exactness(verdict):
    rng = np.random.default_rng(2024)
    failures = []
    for k in range(1000):
        spec = GeneratorSpec(int(rng.integers(1, 6)), int(rng.integers(1, 40)),
                             window_fraction=float(rng.uniform(0, 0.6)), seed=k)
        inst = generate_instance(spec)
        order = rng.permutation(inst.n_genes)
        rep = evaluate(inst, inst.from_indices(order))
        ok = rep.C == (rep.S - rep.s + 1.0) * rep.L and 0.0 <= rep.s <= rep.S
        ok &= rep.C == rep.L if rep.s == rep.S else True
        ok &= rep.fully_serviced == (rep.s == rep.S)
        jobs = {j.id: j for j in inst.jobs}
        for route in rep.routes:
            ok &= len(route.starts) == len(route.serviced)
            for job_id, start in zip(route.serviced, route.starts):
                job = jobs[job_id]
                lo, hi = inst.service_bounds(job)
                ok &= lo <= start and start + job.service_minutes <= hi
                ok &= inst.day_start <= start and start + job.service_minutes <= inst.day_end
        if not ok:
            failures.append(k)
    verdict(2, not failures, f"{1000 - len(failures)}/1000 pairs exact with window/day invariants")


def test_criterion_3_matrix_free_equivalence(verdict):
    rng = np.random.default_rng(7)
    mismatches = 0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        n_ants = int(rng.integers(1, 9))
        alpha = float(rng.choice([1.0, 3.0]))
        seqs = np.array([rng.permutation(n) for _ in range(n_ants)])
        quals = rng.uniform(1.0, 100.0, n_ants)
        pop = PopulationView(seqs, quals)
        matrix = EdgeMatrix.filled(n)
        for seq, q in zip(seqs, quals):
            deposit_tour(matrix, seq, deposit_amount(q, quals.min(), alpha))
        current = int(rng.integers(n))
        unvisited = [g for g in range(n) if g != current and rng.random() < 0.75]
        want = {g: matrix.tau[current, g] + matrix.tau[g, current] for g in unvisited}
        mismatches += reconstruct_weights(pop, current, unvisited, alpha) != want
    verdict(3, mismatches == 0, f"{200 - mismatches}/200 populations match the deposit-built matrix exactly")


def month_instance():
    return generate_instance(suite_spec("Month_1", 0))


def test_criterion_4_decision_count_trend(verdict):
    inst = month_instance()
    cost, elapsed = {}, {}
    for cap in (0.25, 0.5, 1.0):
        t0 = time.perf_counter()
        res = solve(inst, "paco", seed=0, evals=100_000, max_modify=cap)
        elapsed[cap] = time.perf_counter() - t0
        cost[cap] = res.stats.comparisons_per_candidate
    ratio = cost[0.25] / cost[1.0]
    ok = cost[0.25] < cost[0.5] < cost[1.0] and ratio <= 0.45 and max(elapsed.values()) < 600
    detail = ", ".join(f"cap {c}: {cost[c]:.0f} cmp/cand in {elapsed[c]:.0f}s" for c in cost)
    verdict(4, ok, f"{detail}; cap0.25/cap1.0 = {ratio:.3f} (need <= 0.45)")


def test_criterion_5_scaling_trend(verdict):
    t0 = time.perf_counter()
    inst = month_instance()
    best = {"paco0.5": [], "paco1.0": [], "mmas": []}
    for seed in range(5):
        best["paco0.5"].append(solve(inst, "paco", seed=seed, evals=2_000_000, max_modify=0.5).best_quality)
        best["paco1.0"].append(solve(inst, "paco", seed=seed, evals=2_000_000, max_modify=1.0).best_quality)
        best["mmas"].append(solve(inst, "mmas", seed=seed, evals=2_000_000).best_quality)
    means = {k: statistics.fmean(v) for k, v in best.items()}
    a = means["paco0.5"] < means["paco1.0"]
    b = means["paco0.5"] < means["mmas"]
    week_full = []
    for seed in range(5):
        week = generate_instance(suite_spec(f"Week_{seed % 4 + 1}", seed))
        week_full.append(bool(solve(week, "paco", seed=seed, evals=2_000_000, max_modify=0.5).report.fully_serviced))
    c = all(week_full)
    elapsed = time.perf_counter() - t0
    detail = (f"mean best C: cap0.5 {means['paco0.5']:.1f}, cap1.0 {means['paco1.0']:.1f}, "
              f"MMAS {means['mmas']:.1f}; (a) {a} (b) {b}; (c) week full service {sum(week_full)}/5; "
              f"{elapsed / 60:.0f} min (limit 120)")
    verdict(5, a and b and c and elapsed <= 7200, detail)


def test_criterion_6_week_full_service(verdict):
    served = {"ga": 0, "paco": 0}
    for seed in range(10):
        week = generate_instance(suite_spec(f"Week_{seed % 4 + 1}", seed))
        served["paco"] += bool(solve(week, "paco", seed=seed, evals=500_000, max_modify=0.5).report.fully_serviced)
        served["ga"] += bool(solve(week, "ga", seed=seed, evals=500_000).report.fully_serviced)
    verdict(6, served == {"ga": 10, "paco": 10}, f"full service on 10 week seeds: {served}")


def test_criterion_7_determinism(verdict, tmp_path):
    inst_path = tmp_path / "week.json"
    main(["gen", "--vehicles", "8", "--jobs", "40", "--seed", "3", "--out", str(inst_path)])
    identical = {}
    for algorithm in ("paco", "paco-ph", "mmas", "ga"):
        outputs = []
        for k, workers in enumerate(("1", "1", "2", "4")):
            out = tmp_path / f"{algorithm}-{k}"
            code = main(["solve", "--instance", str(inst_path), "--algorithm", algorithm, "--seed", "11",
                         "--evals", "5000", "--workers", workers, "--out", str(out)])
            outputs.append((code, {p.name: p.read_bytes() for p in sorted(out.iterdir())}))
        identical[algorithm] = all(o == outputs[0] for o in outputs) and outputs[0][0] == 0
    verdict(7, all(identical.values()), f"byte-identical solve outputs across repeats and workers 1/2/4: {identical}")


def test_criterion_8_parameter_fidelity(verdict):
    mf, ph = PacoConfig.for_variant("matrix-free"), PacoConfig.for_variant("ph")
    mmas, ga = MmasConfig(), GaConfig()
    snapshot = {
        "paco": (mf.n_ants, mf.max_iterations, mf.alpha, mf.beta),
        "paco_ph": (ph.n_ants, ph.max_iterations, ph.alpha, ph.beta, ph.rho),
        "mmas": (mmas.n_ants, mmas.max_iterations, mmas.alpha, mmas.beta, mmas.rho),
        "ga": (ga.population_size, ga.max_generations, ga.tournament_size, ga.crossover_prob, ga.mutation_prob),
        "caps": (mf.max_modify, mf.escape_prob),
    }
    table = {
        "paco": (32, 6_000_000, 3.0, 1.0),
        "paco_ph": (192, 1_000_000, 1.0, 1.0, 0.5),
        "mmas": (192, 1_000_000, 1.0, 1.0, 0.02),
        "ga": (192, 1_000_000, 5, 0.5, 0.5),
        "caps": (1.0, 0.001),
    }
    # equal evaluation budgets across algorithms
    budgets = {mf.n_ants * mf.max_iterations, ph.n_ants * ph.max_iterations,
               mmas.n_ants * mmas.max_iterations, ga.population_size * ga.max_generations}
    verdict(8, snapshot == table and budgets == {192_000_000}, f"default configs {snapshot}")
