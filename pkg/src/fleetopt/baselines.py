"""Comparison solvers: Max-Min Ant System and a steady-state permutation GA."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from fleetopt import _backend
from fleetopt.evaluation import evaluate_indices
from fleetopt.model import Instance, Solution
from fleetopt.paco import ConfigError, RunResult, RunStats, _Batch, ant_streams
from fleetopt.pheromone import EdgeMatrix, deposit_tour, evaporate, heuristic, mmas_bounds, selection_weights


@dataclass(frozen=True)
class MmasConfig:
    n_ants: int = 192
    max_iterations: int = 1_000_000
    alpha: float = 1.0
    beta: float = 1.0
    rho: float = 0.02
    eval_budget: Optional[int] = None
    seed: int = 0
    workers: int = 1
    trace_stride: int = 100

    def validate(self):
        if self.n_ants < 1:
            raise ConfigError("n_ants must be >= 1")
        if not 0.0 < self.rho < 1.0:
            raise ConfigError("rho must be in (0, 1)")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("alpha and beta must be non-negative")
        if self.max_iterations < 0 or self.workers < 1 or self.trace_stride < 1:
            raise ConfigError("max_iterations, workers and trace_stride must be positive")
        if self.eval_budget is not None and self.eval_budget < 1:
            raise ConfigError("eval_budget must be positive")


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 192
    max_generations: int = 1_000_000
    tournament_size: int = 5
    crossover_prob: float = 0.5
    mutation_prob: float = 0.5
    eval_budget: Optional[int] = None
    seed: int = 0
    trace_stride: int = 1

    def validate(self):
        if self.population_size < 1:
            raise ConfigError("population_size must be >= 1")
        if not 1 <= self.tournament_size <= self.population_size:
            raise ConfigError("tournament_size must be in [1, population_size]")
        for name in ("crossover_prob", "mutation_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1]")
        if self.max_generations < 0 or self.trace_stride < 1:
            raise ConfigError("max_generations and trace_stride must be positive")
        if self.eval_budget is not None and self.eval_budget < self.population_size:
            raise ConfigError("eval_budget must cover the initial population")


def run_mmas(instance: Instance, config: Optional[MmasConfig] = None, kernels=None) -> RunResult:
    """Full constructions each iteration; only the best-so-far tour deposits."""
    config = config if config is not None else MmasConfig()
    config.validate()
    k = kernels or _backend.kernels
    prob = instance.arrays
    n = instance.n_genes
    budget = config.eval_budget if config.eval_budget is not None else float("inf")
    rngs = ant_streams(config.seed, config.n_ants)
    batch = _Batch(config.n_ants, n, config.workers)
    stats = RunStats()
    eta_beta = heuristic(instance.travel, config.beta)
    matrix = EdgeMatrix.filled(n, 1.0)
    weights = selection_weights(matrix, eta_beta, config.alpha)
    best_seq = None
    best_q = float("inf")

    def build(lo, hi):
        k.build_dense(prob, weights, batch.children, batch.children, lo, hi, rngs, config.beta,
                      1.0, 0.0, True, batch.quals, batch.decisions, batch.comparisons)

    try:
        while stats.iterations < config.max_iterations and stats.evaluations < budget:
            active = int(min(config.n_ants, budget - stats.evaluations))
            batch.run(build, active)
            ib = int(np.argmin(batch.quals[:active]))
            improved = batch.quals[ib] < best_q
            if improved:
                best_q = float(batch.quals[ib])
                best_seq = batch.children[ib].copy()
            stats.iterations += 1
            stats.evaluations += active
            stats.comparisons += int(batch.comparisons[:active].sum())
            stats.decisions += int(batch.decisions[:active].sum())
            # barrier
            if improved:
                first = matrix.bounds is None
                matrix.bounds = mmas_bounds(config.rho, best_q, n)
                if first:
                    matrix.tau.fill(matrix.bounds[1])
            evaporate(matrix, config.rho)
            deposit_tour(matrix, best_seq, 1.0 / max(best_q, 1e-12), symmetric=True)
            weights = selection_weights(matrix, eta_beta, config.alpha)
            if stats.iterations % config.trace_stride == 0:
                stats.record(best_q)
    finally:
        batch.close()
    stats.record(best_q)
    report = evaluate_indices(instance, best_seq)
    return RunResult(instance.from_indices(best_seq), report, stats, best_q)


def random_permutation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Fisher-Yates shuffle driven by ``rng.random()`` draws."""
    perm = np.arange(n, dtype=np.int32)
    for i in range(n - 1, 0, -1):
        j = int(rng.random() * (i + 1))
        j = min(j, i)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def run_ga(instance: Instance, config: Optional[GaConfig] = None, kernels=None) -> RunResult:
    """Steady-state GA: a child replaces the worse of its two parents only if better."""
    config = config if config is not None else GaConfig()
    config.validate()
    k = kernels or _backend.kernels
    prob = instance.arrays
    n = instance.n_genes
    size = config.population_size
    budget = config.eval_budget if config.eval_budget is not None else float("inf")
    rng = np.random.default_rng(config.seed)
    pop = np.stack([random_permutation(n, rng) for _ in range(size)])
    quals = np.array([k.evaluate(prob, row)[2] for row in pop])
    stats = RunStats(evaluations=size)
    stats.record(quals.min())
    while stats.iterations < config.max_generations and stats.evaluations < budget:
        steps = int(min(size, budget - stats.evaluations))
        k.ga_steps(prob, pop, quals, steps, rng, config.tournament_size,
                   config.crossover_prob, config.mutation_prob)
        stats.iterations += 1
        stats.evaluations += steps
        if stats.iterations % config.trace_stride == 0:
            stats.record(quals.min())
    stats.record(quals.min())
    best = int(np.argmin(quals))
    report = evaluate_indices(instance, pop[best])
    return RunResult(instance.from_indices(pop[best]), report, stats, float(quals[best]))


# --- operators on Solution objects -----------------------------------------

def _as_indices(parent_a: Solution, parent_b: Solution):
    index = {g: i for i, g in enumerate(parent_a.genes)}
    if len(index) != len(parent_a.genes) or len(parent_b.genes) != len(parent_a.genes) \
            or set(parent_b.genes) != set(index):
        raise ValueError("parents must be permutations of the same gene set")
    return list(range(len(index))), [index[g] for g in parent_b.genes]


def _crossover(op: str, parent_a: Solution, parent_b: Solution, rng) -> Solution:
    a, b = _as_indices(parent_a, parent_b)
    child = getattr(_backend.kernels, op)(a, b, rng)
    return Solution(tuple(parent_a.genes[i] for i in child))


def crossover_cx(parent_a: Solution, parent_b: Solution, rng=None) -> Solution:
    """Cycle crossover: alternate position cycles between the parents, starting with ``parent_a``."""
    return _crossover("crossover_cx", parent_a, parent_b, rng)


def crossover_ox(parent_a: Solution, parent_b: Solution, rng) -> Solution:
    """Order crossover: keep a segment of ``parent_a``; fill from ``parent_b`` after the segment, wrapping."""
    return _crossover("crossover_ox", parent_a, parent_b, rng)


def crossover_pmx(parent_a: Solution, parent_b: Solution, rng) -> Solution:
    return _crossover("crossover_pmx", parent_a, parent_b, rng)


def _mutation(op: str, solution: Solution, rng) -> Solution:
    if len(solution) < 2:
        raise ValueError("mutation needs at least two genes")
    idx = getattr(_backend.kernels, op)(list(range(len(solution))), rng)
    return Solution(tuple(solution.genes[i] for i in idx))


def mutate_swap(solution: Solution, rng) -> Solution:
    return _mutation("mutate_swap", solution, rng)


def mutate_reverse(solution: Solution, rng) -> Solution:
    return _mutation("mutate_reverse", solution, rng)


def mutate_insert(solution: Solution, rng) -> Solution:
    return _mutation("mutate_insert", solution, rng)
