"""Partial-ACO: ants keep a local-best tour and rebuild only part of it.

Two variants share one driver:

* ``"matrix-free"`` rebuilds pheromone on demand from the population of
  local-best tours (no n x n structure);
* ``"ph"`` keeps a dense pheromone matrix that every ant's local best
  updates at each iteration barrier.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Union

import numpy as np

from fleetopt import _backend
from fleetopt.evaluation import QualityReport, evaluate_indices
from fleetopt.model import Instance, Solution
from fleetopt.pheromone import (
    EdgeMatrix,
    PopulationView,
    evaporate,
    heuristic,
    relative_deposits,
    selection_weights,
)

VARIANTS = ("matrix-free", "ph")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PacoConfig:
    n_ants: int = 32
    max_iterations: int = 6_000_000
    alpha: float = 3.0
    beta: float = 1.0
    rho: float = 0.5  # PH variant only
    max_modify: float = 1.0
    escape_prob: float = 0.001
    eval_budget: Optional[int] = None
    seed: int = 0
    workers: int = 1
    trace_stride: int = 100

    @classmethod
    def for_variant(cls, variant: str = "matrix-free", **overrides) -> "PacoConfig":
        if variant not in VARIANTS:
            raise ConfigError(f"unknown variant {variant!r}")
        base = cls() if variant == "matrix-free" else cls(n_ants=192, max_iterations=1_000_000, alpha=1.0)
        return replace(base, **overrides)

    def validate(self):
        if self.n_ants < 1:
            raise ConfigError("n_ants must be >= 1")
        if not 0.0 < self.max_modify <= 1.0:
            raise ConfigError("max_modify must be in (0, 1]")
        if not 0.0 <= self.escape_prob <= 1.0:
            raise ConfigError("escape_prob must be in [0, 1]")
        if not 0.0 < self.rho < 1.0:
            raise ConfigError("rho must be in (0, 1)")
        if self.max_iterations < 0 or self.workers < 1 or self.trace_stride < 1:
            raise ConfigError("max_iterations, workers and trace_stride must be positive")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("alpha and beta must be non-negative")
        if self.eval_budget is not None and self.eval_budget < self.n_ants:
            raise ConfigError("eval_budget must cover the initial population")


@dataclass
class AntState:
    l_best: Solution
    l_best_quality: float
    rng: np.random.Generator


@dataclass(frozen=True)
class TracePoint:
    iter: int
    evals: int
    best_C: float
    comparisons: int


@dataclass
class RunStats:
    iterations: int = 0
    evaluations: int = 0
    comparisons: int = 0
    decisions: int = 0
    trace: list[TracePoint] = field(default_factory=list)

    @property
    def comparisons_per_candidate(self) -> float:
        return self.comparisons / self.evaluations if self.evaluations else 0.0

    def record(self, best_C: float):
        point = TracePoint(self.iterations, self.evaluations, float(best_C), self.comparisons)
        if self.trace and self.trace[-1].iter == point.iter:
            self.trace[-1] = point
        else:
            self.trace.append(point)

    def trace_jsonl(self) -> str:
        return "".join(json.dumps(asdict(p)) + "\n" for p in self.trace)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "comparisons": self.comparisons,
            "decisions": self.decisions,
            "comparisons_per_candidate": self.comparisons_per_candidate,
        }


@dataclass
class RunResult:
    solution: Solution
    report: QualityReport
    stats: RunStats
    best_quality: float


def ant_streams(seed: int, n: int) -> list[np.random.Generator]:
    """Independent per-ant generators derived from one seed."""
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(n)]


def positions_of(sequences: np.ndarray) -> np.ndarray:
    pos = np.empty_like(sequences)
    rows = np.arange(sequences.shape[0])[:, None]
    pos[rows, sequences] = np.arange(sequences.shape[1], dtype=sequences.dtype)[None, :]
    return pos


class _Batch:
    """Construction buffers for one iteration, split over worker threads."""

    def __init__(self, n_ants: int, n: int, workers: int):
        self.children = np.zeros((n_ants, n), dtype=np.int32)
        self.quals = np.empty(n_ants)
        self.decisions = np.zeros(n_ants, dtype=np.int64)
        self.comparisons = np.zeros(n_ants, dtype=np.int64)
        self.workers = workers
        self.pool = ThreadPoolExecutor(workers) if workers > 1 else None

    def run(self, fn, active: int):
        if self.pool is None:
            fn(0, active)
            return
        bounds = np.linspace(0, active, self.workers + 1).astype(int)
        futures = [self.pool.submit(fn, lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
        for f in futures:
            f.result()

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


def _source_weights(instance: Instance, source, alpha: float, beta: float):
    """Dense selection weights for a matrix source, or None for a population."""
    if isinstance(source, EdgeMatrix):
        return selection_weights(source, heuristic(instance.travel, beta), alpha)
    return None


def _construct_one(instance, source, rng, alpha, beta, lbest, max_modify, escape_prob, full, kernels=None):
    k = kernels or _backend.kernels
    prob = instance.arrays
    n = instance.n_genes
    batch = _Batch(1, n, 1)
    lbests = np.ascontiguousarray(lbest.reshape(1, n) if lbest is not None else np.zeros((1, n)), dtype=np.int32)
    weights = _source_weights(instance, source, alpha, beta)
    if weights is not None:
        k.build_dense(prob, weights, lbests, batch.children, 0, 1, [rng], beta,
                      max_modify, escape_prob, full, batch.quals, batch.decisions, batch.comparisons)
    else:
        pop = source if source is not None else PopulationView(np.zeros((0, n), dtype=np.int32), np.zeros(0))
        k.build_sparse(prob, lbests, pop.sequences, pop.positions, pop.deposits(alpha) if len(pop.qualities) else np.zeros(0),
                       batch.children, 0, 1, [rng], alpha, beta, max_modify, escape_prob, full,
                       batch.quals, batch.decisions, batch.comparisons)
    return batch.children[0].copy(), int(batch.decisions[0]), int(batch.comparisons[0])


def construct_initial(instance: Instance, source: Union[None, PopulationView, EdgeMatrix] = None,
                      rng: Optional[np.random.Generator] = None, alpha: float = 3.0, beta: float = 1.0) -> Solution:
    """Build a full tour: a random vehicle first, then the random proportional rule."""
    rng = rng if rng is not None else np.random.default_rng()
    order, _, _ = _construct_one(instance, source, rng, alpha, beta, None, 1.0, 0.0, True)
    return instance.from_indices(order)


def select_retention(n: int, max_modify: float, escape_prob: float, rng: np.random.Generator) -> tuple[int, int]:
    """Random cyclic segment ``(start, length)`` of an ``n``-gene tour to keep."""
    if n < 2:
        raise ValueError("tour must have at least two genes")
    return _backend.kernels.retention(n, max_modify, escape_prob, rng)


def partial_reconstruct(ant: AntState, instance: Instance, source, config: PacoConfig,
                        rng: Optional[np.random.Generator] = None) -> Solution:
    """Keep a random segment of the ant's local best and rebuild the rest."""
    rng = rng if rng is not None else ant.rng
    lbest = instance.to_indices(ant.l_best)
    order, _, _ = _construct_one(instance, source, rng, config.alpha, config.beta, lbest,
                                 config.max_modify, config.escape_prob, False)
    return instance.from_indices(order)


def run_paco(instance: Instance, config: Optional[PacoConfig] = None, variant: str = "matrix-free",
             kernels=None) -> RunResult:
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}")
    config = config if config is not None else PacoConfig.for_variant(variant)
    config.validate()
    k = kernels or _backend.kernels
    prob = instance.arrays
    n = instance.n_genes
    n_ants = config.n_ants
    budget = config.eval_budget if config.eval_budget is not None else float("inf")
    rngs = ant_streams(config.seed, n_ants)
    batch = _Batch(n_ants, n, config.workers)
    stats = RunStats()
    alpha, beta = config.alpha, config.beta
    dense = variant == "ph"

    if dense:
        eta_beta = heuristic(instance.travel, beta)
        matrix = EdgeMatrix.filled(n, 1.0)
        weights = selection_weights(matrix, eta_beta, alpha)
    empty = np.zeros((0, n), dtype=np.int32)

    def build(lbests, pop, pos, deposits, full):
        if dense:
            return lambda lo, hi: k.build_dense(
                prob, weights, lbests, batch.children, lo, hi, rngs, beta, config.max_modify,
                config.escape_prob, full, batch.quals, batch.decisions, batch.comparisons)
        return lambda lo, hi: k.build_sparse(
            prob, lbests, pop, pos, deposits, batch.children, lo, hi, rngs, alpha, beta,
            config.max_modify, config.escape_prob, full, batch.quals, batch.decisions, batch.comparisons)

    try:
        batch.run(build(batch.children, empty, empty, np.zeros(0), True), n_ants)
        pop = batch.children.copy()
        quals = batch.quals.copy()
        pos = positions_of(pop)
        stats.evaluations = n_ants
        stats.comparisons = int(batch.comparisons.sum())
        stats.decisions = int(batch.decisions.sum())
        stats.record(quals.min())

        while stats.iterations < config.max_iterations and stats.evaluations < budget:
            deposits = relative_deposits(quals, alpha)
            if dense:
                evaporate(matrix, config.rho)
                _deposit_population(matrix, pop, deposits)
                weights = selection_weights(matrix, eta_beta, alpha)
            active = int(min(n_ants, budget - stats.evaluations))
            batch.run(build(pop, pop, pos, deposits, False), active)
            # barrier: apply replacements serially
            better = np.flatnonzero(batch.quals[:active] < quals[:active])
            for a in better:
                pop[a] = batch.children[a]
                pos[a, pop[a]] = np.arange(n, dtype=np.int32)
                quals[a] = batch.quals[a]
            stats.iterations += 1
            stats.evaluations += active
            stats.comparisons += int(batch.comparisons[:active].sum())
            stats.decisions += int(batch.decisions[:active].sum())
            if stats.iterations % config.trace_stride == 0:
                stats.record(quals.min())
    finally:
        batch.close()

    stats.record(quals.min())
    best = int(np.argmin(quals))
    report = evaluate_indices(instance, pop[best])
    return RunResult(instance.from_indices(pop[best]), report, stats, float(quals[best]))


def _deposit_population(matrix: EdgeMatrix, pop: np.ndarray, deposits: np.ndarray):
    """Every ant lays its relative deposit on both directions of its tour edges."""
    src = pop.ravel()
    dst = np.roll(pop, -1, axis=1).ravel()
    amounts = np.repeat(deposits, pop.shape[1])
    np.add.at(matrix.tau, (src, dst), amounts)
    np.add.at(matrix.tau, (dst, src), amounts)
    matrix.clamp()
