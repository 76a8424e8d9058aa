"""Pheromone bookkeeping: dense edge matrices and matrix-free reconstruction.

Genes are integer indices (see :mod:`fleetopt.model`). Sequences are cyclic:
the last gene links back to the first.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from fleetopt._pykernels import ETA_FLOOR


class PheromoneError(ValueError):
    pass


def deposit_amount(l_best_quality: float, g_best_quality: float, alpha: float) -> float:
    """Relative deposit ``(g_best / l_best) ** alpha`` of one ant."""
    if not (l_best_quality > 0 and g_best_quality > 0):
        raise PheromoneError("qualities must be positive")
    if g_best_quality > l_best_quality:
        raise PheromoneError("g_best cannot be worse than an ant's l_best")
    return (g_best_quality / l_best_quality) ** alpha


def relative_deposits(qualities: np.ndarray, alpha: float) -> np.ndarray:
    """Vectorised :func:`deposit_amount` that tolerates a zero-cost optimum.

    A zero quality can only mean L == 0, which is optimal; ants sharing it
    deposit 1 and every other ant deposits 0.
    """
    q = np.asarray(qualities, dtype=float)
    g = q.min()
    if g > 0:
        # scalar pow, not numpy's: its cube fast path can differ by an ulp
        return np.array([deposit_amount(float(x), float(g), alpha) for x in q])
    return np.where(q == g, 1.0, 0.0)


@dataclass
class EdgeMatrix:
    tau: np.ndarray
    bounds: Optional[tuple[float, float]] = None

    @classmethod
    def filled(cls, n_genes: int, value: float = 0.0, bounds=None) -> "EdgeMatrix":
        return cls(np.full((n_genes, n_genes), float(value)), bounds)

    def clamp(self) -> "EdgeMatrix":
        if self.bounds is not None:
            np.clip(self.tau, self.bounds[0], self.bounds[1], out=self.tau)
        return self


def evaporate(matrix: EdgeMatrix, rho: float) -> EdgeMatrix:
    if not 0.0 < rho < 1.0:
        raise PheromoneError(f"evaporation rate must be in (0, 1), got {rho}")
    matrix.tau *= 1.0 - rho
    return matrix.clamp()


def tour_edges(tour: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Consecutive (from, to) pairs including the wrap edge."""
    t = np.asarray(tour, dtype=np.intp)
    return t, np.roll(t, -1)


def deposit_tour(matrix: EdgeMatrix, tour: Sequence[int], amount: float, symmetric: bool = False) -> EdgeMatrix:
    if not amount > 0:
        raise PheromoneError("deposit amount must be positive")
    src, dst = tour_edges(tour)
    np.add.at(matrix.tau, (src, dst), amount)
    if symmetric:
        np.add.at(matrix.tau, (dst, src), amount)
    return matrix.clamp()


def mmas_bounds(rho: float, best_quality: float, n_genes: int) -> tuple[float, float]:
    """Pheromone limits: tau_max = 1/(rho * C_gb), tau_min = tau_max / (2 n)."""
    tau_max = 1.0 / (rho * max(best_quality, 1e-12))
    return tau_max / (2.0 * n_genes), tau_max


def heuristic(travel: np.ndarray, beta: float) -> np.ndarray:
    """``(1/d) ** beta`` with d floored as in the kernels."""
    eta = 1.0 / np.maximum(travel, ETA_FLOOR)
    return eta if beta == 1.0 else eta ** beta


def selection_weights(matrix: EdgeMatrix, eta_beta: np.ndarray, alpha: float) -> np.ndarray:
    """Dense ``tau**alpha * eta**beta`` used by the matrix kernels."""
    tau = matrix.tau
    if alpha == 1.0:
        w = tau * eta_beta
    else:
        w = np.power(tau, alpha) * eta_beta
    return np.ascontiguousarray(w)


@dataclass
class PopulationView:
    """Read-only snapshot of every ant's l_best sequence and quality."""

    sequences: np.ndarray  # (n_ants, n_genes) int32
    qualities: np.ndarray  # (n_ants,)
    positions: np.ndarray = field(init=False)  # positions[a, g] = index of g in sequences[a]

    def __post_init__(self):
        self.sequences = np.ascontiguousarray(self.sequences, dtype=np.int32)
        self.qualities = np.asarray(self.qualities, dtype=float)
        n_ants, n = self.sequences.shape
        self.positions = np.empty_like(self.sequences)
        rows = np.arange(n_ants)[:, None]
        self.positions[rows, self.sequences] = np.arange(n, dtype=np.int32)[None, :]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Sequence[int], float]]) -> "PopulationView":
        pairs = list(pairs)
        return cls(np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))

    @property
    def g_best(self) -> float:
        return float(self.qualities.min())

    def deposits(self, alpha: float) -> np.ndarray:
        return relative_deposits(self.qualities, alpha)


def reconstruct_weights(pop: PopulationView, current: int, unvisited: Iterable[int], alpha: float) -> dict[int, float]:
    """Pheromone on the edges from ``current`` to each unvisited gene.

    Each ant contributes its relative deposit for the gene it visits right
    after ``current`` and for the gene right before it. Work is
    O(n_ants), independent of the number of genes.
    """
    unvisited = list(unvisited)
    if current in unvisited:
        raise PheromoneError("current gene cannot be unvisited")
    open_ = set(unvisited)
    after = dict.fromkeys(unvisited, 0.0)
    before = dict.fromkeys(unvisited, 0.0)
    deposits = pop.deposits(alpha)
    seqs, pos = pop.sequences, pop.positions
    n = seqs.shape[1]
    for a in range(seqs.shape[0]):
        k = pos[a, current]
        succ, pred = int(seqs[a, (k + 1) % n]), int(seqs[a, (k - 1) % n])
        if succ in open_:
            after[succ] += float(deposits[a])
        if pred in open_:
            before[pred] += float(deposits[a])
    return {g: after[g] + before[g] for g in unvisited}
