"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--jobs 120] [--vehicles 12] [--repeat 3]

Each kernel runs on identical inputs and RNG streams for both backends,
and the script checks that the outputs agree before reporting times.
"""
import argparse
import time

import numpy as np

from fleetopt import _pykernels
from fleetopt.model import GeneratorSpec, generate_instance
from fleetopt.paco import ant_streams, positions_of
from fleetopt.pheromone import EdgeMatrix, heuristic, relative_deposits, selection_weights

try:
    from fleetopt import _ckernels
except ImportError:
    _ckernels = None


def cases(inst, n_ants):
    prob, n = inst.arrays, inst.n_genes
    rng = np.random.default_rng(0)
    pop = np.array([rng.permutation(n) for _ in range(n_ants)], dtype=np.int32)
    quals = np.array([_pykernels.evaluate(prob, p)[2] for p in pop])
    deposits = relative_deposits(quals, 3.0)
    pos = positions_of(pop)
    weights = selection_weights(EdgeMatrix(rng.uniform(0.1, 2.0, (n, n))), heuristic(inst.travel, 1.0), 1.0)
    orders = [rng.permutation(n).astype(np.int32) for _ in range(200)]

    def buffers():
        return (np.zeros((n_ants, n), dtype=np.int32), np.empty(n_ants),
                np.zeros(n_ants, dtype=np.int64), np.zeros(n_ants, dtype=np.int64))

    def evaluate(k):
        return [k.evaluate(prob, o) for o in orders]

    def sparse(k):
        children, q, d, c = buffers()
        k.build_sparse(prob, pop, pop, pos, deposits, children, 0, n_ants, ant_streams(1, n_ants),
                       3.0, 1.0, 0.5, 0.001, False, q, d, c)
        return children, q

    def dense(k):
        children, q, d, c = buffers()
        k.build_dense(prob, weights, pop, children, 0, n_ants, ant_streams(2, n_ants),
                      1.0, 1.0, 0.0, True, q, d, c)
        return children, q

    def ga(k):
        p, q = pop.copy(), quals.copy()
        k.ga_steps(prob, p, q, 2000, np.random.default_rng(3), 5, 0.5, 0.5)
        return p, q

    return {"evaluate x200": evaluate, "build_sparse cap 0.5": sparse,
            "build_dense full": dense, "ga_steps x2000": ga}


def same(a, b):
    if isinstance(a, (list, tuple)):
        return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--vehicles", type=int, default=12)
    ap.add_argument("--jobs", type=int, default=120)
    ap.add_argument("--ants", type=int, default=32)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _ckernels is None:
        raise SystemExit("compiled kernels not built; run `pip install -e . --no-build-isolation` first")
    inst = generate_instance(GeneratorSpec(args.vehicles, args.jobs, seed=0))
    print(f"instance: {args.vehicles} vehicles, {args.jobs} jobs; best of {args.repeat}")
    print(f"{'kernel':<22}{'python s':>11}{'cython s':>11}{'speedup':>9}")
    for name, fn in cases(inst, args.ants).items():
        if not same(fn(_pykernels), fn(_ckernels)):
            raise SystemExit(f"{name}: backends disagree")
        tp = best_time(lambda: fn(_pykernels), args.repeat)
        tc = best_time(lambda: fn(_ckernels), args.repeat)
        print(f"{name:<22}{tp:>11.4f}{tc:>11.4f}{tp / tc:>8.1f}x")


if __name__ == "__main__":
    main()
