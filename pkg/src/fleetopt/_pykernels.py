"""Reference (pure Python) implementation of the hot kernels.

Mirrors ``_ckernels.pyx`` statement for statement: both consume the same
doubles from each ant's bit generator in the same order, so runs are
bit-identical across backends.
"""
import math

import numpy as np

ETA_FLOOR = 1e-3  # minutes; keeps 1/d finite for co-located genes

BACKEND = "python"


def _powa(x, a):
    if a == 1.0:
        return x
    if a == 2.0:
        return x * x
    if a == 3.0:
        return x * x * x
    return math.pow(x, a)


def _eta(d, beta):
    e = 1.0 / (d if d > ETA_FLOOR else ETA_FLOOR)
    return e if beta == 1.0 else math.pow(e, beta)


def _index(u, n):
    k = int(u * n)
    return k if k < n else n - 1


def evaluate(prob, seq):
    """Return ``(s, L, C)`` for an index sequence; cyclic decoding."""
    nv = prob.n_vehicles
    travel, service, earliest, latest = prob.travel, prob.service, prob.earliest, prob.latest
    n = len(seq)
    vpos = [0] * nv
    for i in range(n):
        g = seq[i]
        if g < nv:
            vpos[g] = i
    missed = 0.0
    total = 0.0
    for v in range(nv):
        rm = 0.0
        rl = 0.0
        cur = v
        t = 0.0
        departed = False
        i = vpos[v] + 1
        if i == n:
            i = 0
        while seq[i] >= nv:
            g = seq[i]
            leg = travel[cur, g]
            if departed:
                start = t + leg
                if start < earliest[g]:
                    start = earliest[g]
            else:
                start = earliest[g]
            if start + service[g] <= latest[g]:
                rl += leg
                t = start + service[g]
                cur = g
                departed = True
            else:
                rm += service[g]
            i += 1
            if i == n:
                i = 0
        if departed:
            rl += travel[cur, v]
        missed += rm
        total += rl
    # s from the missed minutes so that full service gives s == S exactly
    s = prob.total_service - missed
    return s, total, (prob.total_service - s + 1.0) * total


def _retention(n, max_modify, escape_prob, draw):
    """Draw ``(start, keep)`` for a partial rebuild of an ``n``-gene tour."""
    start = _index(draw(), n)
    escape = draw() < escape_prob
    lo = 0 if escape else int(math.ceil((1.0 - max_modify) * n - 1e-9))
    if lo > n - 1:
        lo = n - 1
    if lo < 0:
        lo = 0
    keep = lo + _index(draw(), n - lo)
    return start, keep


class _Tour:
    """Scratch state for one construction: child prefix plus unvisited set."""

    def __init__(self, n):
        self.unv = list(range(n))
        self.where = list(range(n))
        self.m = n
        self.visited = [False] * n

    def remove(self, g):
        k = self.where[g]
        last = self.unv[self.m - 1]
        self.unv[k] = last
        self.where[last] = k
        self.m -= 1
        self.visited[g] = True


def _roulette(cands, weights, count, u):
    total = 0.0
    for k in range(count):
        total += weights[k]
    if not (total > 0.0) or total == math.inf:
        return -1
    target = u * total
    acc = 0.0
    choice = -1
    for k in range(count):
        w = weights[k]
        if w > 0.0:
            choice = cands[k]
            acc += w
            if acc > target:
                break
    return choice


def _fallback(tour, travel, c, beta, u):
    """Heuristic-only choice when every pheromone weight is zero."""
    m = tour.m
    weights = [_eta(travel[c, tour.unv[k]], beta) for k in range(m)]
    g = _roulette(tour.unv, weights, m, u)
    return tour.unv[_index(u, m)] if g < 0 else g


def _start(child, lbest, n, nv, full, max_modify, escape_prob, draw, tour):
    if full:
        keep = 0
    else:
        start, keep = _retention(n, max_modify, escape_prob, draw)
        for i in range(keep):
            g = lbest[(start + i) % n]
            child[i] = g
            tour.remove(g)
    if keep == 0:
        v = _index(draw(), nv)
        child[0] = v
        tour.remove(v)
        return keep, 1
    return keep, keep


def build_sparse(prob, lbests, pop, pos, deposits, children, lo, hi, rngs, alpha, beta,
                 max_modify, escape_prob, full, quals, decisions, comparisons):
    """Matrix-free construction for ants ``lo..hi-1``.

    Pheromone on edge (c, g) is rebuilt from the population: every member
    whose sequence has g right after or right before c adds its deposit.
    """
    nv = prob.n_vehicles
    travel = prob.travel
    n = children.shape[1]
    n_pop = pop.shape[0]
    fwd = [0.0] * n
    bwd = [0.0] * n
    mark = [False] * n
    for a in range(lo, hi):
        draw = rngs[a].random
        tour = _Tour(n)
        child = children[a]
        lbest = lbests[a] if not full else None
        keep, p = _start(child, lbest, n, nv, full, max_modify, escape_prob, draw, tour)
        n_dec = n - keep
        n_cmp = 0
        visited = tour.visited
        while p < n:
            c = child[p - 1]
            u = draw()
            n_cmp += tour.m
            touched = []
            for b in range(n_pop):
                q = pos[b, c]
                dep = deposits[b]
                succ = pop[b, q + 1 if q + 1 < n else 0]
                pred = pop[b, q - 1 if q > 0 else n - 1]
                if not visited[succ]:
                    if not mark[succ]:
                        mark[succ] = True
                        touched.append(succ)
                    fwd[succ] += dep
                if not visited[pred]:
                    if not mark[pred]:
                        mark[pred] = True
                        touched.append(pred)
                    bwd[pred] += dep
            weights = []
            for g in touched:
                weights.append(_powa(fwd[g] + bwd[g], alpha) * _eta(travel[c, g], beta))
                fwd[g] = 0.0
                bwd[g] = 0.0
                mark[g] = False
            g = _roulette(touched, weights, len(touched), u)
            if g < 0:
                g = _fallback(tour, travel, c, beta, u)
            child[p] = g
            tour.remove(g)
            p += 1
        quals[a] = evaluate(prob, child)[2]
        decisions[a] = n_dec
        comparisons[a] = n_cmp


def build_dense(prob, weights, lbests, children, lo, hi, rngs, beta,
                max_modify, escape_prob, full, quals, decisions, comparisons):
    """Construction from a precomputed ``tau**alpha * eta**beta`` matrix."""
    nv = prob.n_vehicles
    travel = prob.travel
    n = children.shape[1]
    for a in range(lo, hi):
        draw = rngs[a].random
        tour = _Tour(n)
        child = children[a]
        lbest = lbests[a] if not full else None
        keep, p = _start(child, lbest, n, nv, full, max_modify, escape_prob, draw, tour)
        n_dec = n - keep
        n_cmp = 0
        while p < n:
            c = child[p - 1]
            u = draw()
            m = tour.m
            n_cmp += m
            row = weights[c]
            g = _roulette(tour.unv, [row[tour.unv[k]] for k in range(m)], m, u)
            if g < 0:
                g = _fallback(tour, travel, c, beta, u)
            child[p] = g
            tour.remove(g)
            p += 1
        quals[a] = evaluate(prob, child)[2]
        decisions[a] = n_dec
        comparisons[a] = n_cmp


# --- permutation operators ------------------------------------------------

def _cut(n, draw):
    i = _index(draw(), n)
    j = _index(draw(), n)
    return (i, j) if i <= j else (j, i)


def _crossover_cx(a, b, draw=None):
    n = len(a)
    child = [0] * n
    posa = [0] * n
    for i in range(n):
        posa[a[i]] = i
    done = [False] * n
    cycle = 0
    for first in range(n):
        if done[first]:
            continue
        src = a if cycle % 2 == 0 else b
        i = first
        while not done[i]:
            done[i] = True
            child[i] = src[i]
            i = posa[b[i]]
        cycle += 1
    return child


def _crossover_ox(a, b, draw):
    n = len(a)
    i, j = _cut(n, draw)
    child = [0] * n
    used = [False] * n
    for k in range(i, j + 1):
        child[k] = a[k]
        used[a[k]] = True
    k = j + 1
    r = j + 1
    for _ in range(n - (j - i + 1)):
        if r >= n:
            r -= n
        while used[b[r]]:
            r += 1
            if r >= n:
                r -= n
        if k >= n:
            k -= n
        child[k] = b[r]
        used[b[r]] = True
        k += 1
        r += 1
    return child


def _crossover_pmx(a, b, draw):
    n = len(a)
    i, j = _cut(n, draw)
    child = [0] * n
    posa = [0] * n
    inseg = [False] * n
    for k in range(n):
        posa[a[k]] = k
    for k in range(i, j + 1):
        child[k] = a[k]
        inseg[a[k]] = True
    for k in range(n):
        if i <= k <= j:
            continue
        x = b[k]
        while inseg[x]:
            x = b[posa[x]]
        child[k] = x
    return child


def _mutate_swap(seq, draw):
    n = len(seq)
    i = _index(draw(), n)
    j = _index(draw(), n)
    seq[i], seq[j] = seq[j], seq[i]
    return seq


def _mutate_reverse(seq, draw):
    i, j = _cut(len(seq), draw)
    while i < j:
        seq[i], seq[j] = seq[j], seq[i]
        i += 1
        j -= 1
    return seq


def _mutate_insert(seq, draw):
    n = len(seq)
    i = _index(draw(), n)
    j = _index(draw(), n)
    g = seq[i]
    if i < j:
        for k in range(i, j):
            seq[k] = seq[k + 1]
    else:
        for k in range(i, j, -1):
            seq[k] = seq[k - 1]
    seq[j] = g
    return seq


CROSSOVERS = (_crossover_cx, _crossover_ox, _crossover_pmx)
MUTATIONS = (_mutate_swap, _mutate_reverse, _mutate_insert)


def retention(n, max_modify, escape_prob, rng):
    return _retention(n, max_modify, escape_prob, rng.random)


def crossover_cx(a, b, rng=None):
    return _crossover_cx(list(a), list(b))


def crossover_ox(a, b, rng):
    return _crossover_ox(list(a), list(b), rng.random)


def crossover_pmx(a, b, rng):
    return _crossover_pmx(list(a), list(b), rng.random)


def mutate_swap(seq, rng):
    return _mutate_swap(list(seq), rng.random)


def mutate_reverse(seq, rng):
    return _mutate_reverse(list(seq), rng.random)


def mutate_insert(seq, rng):
    return _mutate_insert(list(seq), rng.random)


def _tournament(quals, size, draw):
    npop = len(quals)
    best = _index(draw(), npop)
    for _ in range(size - 1):
        k = _index(draw(), npop)
        if quals[k] < quals[best]:
            best = k
    return best


def ga_steps(prob, pop, quals, n_steps, rng, tournament_size, crossover_prob, mutation_prob):
    """Run ``n_steps`` steady-state steps in place; returns replacements made."""
    draw = rng.random
    replaced = 0
    for _ in range(n_steps):
        p1 = _tournament(quals, tournament_size, draw)
        p2 = _tournament(quals, tournament_size, draw)
        a = pop[p1].tolist()
        b = pop[p2].tolist()
        if draw() < crossover_prob:
            child = CROSSOVERS[_index(draw(), 3)](a, b, draw)
        else:
            child = a if quals[p1] <= quals[p2] else b
        if draw() < mutation_prob:
            MUTATIONS[_index(draw(), 3)](child, draw)
        cq = evaluate(prob, child)[2]
        if p1 == p2:
            worse = p1
        else:
            worse = p1 if quals[p1] > quals[p2] else p2
        if cq < quals[worse]:
            pop[worse] = np.asarray(child, dtype=pop.dtype)
            quals[worse] = cq
            replaced += 1
    return replaced
