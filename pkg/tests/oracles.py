"""Reference implementations used only by the tests.

Each is written from first principles, not from the package code, so a
shared mistake would have to be made twice.
"""
import itertools
import math

import numpy as np

R_KM = 6371.0


def chord_distance_km(lat1, lon1, lat2, lon2):
    """Great-circle distance via the 3-D chord between unit vectors."""
    def unit(lat, lon):
        la, lo = math.radians(lat), math.radians(lon)
        return np.array([math.cos(la) * math.cos(lo), math.cos(la) * math.sin(lo), math.sin(la)])
    chord = np.linalg.norm(unit(lat1, lon1) - unit(lat2, lon2))
    return 2.0 * R_KM * math.asin(min(1.0, chord / 2.0))


def point_one_km_north(lat, lon):
    """A point exactly 1 km due north along the meridian."""
    return lat + math.degrees(1.0 / R_KM), lon


def simulate(instance, order):
    """Straightforward Eq.-6 evaluator over an index sequence.

    Returns (s, L, per-vehicle list of (job, start, end) for serviced jobs).
    """
    nv = instance.n_vehicles
    n = len(order)
    travel = instance.travel
    v_at = [i for i, g in enumerate(order) if g < nv][0]
    rotated = list(order[v_at:]) + list(order[:v_at])
    routes = {v: [] for v in range(nv)}
    owner = None
    for g in rotated:
        if g < nv:
            owner = g
        else:
            routes[owner].append(g)
    s_total, L_total, schedule = 0.0, 0.0, {}
    for v in range(nv):
        here, t, moved, L, s = v, None, False, 0.0, 0.0
        schedule[v] = []
        for g in routes[v]:
            job = instance.jobs[g - nv]
            lo, hi = instance.day_start, instance.day_end
            if job.window:
                lo, hi = max(lo, job.window[0]), min(hi, job.window[1])
            arrive = lo if not moved else t + travel[here, g]
            begin = max(arrive, lo)
            if begin + job.service_minutes <= hi:
                L += travel[here, g]
                s += job.service_minutes
                t = begin + job.service_minutes
                here = g
                moved = True
                schedule[v].append((g, begin, t))
        if moved:
            L += travel[here, v]
        s_total += s
        L_total += L
    return s_total, L_total, schedule


def brute_force_single_vehicle(instance):
    """Minimum C over every ordering of the jobs behind the only vehicle."""
    assert instance.n_vehicles == 1
    S = instance.total_service
    best = math.inf
    for perm in itertools.permutations(range(1, instance.n_genes)):
        s, L, _ = simulate(instance, [0, *perm])
        best = min(best, (S - s + 1.0) * L)
    return best


# --- textbook permutation crossovers with explicit cut points -------------

def cx(a, b):
    n = len(a)
    child = [None] * n
    take_a = True
    while None in child:
        start = child.index(None)
        idx = start
        while True:
            child[idx] = a[idx] if take_a else b[idx]
            idx = a.index(b[idx])
            if idx == start:
                break
        take_a = not take_a
    return child


def ox(a, b, i, j):
    """Keep a[i..j]; write b's other genes in order starting after j, wrapping."""
    n = len(a)
    kept = a[i:j + 1]
    donor = [b[(j + 1 + k) % n] for k in range(n)]
    fill = [g for g in donor if g not in kept]
    child = [None] * n
    child[i:j + 1] = kept
    slots = [(j + 1 + k) % n for k in range(n - len(kept))]
    for slot, g in zip(slots, fill):
        child[slot] = g
    return child


def pmx(a, b, i, j):
    n = len(a)
    child = [None] * n
    child[i:j + 1] = a[i:j + 1]
    mapping = {a[k]: b[k] for k in range(i, j + 1)}
    for k in list(range(0, i)) + list(range(j + 1, n)):
        g = b[k]
        while g in mapping:
            g = mapping[g]
        child[k] = g
    return child


def matrix_weights(sequences, deposits, current, unvisited):
    """Deposit every tour (directed, wrap included) into a dense matrix and read both directions."""
    n = len(sequences[0])
    tau = np.zeros((n, n))
    for seq, amount in zip(sequences, deposits):
        for k in range(n):
            tau[seq[k], seq[(k + 1) % n]] += amount
    return {g: tau[current, g] + tau[g, current] for g in unvisited}
