"""Route simulation, schedule quality and the company-style baseline."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from fleetopt.model import Instance, Job, Solution, SolutionError, Vehicle, validate_solution


@dataclass(frozen=True)
class RouteReport:
    vehicle: str
    visited: tuple[str, ...]
    serviced: tuple[str, ...]
    missed: tuple[str, ...]
    depart_time: Optional[float]
    return_time: Optional[float]
    traversal_minutes: float
    serviced_minutes: float
    missed_minutes: float = 0.0
    starts: tuple[float, ...] = ()  # service start of each serviced job

    def to_dict(self) -> dict:
        return {
            "vehicle": self.vehicle,
            "visited": list(self.visited),
            "serviced": list(self.serviced),
            "missed": list(self.missed),
            "depart_min": self.depart_time,
            "return_min": self.return_time,
            "traversal_min": self.traversal_minutes,
            "start_min": list(self.starts),
        }


@dataclass(frozen=True)
class QualityReport:
    s: float  # serviced job minutes
    L: float  # fleet traversal minutes
    C: float  # (S - s + 1) * L
    S: float
    routes: tuple[RouteReport, ...] = ()

    @property
    def fully_serviced(self) -> Optional[bool]:
        """True when no job was missed; None for a report without routes."""
        if not self.routes:
            return None
        return not any(r.missed for r in self.routes)

    @property
    def serviced_fraction(self) -> float:
        return self.s / self.S if self.S > 0 else 1.0

    def to_dict(self) -> dict:
        return {
            "s_min": self.s,
            "L_min": self.L,
            "C": self.C,
            "serviced_pct": 100.0 * self.serviced_fraction,
            "routes": [r.to_dict() for r in self.routes],
        }


def quality(total_service: float, s: float, L: float) -> float:
    return (total_service - s + 1.0) * L


def decode_indices(n_vehicles: int, order: Sequence[int]) -> list[list[int]]:
    """Cyclic decode of an index sequence into one job list per vehicle."""
    n = len(order)
    routes: list[list[int]] = [[] for _ in range(n_vehicles)]
    first = next((i for i, g in enumerate(order) if g < n_vehicles), None)
    if first is None:
        raise SolutionError("sequence has no vehicle gene")
    owner = order[first]
    for k in range(1, n + 1):
        g = order[(first + k) % n]
        if g < n_vehicles:
            owner = g
        else:
            routes[owner].append(g)
    return routes


def decode(instance: Instance, solution: Solution) -> dict[str, list[str]]:
    """Map each vehicle id to the ordered job ids it owns.

    Each vehicle gene owns the job genes after it up to the next vehicle
    gene, wrapping from the end of the sequence to the front.
    """
    order = instance.to_indices(solution)
    nv = instance.n_vehicles
    routes = decode_indices(nv, order.tolist())
    return {
        v.id: [instance.jobs[g - nv].id for g in routes[i]]
        for i, v in enumerate(instance.vehicles)
    }


def simulate_route(instance: Instance, vehicle: Vehicle, jobs: Sequence[Job]) -> RouteReport:
    """Drive ``jobs`` in order from the vehicle's depot.

    A job that cannot start and finish inside its window and the working
    day is skipped without driving to it. The first leg may start before
    the day opens; the return leg may end after it closes.
    """
    index = instance.gene_index
    travel = instance.travel
    here = index[("V", vehicle.id)]
    home = here
    t = 0.0
    departed = False
    depart = None
    legs = 0.0
    done = 0.0
    lost = 0.0
    serviced, missed, starts = [], [], []
    for job in jobs:
        g = index[("J", job.id)]
        lo, hi = instance.service_bounds(job)
        leg = float(travel[here, g])
        start = max(t + leg, lo) if departed else lo
        if start + job.service_minutes <= hi:
            if not departed:
                depart = start - leg
            done += job.service_minutes
            legs += leg
            t = start + job.service_minutes
            here = g
            departed = True
            serviced.append(job.id)
            starts.append(start)
        else:
            lost += job.service_minutes
            missed.append(job.id)
    back = None
    if departed:
        home_leg = float(travel[here, home])
        legs += home_leg
        back = t + home_leg
    return RouteReport(
        vehicle=vehicle.id,
        visited=tuple(j.id for j in jobs),
        serviced=tuple(serviced),
        missed=tuple(missed),
        depart_time=depart,
        return_time=back,
        traversal_minutes=legs,
        serviced_minutes=done,
        missed_minutes=lost,
        starts=tuple(starts),
    )


def evaluate(instance: Instance, solution: Solution) -> QualityReport:
    order = instance.to_indices(solution)
    return evaluate_indices(instance, order)


def evaluate_indices(instance: Instance, order: Sequence[int]) -> QualityReport:
    nv = instance.n_vehicles
    routes = decode_indices(nv, [int(g) for g in order])
    reports = []
    missed = 0.0
    L = 0.0
    for v, vehicle in enumerate(instance.vehicles):
        r = simulate_route(instance, vehicle, [instance.jobs[g - nv] for g in routes[v]])
        reports.append(r)
        missed += r.missed_minutes
        L += r.traversal_minutes
    S = instance.total_service
    s = S - missed  # exact S when nothing is missed
    return QualityReport(s=s, L=L, C=quality(S, s, L), S=S, routes=tuple(reports))


# --- company-style baseline ----------------------------------------------

def company_baseline(instance: Instance) -> Solution:
    """Emulate the incumbent geographic schedule.

    Jobs go to the nearest depot unless that vehicle already carries its
    fair share (S / n_vehicles) of service time, in which case the next
    nearest under-loaded depot takes them. Each route visits the job
    furthest from its depot first and then repeatedly the nearest remaining
    job. Time-windowed jobs are then moved to the earliest position where
    the route simulation services them.
    """
    nv = instance.n_vehicles
    travel = instance.travel
    share = instance.total_service / nv
    load = [0.0] * nv
    assigned: list[list[int]] = [[] for _ in range(nv)]
    for k, job in enumerate(instance.jobs):
        g = nv + k
        ranked = sorted(range(nv), key=lambda v: (travel[v, g], v))
        chosen = next((v for v in ranked if load[v] < share), ranked[0])
        assigned[chosen].append(g)
        load[chosen] += job.service_minutes

    order: list[int] = []
    for v in range(nv):
        route = _furthest_first(travel, v, assigned[v])
        route = _place_windowed(instance, v, route)
        order.append(v)
        order.extend(route)
    return instance.from_indices(order)


def _furthest_first(travel: np.ndarray, depot: int, jobs: list[int]) -> list[int]:
    if not jobs:
        return []
    remaining = list(jobs)
    first = max(remaining, key=lambda g: (travel[depot, g], -g))
    route = [first]
    remaining.remove(first)
    while remaining:
        here = route[-1]
        nxt = min(remaining, key=lambda g: (travel[here, g], g))
        route.append(nxt)
        remaining.remove(nxt)
    return route


def _route_service(instance: Instance, v: int, route: list[int]) -> tuple[float, set[int]]:
    nv = instance.n_vehicles
    report = simulate_route(instance, instance.vehicles[v], [instance.jobs[g - nv] for g in route])
    done = {instance.gene_index[("J", j)] for j in report.serviced}
    return report.serviced_minutes, done


def _place_windowed(instance: Instance, v: int, route: list[int]) -> list[int]:
    nv = instance.n_vehicles
    windowed = [g for g in route if instance.jobs[g - nv].window is not None]
    windowed.sort(key=lambda g: (instance.jobs[g - nv].window[0], g))
    for g in windowed:
        rest = [x for x in route if x != g]
        best = None
        best_minutes = -1.0
        for slot in range(len(rest) + 1):
            trial = rest[:slot] + [g] + rest[slot:]
            minutes, done = _route_service(instance, v, trial)
            if g in done and minutes > best_minutes:
                best, best_minutes = trial, minutes
        if best is not None:
            route = best
    return route
