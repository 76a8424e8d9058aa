"""Fleet instances: depots, jobs, travel times and the gene encoding.

Genes are addressed internally by integer index: vehicles occupy
``0 .. n_vehicles - 1`` and jobs ``n_vehicles .. n_genes - 1``, in instance
order. A vehicle gene's location is its depot.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np

EARTH_RADIUS_KM = 6371.0
DEFAULT_SPEED_KPH = 13.0
DAY_START = 480.0
DAY_END = 1140.0

# Default generator area: roughly 17 x 17 km around Birmingham, UK.
BIRMINGHAM_BBOX = (52.40, -2.00, 52.55, -1.75)


class InstanceError(ValueError):
    """Raised for malformed or infeasible instance data."""


class SolutionError(ValueError):
    """Raised when a gene sequence is not a valid permutation."""


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        lat, lon = float(self.lat), float(self.lon)
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise InstanceError(f"non-finite coordinate ({self.lat}, {self.lon})")
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            raise InstanceError(f"coordinate out of range ({lat}, {lon})")
        object.__setattr__(self, "lat", lat)
        object.__setattr__(self, "lon", lon)


@dataclass(frozen=True)
class Job:
    id: str
    location: GeoPoint
    service_minutes: float
    window: Optional[tuple[float, float]] = None

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        service = float(self.service_minutes)
        if not (math.isfinite(service) and service > 0):
            raise InstanceError(f"job {self.id}: service_minutes must be positive, got {self.service_minutes}")
        object.__setattr__(self, "service_minutes", service)
        if self.window is not None:
            start, end = (float(v) for v in self.window)
            if not (math.isfinite(start) and math.isfinite(end)) or start >= end:
                raise InstanceError(f"job {self.id}: window {self.window} is empty")
            object.__setattr__(self, "window", (start, end))


@dataclass(frozen=True)
class Vehicle:
    id: str
    depot: GeoPoint

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))


class Gene(NamedTuple):
    kind: str  # "V" or "J"
    id: str

    def __str__(self):
        return f"{self.kind}:{self.id}"

    @classmethod
    def parse(cls, text: str) -> "Gene":
        kind, sep, ident = str(text).partition(":")
        if not sep or kind not in ("V", "J") or not ident:
            raise SolutionError(f"bad gene string {text!r}")
        return cls(kind, ident)


def V(ident) -> Gene:
    return Gene("V", str(ident))


def J(ident) -> Gene:
    return Gene("J", str(ident))


@dataclass(frozen=True)
class Solution:
    genes: tuple[Gene, ...]

    def __post_init__(self):
        object.__setattr__(self, "genes", tuple(self.genes))

    def __len__(self):
        return len(self.genes)

    def to_json(self) -> list[str]:
        return [str(g) for g in self.genes]

    @classmethod
    def from_json(cls, items: Sequence[str]) -> "Solution":
        return cls(tuple(Gene.parse(s) for s in items))


def travel_time(a: GeoPoint, b: GeoPoint, speed_kph: float = DEFAULT_SPEED_KPH) -> float:
    """Great-circle driving time in minutes between two points."""
    if not speed_kph > 0:
        raise InstanceError(f"speed_kph must be positive, got {speed_kph}")
    for p in (a, b):
        if not (math.isfinite(p.lat) and math.isfinite(p.lon)):
            raise InstanceError(f"non-finite coordinate {p}")
    lat1, lon1, lat2, lon2 = map(math.radians, (a.lat, a.lon, b.lat, b.lon))
    h = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    km = 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))
    return km / speed_kph * 60.0


@dataclass(frozen=True)
class Instance:
    vehicles: tuple[Vehicle, ...]
    jobs: tuple[Job, ...]
    speed_kph: float = DEFAULT_SPEED_KPH
    day_start: float = DAY_START
    day_end: float = DAY_END
    total_service: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "vehicles", tuple(self.vehicles))
        object.__setattr__(self, "jobs", tuple(self.jobs))
        object.__setattr__(self, "speed_kph", float(self.speed_kph))
        object.__setattr__(self, "day_start", float(self.day_start))
        object.__setattr__(self, "day_end", float(self.day_end))
        if not self.vehicles:
            raise InstanceError("instance needs at least one vehicle")
        if not (math.isfinite(self.speed_kph) and self.speed_kph > 0):
            raise InstanceError(f"speed_kph must be positive, got {self.speed_kph}")
        if not self.day_start < self.day_end:
            raise InstanceError("day_start must precede day_end")
        seen = set()
        for ident in [v.id for v in self.vehicles] + [j.id for j in self.jobs]:
            if ident in seen:
                raise InstanceError(f"duplicate id {ident!r}")
            seen.add(ident)
        for job in self.jobs:
            lo, hi = self.service_bounds(job)
            if lo + job.service_minutes > hi:
                raise InstanceError(
                    f"job {job.id}: {job.service_minutes:g} min of service cannot fit in "
                    f"[{lo:g}, {hi:g}] (window intersected with the working day)"
                )
        total = 0.0
        for job in self.jobs:
            total += job.service_minutes
        object.__setattr__(self, "total_service", total)

    def service_bounds(self, job: Job) -> tuple[float, float]:
        """Earliest start and latest finish allowed for ``job``."""
        lo, hi = self.day_start, self.day_end
        if job.window is not None:
            lo, hi = max(lo, job.window[0]), min(hi, job.window[1])
        return lo, hi

    @property
    def n_vehicles(self) -> int:
        return len(self.vehicles)

    @property
    def n_jobs(self) -> int:
        return len(self.jobs)

    @property
    def n_genes(self) -> int:
        return len(self.vehicles) + len(self.jobs)

    @cached_property
    def genes(self) -> tuple[Gene, ...]:
        return tuple(V(v.id) for v in self.vehicles) + tuple(J(j.id) for j in self.jobs)

    @cached_property
    def gene_index(self) -> dict[Gene, int]:
        return {g: i for i, g in enumerate(self.genes)}

    @cached_property
    def locations(self) -> tuple[GeoPoint, ...]:
        return tuple(v.depot for v in self.vehicles) + tuple(j.location for j in self.jobs)

    @cached_property
    def travel(self) -> np.ndarray:
        """Gene-by-gene travel minutes, built from :func:`travel_time`."""
        locs = self.locations
        n = len(locs)
        out = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                out[i, j] = out[j, i] = travel_time(locs[i], locs[j], self.speed_kph)
        out.setflags(write=False)
        return out

    @cached_property
    def arrays(self) -> "ProblemArrays":
        nv = self.n_vehicles
        service = np.zeros(self.n_genes)
        earliest = np.zeros(self.n_genes)
        latest = np.zeros(self.n_genes)
        for k, job in enumerate(self.jobs):
            service[nv + k] = job.service_minutes
            earliest[nv + k], latest[nv + k] = self.service_bounds(job)
        return ProblemArrays(nv, self.travel, service, earliest, latest, self.total_service)

    def to_indices(self, solution: Solution) -> np.ndarray:
        problems = validate_solution(self, solution)
        if problems:
            raise SolutionError("; ".join(str(p) for p in problems))
        index = self.gene_index
        return np.fromiter((index[g] for g in solution.genes), dtype=np.int32, count=len(solution.genes))

    def from_indices(self, order: Sequence[int]) -> Solution:
        genes = self.genes
        return Solution(tuple(genes[int(i)] for i in order))


class ProblemArrays(NamedTuple):
    """Flat gene-indexed arrays consumed by the numeric kernels."""

    n_vehicles: int
    travel: np.ndarray
    service: np.ndarray
    earliest: np.ndarray
    latest: np.ndarray
    total_service: float


class Violation(NamedTuple):
    kind: str  # "missing", "duplicate", "foreign" or "no-vehicle"
    gene: Optional[Gene]

    def __str__(self):
        return f"{self.kind}: {self.gene}" if self.gene is not None else self.kind


def validate_solution(instance: Instance, solution: Solution) -> list[Violation]:
    """List every way ``solution`` fails to be a permutation of the instance genes."""
    known = instance.gene_index
    counts: dict[Gene, int] = {}
    out = []
    for g in solution.genes:
        if g not in known:
            out.append(Violation("foreign", g))
            continue
        counts[g] = counts.get(g, 0) + 1
        if counts[g] == 2:
            out.append(Violation("duplicate", g))
    for g in instance.genes:
        if g not in counts:
            out.append(Violation("missing", g))
    if not any(g.kind == "V" for g in solution.genes):
        out.append(Violation("no-vehicle", None))
    return out


# --- JSON ----------------------------------------------------------------

def instance_to_dict(instance: Instance) -> dict:
    return {
        "speed_kph": instance.speed_kph,
        "day_start_min": instance.day_start,
        "day_end_min": instance.day_end,
        "vehicles": [{"id": v.id, "lat": v.depot.lat, "lon": v.depot.lon} for v in instance.vehicles],
        "jobs": [
            {
                "id": j.id,
                "lat": j.location.lat,
                "lon": j.location.lon,
                "service_min": j.service_minutes,
                "window": list(j.window) if j.window is not None else None,
            }
            for j in instance.jobs
        ],
    }


def dump_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=1)


def load_instance(text) -> Instance:
    """Parse and validate an instance from JSON text or bytes."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise InstanceError("top level must be an object")
    for key in ("vehicles", "jobs"):
        if not isinstance(doc.get(key), list):
            raise InstanceError(f"missing array {key!r}")

    def num(obj, key, where, default=None):
        value = obj.get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InstanceError(f"{where}: {key!r} must be a number")
        return float(value)

    def ident(obj, where):
        value = obj.get("id")
        if isinstance(value, bool) or not isinstance(value, (str, int)) or str(value) == "":
            raise InstanceError(f"{where}: missing or bad 'id'")
        return str(value)

    vehicles = []
    for i, item in enumerate(doc["vehicles"]):
        if not isinstance(item, dict):
            raise InstanceError(f"vehicle #{i}: expected object")
        vid = ident(item, f"vehicle #{i}")
        where = f"vehicle {vid}"
        vehicles.append(Vehicle(vid, GeoPoint(num(item, "lat", where), num(item, "lon", where))))
    jobs = []
    for i, item in enumerate(doc["jobs"]):
        if not isinstance(item, dict):
            raise InstanceError(f"job #{i}: expected object")
        jid = ident(item, f"job #{i}")
        where = f"job {jid}"
        window = item.get("window")
        if window is not None:
            if not (isinstance(window, list) and len(window) == 2
                    and all(isinstance(w, (int, float)) and not isinstance(w, bool) for w in window)):
                raise InstanceError(f"{where}: window must be [start_min, end_min] or null")
            window = (float(window[0]), float(window[1]))
        jobs.append(Job(jid, GeoPoint(num(item, "lat", where), num(item, "lon", where)),
                        num(item, "service_min", where), window))
    return Instance(
        tuple(vehicles),
        tuple(jobs),
        speed_kph=num(doc, "speed_kph", "instance", DEFAULT_SPEED_KPH),
        day_start=num(doc, "day_start_min", "instance", DAY_START),
        day_end=num(doc, "day_end_min", "instance", DAY_END),
    )


# --- synthetic generator -------------------------------------------------

@dataclass(frozen=True)
class GeneratorSpec:
    n_vehicles: int
    n_jobs: int
    bbox: tuple[float, float, float, float] = BIRMINGHAM_BBOX  # lat_min, lon_min, lat_max, lon_max
    service_minutes_range: tuple[float, float] = (15.0, 90.0)
    window_fraction: float = 0.1
    target_total_service: Optional[float] = None
    seed: int = 0
    window_width_range: tuple[float, float] = (120.0, 300.0)

    def __post_init__(self):
        if self.n_vehicles < 1 or self.n_jobs < 1:
            raise InstanceError("generator counts must be positive")
        if not 0.0 <= self.window_fraction <= 1.0:
            raise InstanceError("window_fraction must be in [0, 1]")
        lat0, lon0, lat1, lon1 = self.bbox
        if not (lat0 < lat1 and lon0 < lon1):
            raise InstanceError(f"empty bounding box {self.bbox}")
        lo, hi = self.service_minutes_range
        if not 0 < lo <= hi:
            raise InstanceError(f"bad service range {self.service_minutes_range}")
        if self.target_total_service is not None and not self.target_total_service > 0:
            raise InstanceError("target_total_service must be positive")
        wlo, whi = self.window_width_range
        if not 0 < wlo <= whi:
            raise InstanceError(f"bad window width range {self.window_width_range}")


def generate_instance(spec: GeneratorSpec) -> Instance:
    """Uniform random depots and jobs in ``spec.bbox``; deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    lat0, lon0, lat1, lon1 = spec.bbox
    day_start, day_end = DAY_START, DAY_END

    depots = rng.uniform((lat0, lon0), (lat1, lon1), size=(spec.n_vehicles, 2))
    sites = rng.uniform((lat0, lon0), (lat1, lon1), size=(spec.n_jobs, 2))
    service = rng.uniform(*spec.service_minutes_range, size=spec.n_jobs)
    if spec.target_total_service is not None:
        service *= spec.target_total_service / service.sum()
    service = np.maximum(np.round(service, 1), 1.0)
    if service.max() > day_end - day_start:
        raise InstanceError("generated service time exceeds the working day")
    windowed = rng.random(spec.n_jobs) < spec.window_fraction
    widths = rng.uniform(*spec.window_width_range, size=spec.n_jobs)
    offsets = rng.random(spec.n_jobs)

    vehicles = tuple(
        Vehicle(f"V{i + 1}", GeoPoint(round(lat, 6), round(lon, 6))) for i, (lat, lon) in enumerate(depots)
    )
    jobs = []
    for k in range(spec.n_jobs):
        window = None
        if windowed[k]:
            width = min(max(widths[k], service[k] + 30.0), day_end - day_start)
            start = day_start + offsets[k] * (day_end - day_start - width)
            start = math.floor(start / 5.0) * 5.0
            window = (start, start + math.ceil(width / 5.0) * 5.0)
            if window[1] > day_end:
                window = (day_end - math.ceil(width / 5.0) * 5.0, day_end)
        lat, lon = sites[k]
        jobs.append(Job(f"J{k + 1}", GeoPoint(round(lat, 6), round(lon, 6)), float(service[k]), window))
    return Instance(vehicles, tuple(jobs))
