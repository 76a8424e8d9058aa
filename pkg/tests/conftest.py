import pytest

from fleetopt import _pykernels
from fleetopt.model import GeneratorSpec, GeoPoint, Instance, Job, Vehicle, generate_instance

try:
    from fleetopt import _ckernels
except ImportError:  # pure-Python install
    _ckernels = None

KERNELS = [_pykernels] + ([_ckernels] if _ckernels is not None else [])

ACCEPTANCE_LINES = []


@pytest.fixture(params=KERNELS, ids=lambda k: k.BACKEND)
def kernels(request):
    return request.param


@pytest.fixture
def tiny():
    """Two vehicles, five jobs, one windowed."""
    return generate_instance(GeneratorSpec(2, 5, window_fraction=0.2, seed=4))


def make_instance(n_vehicles, n_jobs, seed=0, window_fraction=0.1, **kw):
    return generate_instance(GeneratorSpec(n_vehicles, n_jobs, window_fraction=window_fraction, seed=seed, **kw))


def line_instance(km_list, service=30.0, windows=None):
    """One depot at the origin with jobs due north at the given distances."""
    from oracles import R_KM
    import math
    depot = GeoPoint(52.0, -1.9)
    jobs = []
    for k, km in enumerate(km_list):
        lat = depot.lat + math.degrees(km / R_KM)
        w = windows[k] if windows else None
        jobs.append(Job(f"J{k + 1}", GeoPoint(lat, depot.lon), service, w))
    return Instance((Vehicle("V1", depot),), tuple(jobs))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
