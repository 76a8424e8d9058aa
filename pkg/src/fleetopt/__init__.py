"""Fleet routing metaheuristics: Partial-ACO, MMAS and a steady-state GA."""
from fleetopt._backend import BACKEND
from fleetopt.baselines import GaConfig, MmasConfig, run_ga, run_mmas
from fleetopt.bench import brute_force, paper_suite, run_experiment, solve
from fleetopt.evaluation import QualityReport, company_baseline, decode, evaluate
from fleetopt.model import (
    GeneratorSpec,
    GeoPoint,
    Instance,
    InstanceError,
    Job,
    Solution,
    SolutionError,
    Vehicle,
    generate_instance,
    load_instance,
)
from fleetopt.paco import PacoConfig, run_paco

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "GaConfig", "GeneratorSpec", "GeoPoint", "Instance", "InstanceError", "Job", "MmasConfig",
    "PacoConfig", "QualityReport", "Solution", "SolutionError", "Vehicle", "brute_force", "company_baseline",
    "decode", "evaluate", "generate_instance", "load_instance", "paper_suite", "run_experiment", "run_ga",
    "run_mmas", "run_paco", "solve",
]
