"""Two-phase simulated annealing for multi-depot drone pickup and delivery."""

from .allocation import AllocationScheme, OperatorKind, apply_operator, initial_allocate, ivnd
from .instances import GenParams, builtin_suite, generate, load_instance, save_instance
from .model import (
    Depot, DroneSpec, Instance, Leg, Location, ObjectiveWeights, RoutePattern, Schedule,
    Sortie, Task, TaskKind, distance, effective_range, leg_feasible, objective,
    payload_penalty, validate_schedule,
)
from .oracle import brute_force_oracle
from .routing import erpa, local_search, repair
from .solver import SaConfig, SolverReport, Variant, metropolis_accept, solve, solve_variant

__all__ = [
    "AllocationScheme", "Depot", "DroneSpec", "GenParams", "Instance", "Leg", "Location",
    "ObjectiveWeights", "OperatorKind", "RoutePattern", "SaConfig", "Schedule", "SolverReport",
    "Sortie", "Task", "TaskKind", "Variant", "apply_operator", "brute_force_oracle",
    "builtin_suite", "distance", "effective_range", "erpa", "generate", "initial_allocate",
    "ivnd", "leg_feasible", "load_instance", "local_search", "metropolis_accept", "objective",
    "payload_penalty", "repair", "save_instance", "solve", "solve_variant", "validate_schedule",
]

__version__ = "0.1.0"
