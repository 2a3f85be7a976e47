"""Simulated-annealing outer loop over the two phases.

Each temperature step runs ``L`` reallocation moves (see ``allocation.ivnd``),
then one sortie-merging local search accepted only on strict improvement,
then cools geometrically. The best schedule ever seen is reported.
"""

from __future__ import annotations

import enum
import random
import time
from dataclasses import dataclass, field
from typing import Callable

from .allocation import (
    AllocationScheme, initial_allocate, ivnd, metropolis_accept, random_allocate,
)
from .model import Instance, Schedule, objective
from .routing import RouteBuilder, erpa, local_search

__all__ = [
    "SaConfig", "SolverReport", "TracePoint", "Variant", "metropolis_accept",
    "solve", "solve_variant",
]


@dataclass(frozen=True)
class SaConfig:
    t0: float = 1000.0
    t_end: float = 1e-7
    q: float = 0.93
    L: int = 20
    n_starts: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.t0 > self.t_end > 0:
            raise ValueError("need t0 > t_end > 0")
        if not 0 < self.q < 1:
            raise ValueError("cooling rate q must lie in (0, 1)")
        if self.L < 1 or self.n_starts < 1:
            raise ValueError("L and n_starts must be >= 1")

    def temperatures(self) -> list[float]:
        """Temperatures of the outer iterations: t0 * q**k while above t_end."""
        out = []
        k = 0
        while (t := self.t0 * self.q ** k) > self.t_end:
            out.append(t)
            k += 1
        return out

    @property
    def outer_iterations(self) -> int:
        return len(self.temperatures())


class Variant(str, enum.Enum):
    FULL = "full"
    NO_LS = "no_ls"
    RANDOM_INIT = "random_init"
    ERPA_ONLY = "erpa_only"


@dataclass(frozen=True)
class TracePoint:
    iteration: int
    temperature: float
    incumbent_cost: float
    best_cost: float
    # incumbent cost right before the local search step of this iteration
    pre_ls_cost: float | None = None


@dataclass
class SolverReport:
    best_schedule: Schedule
    best_cost: float
    initial_cost: float
    trace: list[TracePoint]
    wall_time_s: float
    seed: int
    variant: Variant = Variant.FULL
    route_builds: int = 0
    ls_accepted: int = 0
    extra: dict = field(default_factory=dict)


def solve(instance: Instance, config: SaConfig = SaConfig()) -> SolverReport:
    return solve_variant(instance, config, Variant.FULL)


def solve_variant(instance: Instance, config: SaConfig = SaConfig(),
                  variant: Variant | str = Variant.FULL,
                  observer: Callable[[int, Schedule, float], None] | None = None) -> SolverReport:
    """Run one variant of the solver.

    ``no_ls`` skips the local search, ``random_init`` starts from a random
    feasible depot assignment, ``erpa_only`` stops after construction.
    ``observer`` sees the incumbent (iteration, schedule, cost) after every
    outer iteration.
    """
    variant = Variant(variant)
    instance.check()
    started = time.perf_counter()
    rng = random.Random(config.seed)
    weights = instance.weights

    if variant is Variant.RANDOM_INIT:
        scheme = random_allocate(instance, rng)
    else:
        scheme = initial_allocate(instance, rng)
    schedule = erpa(scheme, instance, rng, config.n_starts)
    cost = objective(schedule, weights)
    scheme = AllocationScheme.from_schedule(schedule)
    initial_cost = cost

    best = [schedule, cost]
    trace = [TracePoint(0, config.t0, cost, cost)]
    builder = RouteBuilder(instance)
    ls_accepted = 0

    def keep_best(_scheme: AllocationScheme, s: Schedule, f: float) -> None:
        if f < best[1]:
            best[0], best[1] = s, f

    if variant is not Variant.ERPA_ONLY:
        for k, t in enumerate(config.temperatures(), start=1):
            scheme, schedule, cost = ivnd(scheme, schedule, cost, config.L, t, rng,
                                          builder, instance, on_accept=keep_best)
            pre_ls = cost
            if variant is not Variant.NO_LS:
                s0 = local_search(schedule, instance, rng)
                f0 = objective(s0, weights)
                if f0 < cost:
                    schedule, cost = s0, f0
                    scheme = AllocationScheme.from_schedule(s0)
                    ls_accepted += 1
                    keep_best(scheme, schedule, cost)
            trace.append(TracePoint(k, t, cost, best[1], pre_ls))
            if observer is not None:
                observer(k, schedule, cost)

    return SolverReport(
        best_schedule=best[0],
        best_cost=best[1],
        initial_cost=initial_cost,
        trace=trace,
        wall_time_s=time.perf_counter() - started,
        seed=config.seed,
        variant=variant,
        route_builds=builder.calls + config.n_starts,
        ls_accepted=ls_accepted,
    )
