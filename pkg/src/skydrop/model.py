"""Problem model for multi-depot drone pickup and delivery.

Holds the domain types (tasks, depots, drone specification, sorties,
schedules), the payload-penalized range model, the objective and the
schedule validator. Node ids follow one numbering: tasks are ``1..c`` and
depots ``c+1..c+m``.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

EARTH_RADIUS_KM = 6371.0
PAYLOAD_TOL = 1e-9


class CoordinateSystem(str, enum.Enum):
    PLANAR = "planar"
    GEOGRAPHIC = "geographic"


class InstanceError(ValueError):
    """Raised when an instance breaks one of its invariants."""


class UnserviceableTaskError(InstanceError):
    def __init__(self, task_id: int, depot_id: int | None = None):
        self.task_id = task_id
        self.depot_id = depot_id
        where = f"depot {depot_id}" if depot_id is not None else "any depot"
        super().__init__(f"task {task_id} cannot be served from {where} within range")


@dataclass(frozen=True)
class Location:
    """A point. Planar points are kilometres; geographic ones store lon in
    ``x`` and lat in ``y`` (degrees)."""

    x: float
    y: float
    system: CoordinateSystem = CoordinateSystem.PLANAR

    def __post_init__(self) -> None:
        object.__setattr__(self, "system", CoordinateSystem(self.system))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")
        if self.system is CoordinateSystem.GEOGRAPHIC:
            if not -90.0 <= self.y <= 90.0:
                raise ValueError(f"latitude {self.y} outside [-90, 90]")
            if not -180.0 <= self.x <= 180.0:
                raise ValueError(f"longitude {self.x} outside [-180, 180]")

    @classmethod
    def geo(cls, lat: float, lon: float) -> "Location":
        return cls(lon, lat, CoordinateSystem.GEOGRAPHIC)

    @property
    def lat(self) -> float:
        return self.y

    @property
    def lon(self) -> float:
        return self.x


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


def distance(a: Location, b: Location) -> float:
    """Euclidean distance for planar points, great-circle for geographic."""
    if a.system is not b.system:
        raise ValueError(f"cannot mix {a.system.value} and {b.system.value} locations")
    if a.system is CoordinateSystem.PLANAR:
        return math.hypot(a.x - b.x, a.y - b.y)
    return haversine_km(a.lat, a.lon, b.lat, b.lon)


class TaskKind(str, enum.Enum):
    DROP = "drop"
    PICKUP = "pickup"
    PICKDROP = "pickdrop"


@dataclass(frozen=True)
class Task:
    id: int
    location: Location
    kind: TaskKind
    drop_weight: float | None = None
    pickup_weight: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", TaskKind(self.kind))
        needs_drop = self.kind in (TaskKind.DROP, TaskKind.PICKDROP)
        needs_pick = self.kind in (TaskKind.PICKUP, TaskKind.PICKDROP)
        for name, needed in (("drop_weight", needs_drop), ("pickup_weight", needs_pick)):
            w = getattr(self, name)
            if needed and w is None:
                raise InstanceError(f"task {self.id}: {self.kind.value} task needs {name}")
            if not needed and w is not None:
                raise InstanceError(f"task {self.id}: {self.kind.value} task must not have {name}")
            if w is not None and not (w > 0 and math.isfinite(w)):
                raise InstanceError(f"task {self.id}: {name} must be positive, got {w}")

    @property
    def outbound_payload(self) -> float:
        """Weight carried on the leg into this task."""
        return self.drop_weight or 0.0

    @property
    def return_payload(self) -> float:
        """Weight carried on the leg out of this task."""
        return self.pickup_weight or 0.0

    @property
    def heaviest(self) -> float:
        return max(self.outbound_payload, self.return_payload)


@dataclass(frozen=True)
class Depot:
    id: int
    location: Location


@dataclass(frozen=True)
class DroneSpec:
    max_range_km: float = 30.0
    max_capacity_kg: float = 8.0
    beta_max: float = 2.0

    def __post_init__(self) -> None:
        if not self.max_range_km > 0:
            raise ValueError("max_range_km must be > 0")
        if not self.max_capacity_kg > 0:
            raise ValueError("max_capacity_kg must be > 0")
        if not self.beta_max >= 1:
            raise ValueError("beta_max must be >= 1")


@dataclass(frozen=True)
class ObjectiveWeights:
    alpha: float = 0.9
    rho: float = 0.1

    def __post_init__(self) -> None:
        for name in ("alpha", "rho"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


def payload_penalty(weight: float, spec: DroneSpec) -> float:
    """Range divisor for a drone carrying ``weight`` kg; 1 when empty,
    ``beta_max`` at full capacity, linear in between."""
    if not 0.0 <= weight <= spec.max_capacity_kg:
        raise ValueError(f"payload {weight} kg outside [0, {spec.max_capacity_kg}]")
    return (spec.beta_max - 1.0) / spec.max_capacity_kg * weight + 1.0


def effective_range(weight: float, spec: DroneSpec) -> float:
    return spec.max_range_km / payload_penalty(weight, spec)


class Leg(NamedTuple):
    src: int
    dst: int
    payload_kg: float


class RoutePattern(str, enum.Enum):
    PICKUP_ONLY = "pickup_only"
    DROP_ONLY = "drop_only"
    DROP_THEN_PICKUP = "drop_then_pickup"
    PICKDROP_SAME = "pickdrop_same"


_PATTERN_BY_KINDS = {
    (TaskKind.PICKUP,): RoutePattern.PICKUP_ONLY,
    (TaskKind.DROP,): RoutePattern.DROP_ONLY,
    (TaskKind.DROP, TaskKind.PICKUP): RoutePattern.DROP_THEN_PICKUP,
    (TaskKind.PICKDROP,): RoutePattern.PICKDROP_SAME,
}


def pattern_for(kinds: Sequence[TaskKind]) -> RoutePattern | None:
    """The route pattern for a visit sequence of task kinds, or None."""
    return _PATTERN_BY_KINDS.get(tuple(kinds))


@dataclass(frozen=True, slots=True)
class Sortie:
    """One drone launch from ``depot_id`` back to the same depot."""

    depot_id: int
    legs: tuple[Leg, ...]
    pattern: RoutePattern
    distance_km: float = field(compare=False)

    @classmethod
    def from_legs(cls, instance: "Instance", depot_id: int, legs: Iterable[Leg],
                  pattern: RoutePattern) -> "Sortie":
        """Sortie from explicit legs, e.g. read from a file. Legs touching an
        unknown node get a NaN length so the validator can report them."""
        legs = tuple(Leg(*leg) for leg in legs)

        def known(n: int) -> bool:
            return instance.is_task(n) or instance.is_depot(n)

        return cls(depot_id, legs, RoutePattern(pattern),
                   sum(instance.dist(leg.src, leg.dst) if known(leg.src) and known(leg.dst)
                       else math.nan for leg in legs))

    @property
    def tasks(self) -> tuple[int, ...]:
        return tuple(leg.dst for leg in self.legs[:-1])

    @property
    def nodes(self) -> tuple[int, ...]:
        if not self.legs:
            return ()
        return (self.legs[0].src,) + tuple(leg.dst for leg in self.legs)


def make_sortie(instance: "Instance", depot_id: int, task_ids: Sequence[int]) -> Sortie:
    """Build the sortie serving ``task_ids`` in order, deriving its pattern
    and leg payloads. Raises ValueError if the sequence is no legal pattern.
    Range feasibility is not checked here."""
    tasks = [instance.task(t) for t in task_ids]
    pattern = pattern_for([t.kind for t in tasks])
    if pattern is None:
        raise ValueError(f"tasks {list(task_ids)} do not form a legal route pattern")
    legs = []
    prev, carried = depot_id, tasks[0].outbound_payload
    for i, t in enumerate(tasks):
        legs.append(Leg(prev, t.id, carried))
        prev = t.id
        # drop then pickup: the drone flies empty between the two customers
        carried = t.return_payload if i == len(tasks) - 1 else 0.0
    legs.append(Leg(prev, depot_id, carried))
    return Sortie.from_legs(instance, depot_id, legs, pattern)


@dataclass(frozen=True)
class DepotPlan:
    depot_id: int
    sorties: tuple[Sortie, ...]

    @cached_property
    def distance_km(self) -> float:
        return sum(s.distance_km for s in self.sorties)

    @property
    def tasks(self) -> tuple[int, ...]:
        return tuple(t for s in self.sorties for t in s.tasks)


@dataclass(frozen=True)
class Schedule:
    """Per-depot sortie lists; plans are kept in depot-id order."""

    plans: tuple[DepotPlan, ...]

    @cached_property
    def total_distance_km(self) -> float:
        return sum(p.distance_km for p in self.plans)

    @cached_property
    def sortie_count(self) -> int:
        return sum(len(p.sorties) for p in self.plans)

    def plan(self, depot_id: int) -> DepotPlan:
        for p in self.plans:
            if p.depot_id == depot_id:
                return p
        raise KeyError(depot_id)

    def sorties(self) -> Iterable[Sortie]:
        for p in self.plans:
            yield from p.sorties

    def with_plan(self, plan: DepotPlan) -> "Schedule":
        return Schedule(tuple(plan if p.depot_id == plan.depot_id else p for p in self.plans))


def objective(schedule: Schedule, weights: ObjectiveWeights) -> float:
    """Weighted flight distance plus weighted number of sorties."""
    return weights.alpha * schedule.total_distance_km + weights.rho * schedule.sortie_count


@dataclass(frozen=True)
class Instance:
    name: str
    depots: tuple[Depot, ...]
    tasks: tuple[Task, ...]
    drone: DroneSpec = DroneSpec()
    weights: ObjectiveWeights = ObjectiveWeights()
    coordinate_system: CoordinateSystem = CoordinateSystem.PLANAR

    def __post_init__(self) -> None:
        object.__setattr__(self, "depots", tuple(self.depots))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "coordinate_system", CoordinateSystem(self.coordinate_system))
        if not self.depots:
            raise InstanceError("instance needs at least one depot")
        if not self.tasks:
            raise InstanceError("instance needs at least one task")
        c, m = len(self.tasks), len(self.depots)
        if sorted(t.id for t in self.tasks) != list(range(1, c + 1)):
            raise InstanceError(f"task ids must be exactly 1..{c}")
        if sorted(d.id for d in self.depots) != list(range(c + 1, c + m + 1)):
            raise InstanceError(f"depot ids must be exactly {c + 1}..{c + m}")
        for node in (*self.tasks, *self.depots):
            if node.location.system is not self.coordinate_system:
                raise InstanceError(
                    f"node {node.id} uses {node.location.system.value} coordinates, "
                    f"instance is {self.coordinate_system.value}")

    @property
    def num_tasks(self) -> int:
        return len(self.tasks)

    @property
    def depot_ids(self) -> tuple[int, ...]:
        return tuple(sorted(d.id for d in self.depots))

    @cached_property
    def _nodes(self) -> list:
        nodes: list = [None] * (len(self.tasks) + len(self.depots) + 1)
        for n in (*self.tasks, *self.depots):
            nodes[n.id] = n
        return nodes

    def task(self, task_id: int) -> Task:
        node = self._nodes[task_id] if 0 < task_id < len(self._nodes) else None
        if not isinstance(node, Task):
            raise KeyError(f"unknown task id {task_id}")
        return node

    def is_task(self, node_id: int) -> bool:
        return 0 < node_id <= len(self.tasks)

    def is_depot(self, node_id: int) -> bool:
        return len(self.tasks) < node_id < len(self._nodes)

    def location(self, node_id: int) -> Location:
        if not 0 < node_id < len(self._nodes):
            raise KeyError(f"unknown node id {node_id}")
        return self._nodes[node_id].location

    @cached_property
    def dmat(self) -> list[list[float]]:
        """Distance matrix indexed by node id (row/column 0 unused)."""
        import numpy as np

        n = len(self._nodes)
        xy = np.zeros((n, 2))
        for i in range(1, n):
            loc = self._nodes[i].location
            xy[i] = (loc.x, loc.y)
        if self.coordinate_system is CoordinateSystem.PLANAR:
            diff = xy[:, None, :] - xy[None, :, :]
            mat = np.hypot(diff[..., 0], diff[..., 1])
        else:
            lon, lat = np.radians(xy[:, 0]), np.radians(xy[:, 1])
            dlat = lat[None, :] - lat[:, None]
            dlon = lon[None, :] - lon[:, None]
            a = np.sin(dlat / 2) ** 2 + np.cos(lat)[:, None] * np.cos(lat)[None, :] * np.sin(dlon / 2) ** 2
            mat = 2.0 * EARTH_RADIUS_KM * np.arcsin(np.minimum(1.0, np.sqrt(a)))
        np.fill_diagonal(mat, 0.0)
        return mat.tolist()

    def dist(self, a: int, b: int) -> float:
        if not (0 < a < len(self._nodes) and 0 < b < len(self._nodes)):
            raise KeyError(f"unknown node id in ({a}, {b})")
        return self.dmat[a][b]

    @cached_property
    def kinds(self) -> list[TaskKind | None]:
        """Task kind per node id (None for depots)."""
        return [n.kind if isinstance(n, Task) else None for n in self._nodes]

    @cached_property
    def payloads(self) -> list[tuple[float, float]]:
        """(outbound, return) payload per node id."""
        return [(n.outbound_payload, n.return_payload) if isinstance(n, Task) else (0.0, 0.0)
                for n in self._nodes]

    @cached_property
    def reach(self) -> list[float]:
        """Per task id, the longest leg it allows at its heaviest payload."""
        out = [0.0] * (len(self.tasks) + 1)
        for t in self.tasks:
            if t.heaviest <= self.drone.max_capacity_kg:
                out[t.id] = effective_range(t.heaviest, self.drone)
        return out

    def serviceable(self, task_id: int, depot_id: int) -> bool:
        """Whether the lone round trip depot -> task -> depot is in range."""
        return self.dmat[depot_id][task_id] <= self.reach[task_id]

    @cached_property
    def feasible_depots(self) -> dict[int, tuple[int, ...]]:
        """Depots able to serve each task alone, nearest first."""
        out = {}
        for t in self.tasks:
            ds = sorted(self.depot_ids, key=lambda d: (self.dmat[d][t.id], d))
            out[t.id] = tuple(d for d in ds if self.serviceable(t.id, d))
        return out

    def nearest_depot(self, task_id: int) -> int:
        loc = self.location(task_id)
        return min(self.depot_ids, key=lambda d: (distance(loc, self.location(d)), d))

    def problems(self) -> list[str]:
        """Semantic invariant breaches: package weights over capacity (C6)
        and tasks no depot can serve."""
        out = []
        cmax = self.drone.max_capacity_kg
        for t in self.tasks:
            for name in ("drop_weight", "pickup_weight"):
                w = getattr(t, name)
                if w is not None and w > cmax:
                    out.append(f"C6: task {t.id} {name} {w} kg exceeds max capacity {cmax} kg")
        if out:
            return out
        for t in self.tasks:
            d = self.nearest_depot(t.id)
            span = distance(t.location, self.location(d))
            if span > effective_range(t.heaviest, self.drone):
                out.append(f"C5: task {t.id} is out of range of its nearest depot {d} "
                           f"({span:.3f} km at {t.heaviest} kg)")
        return out

    def check(self) -> "Instance":
        issues = self.problems()
        if issues:
            raise InstanceError("; ".join(issues))
        return self


def leg_feasible(leg: Leg, instance: Instance) -> bool:
    """Range check of a single leg at its payload (boundary inclusive)."""
    return instance.dist(leg.src, leg.dst) <= effective_range(leg.payload_kg, instance.drone)


@dataclass(frozen=True)
class Violation:
    constraint: str
    message: str
    depot_id: int | None = None
    sortie_index: int | None = None
    task_id: int | None = None

    def __str__(self) -> str:
        where = ""
        if self.depot_id is not None:
            where = f" [depot {self.depot_id}, sortie {self.sortie_index}]"
        return f"{self.constraint}{where}: {self.message}"


def expected_payloads(instance: Instance, task_ids: Sequence[int]) -> list[float]:
    tasks = [instance.task(t) for t in task_ids]
    out = [tasks[0].outbound_payload]
    out += [0.0] * (len(tasks) - 1)
    out.append(tasks[-1].return_payload)
    return out


def validate_schedule(instance: Instance, schedule: Schedule) -> list[Violation]:
    """Return every constraint breach in ``schedule``; empty means feasible."""
    out: list[Violation] = []
    served: Counter[int] = Counter()
    cmax = instance.drone.max_capacity_kg

    for plan in schedule.plans:
        if not instance.is_depot(plan.depot_id):
            out.append(Violation("C3", f"plan anchored at non-depot node {plan.depot_id}",
                                 plan.depot_id))
        for idx, s in enumerate(plan.sorties):
            def flag(constraint: str, msg: str, task_id: int | None = None) -> None:
                out.append(Violation(constraint, msg, plan.depot_id, idx, task_id))

            legs = s.legs
            if len(legs) < 2:
                flag("pattern", f"sortie has {len(legs)} legs; every pattern needs at least 2")
                continue
            if s.depot_id != plan.depot_id:
                flag("C3", f"sortie anchored at {s.depot_id} inside plan of depot {plan.depot_id}")
            if legs[0].src != s.depot_id or legs[-1].dst != s.depot_id:
                flag("C3", f"sortie runs {legs[0].src} -> ... -> {legs[-1].dst}, "
                           f"must start and end at depot {s.depot_id}")
            if any(a.dst != b.src for a, b in zip(legs, legs[1:])):
                flag("C3", "legs do not form a connected path")

            known = True
            for leg in legs:
                for node in (leg.src, leg.dst):
                    if not (instance.is_task(node) or instance.is_depot(node)):
                        flag("C1", f"unknown node id {node}")
                        known = False
            interior = [leg.dst for leg in legs[:-1]]
            if known:
                served.update(t for t in interior if instance.is_task(t))
                if any(instance.is_depot(t) for t in interior):
                    flag("pattern", "sortie passes through a depot mid-flight")
                else:
                    kinds = [instance.task(t).kind for t in interior]
                    derived = pattern_for(kinds)
                    if derived is None:
                        flag("pattern", "visit sequence "
                             + "->".join(k.value for k in kinds) + " is not a legal route pattern")
                    elif derived is not s.pattern:
                        flag("pattern", f"labelled {s.pattern.value} but visits form {derived.value}")
                    else:
                        want = expected_payloads(instance, interior)
                        for leg, w in zip(legs, want):
                            if abs(leg.payload_kg - w) > PAYLOAD_TOL:
                                flag("pattern", f"leg {leg.src}->{leg.dst} carries {leg.payload_kg} kg, "
                                                f"expected {w} kg")
                    for t in interior:
                        if (instance.task(t).kind is TaskKind.PICKDROP
                                and s.pattern is not RoutePattern.PICKDROP_SAME):
                            flag("C4", f"pick-drop task {t} must be served in a single "
                                       "pickdrop_same sortie", t)

            for leg in legs:
                if leg.payload_kg < 0 or leg.payload_kg > cmax:
                    flag("C6", f"leg {leg.src}->{leg.dst} carries {leg.payload_kg} kg, "
                               f"capacity is {cmax} kg")
                elif known and not leg_feasible(leg, instance):
                    flag("C5", f"leg {leg.src}->{leg.dst} is {instance.dist(leg.src, leg.dst):.3f} km, "
                               f"range at {leg.payload_kg} kg is "
                               f"{effective_range(leg.payload_kg, instance.drone):.3f} km")

    for t in instance.tasks:
        n = served[t.id]
        if n != 1:
            out.append(Violation("C3", f"task {t.id} served {n} times, must be exactly once",
                                 task_id=t.id))
    return out
