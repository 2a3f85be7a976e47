"""Random instance generation, the benchmark suite shapes, and JSON files
for instances and schedules."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .model import (
    CoordinateSystem, Depot, DepotPlan, DroneSpec, Instance, InstanceError, Leg,
    Location, ObjectiveWeights, RoutePattern, Schedule, Sortie, Task, TaskKind,
    distance, effective_range,
)

MAX_REDRAWS = 10_000


class InstanceFormatError(ValueError):
    """A file that cannot be parsed into an instance or schedule."""


@dataclass(frozen=True)
class GenParams:
    num_tasks: int
    num_depots: int
    area_km: float = 50.0
    weight_min_kg: float = 1.0
    weight_max_kg: float = 8.0
    kind_mix: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    seed: int = 0
    drone: DroneSpec = field(default_factory=DroneSpec)
    weights: ObjectiveWeights = field(default_factory=ObjectiveWeights)
    name: str | None = None

    def __post_init__(self) -> None:
        if self.num_tasks < 1 or self.num_depots < 1:
            raise ValueError("need at least one task and one depot")
        if not self.area_km > 0:
            raise ValueError("area_km must be positive")
        if len(self.kind_mix) != 3 or min(self.kind_mix) < 0 or not math.isclose(sum(self.kind_mix), 1.0):
            raise ValueError(f"kind_mix must be 3 probabilities summing to 1, got {self.kind_mix}")
        if not 0 < self.weight_min_kg <= self.weight_max_kg <= self.drone.max_capacity_kg:
            raise ValueError("weight bounds must satisfy 0 < min <= max <= drone capacity")


@dataclass(frozen=True)
class SuiteConfig:
    label: str
    num_tasks: int
    num_depots: int


_TABLE_SHAPES = [(40, 5), (60, 5), (80, 5), (100, 5), (150, 5), (200, 5), (40, 2),
                 (40, 4), (60, 3), (80, 4), (100, 10), (150, 7), (200, 10)]


def builtin_suite() -> list[SuiteConfig]:
    """The thirteen (tasks, depots) shapes C1..C13."""
    return [SuiteConfig(f"C{i}", c, m) for i, (c, m) in enumerate(_TABLE_SHAPES, start=1)]


_KINDS = (TaskKind.DROP, TaskKind.PICKUP, TaskKind.PICKDROP)


def generate(params: GenParams) -> Instance:
    """Uniform random planar instance; deterministic in ``params.seed``.

    Tasks that no depot could serve alone are redrawn, so the instance has
    exactly ``num_tasks`` tasks.
    """
    rng = np.random.default_rng(params.seed)
    a = params.area_km
    c, m = params.num_tasks, params.num_depots
    depot_xy = rng.uniform(0.0, a, size=(m, 2))
    depots = [Location(float(x), float(y)) for x, y in depot_xy]
    tasks = []
    for tid in range(1, c + 1):
        for _ in range(MAX_REDRAWS):
            x, y = rng.uniform(0.0, a, size=2)
            kind = _KINDS[int(rng.choice(3, p=params.kind_mix))]
            drop = pick = None
            if kind is not TaskKind.PICKUP:
                drop = float(rng.uniform(params.weight_min_kg, params.weight_max_kg))
            if kind is not TaskKind.DROP:
                pick = float(rng.uniform(params.weight_min_kg, params.weight_max_kg))
            task = Task(tid, Location(float(x), float(y)), kind, drop, pick)
            reach = effective_range(task.heaviest, params.drone)
            if min(distance(task.location, d) for d in depots) <= reach:
                tasks.append(task)
                break
        else:
            raise InstanceError(
                f"could not place task {tid} within range of a depot after {MAX_REDRAWS} draws")
    name = params.name or f"gen-c{c}-m{m}-s{params.seed}"
    return Instance(
        name=name,
        depots=tuple(Depot(c + i + 1, loc) for i, loc in enumerate(depots)),
        tasks=tuple(tasks),
        drone=params.drone,
        weights=params.weights,
    )


def suite_instance(config: SuiteConfig, seed: int, **kw: Any) -> Instance:
    return generate(GenParams(config.num_tasks, config.num_depots, seed=seed,
                              name=f"{config.label}-s{seed}", **kw))


# -- instance files ---------------------------------------------------------

def _loc_to_dict(loc: Location) -> dict[str, float]:
    if loc.system is CoordinateSystem.GEOGRAPHIC:
        return {"lat": loc.lat, "lon": loc.lon}
    return {"x": loc.x, "y": loc.y}


def instance_to_dict(instance: Instance) -> dict[str, Any]:
    tasks = []
    for t in instance.tasks:
        row: dict[str, Any] = {"id": t.id, **_loc_to_dict(t.location), "kind": t.kind.value}
        if t.drop_weight is not None:
            row["drop_weight"] = t.drop_weight
        if t.pickup_weight is not None:
            row["pickup_weight"] = t.pickup_weight
        tasks.append(row)
    d, w = instance.drone, instance.weights
    return {
        "name": instance.name,
        "coordinate_system": instance.coordinate_system.value,
        "drone": {"max_range_km": d.max_range_km, "max_capacity_kg": d.max_capacity_kg,
                  "beta_max": d.beta_max},
        "weights": {"alpha": w.alpha, "rho": w.rho},
        "depots": [{"id": dp.id, **_loc_to_dict(dp.location)} for dp in instance.depots],
        "tasks": tasks,
    }


def _require(obj: Any, key: str, where: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise InstanceFormatError(f"{where}: missing field '{key}'")
    return obj[key]


def _number(obj: Any, key: str, where: str) -> float:
    v = _require(obj, key, where)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InstanceFormatError(f"{where}: field '{key}' must be a number, got {v!r}")
    return float(v)


def _location(obj: Any, system: CoordinateSystem, where: str) -> Location:
    try:
        if system is CoordinateSystem.GEOGRAPHIC:
            return Location.geo(_number(obj, "lat", where), _number(obj, "lon", where))
        return Location(_number(obj, "x", where), _number(obj, "y", where))
    except InstanceFormatError:
        raise
    except ValueError as exc:
        raise InstanceFormatError(f"{where}: {exc}") from exc


def instance_from_dict(data: Any) -> Instance:
    """Parse and check an instance; raises InstanceFormatError for bad
    structure and InstanceError for broken constraints."""
    try:
        system = CoordinateSystem(_require(data, "coordinate_system", "instance"))
    except ValueError as exc:
        raise InstanceFormatError(f"instance: field 'coordinate_system': {exc}") from exc
    drone_d = _require(data, "drone", "instance")
    weights_d = _require(data, "weights", "instance")
    try:
        drone = DroneSpec(_number(drone_d, "max_range_km", "drone"),
                          _number(drone_d, "max_capacity_kg", "drone"),
                          _number(drone_d, "beta_max", "drone"))
        weights = ObjectiveWeights(_number(weights_d, "alpha", "weights"),
                                   _number(weights_d, "rho", "weights"))
    except InstanceFormatError:
        raise
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from exc

    depots = []
    for i, row in enumerate(_require(data, "depots", "instance")):
        where = f"depots[{i}]"
        depots.append(Depot(int(_number(row, "id", where)), _location(row, system, where)))
    tasks = []
    for i, row in enumerate(_require(data, "tasks", "instance")):
        where = f"tasks[{i}]"
        try:
            kind = TaskKind(_require(row, "kind", where))
        except ValueError as exc:
            raise InstanceFormatError(f"{where}: field 'kind': {exc}") from exc
        drop = _number(row, "drop_weight", where) if "drop_weight" in row else None
        pick = _number(row, "pickup_weight", where) if "pickup_weight" in row else None
        tasks.append(Task(int(_number(row, "id", where)), _location(row, system, where),
                          kind, drop, pick))
    name = _require(data, "name", "instance")
    return Instance(str(name), tuple(depots), tuple(tasks), drone, weights, system).check()


def save_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=2) + "\n")


def _read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: not valid JSON ({exc})") from exc


def load_instance(path: str | Path) -> Instance:
    return instance_from_dict(_read_json(path))


# -- schedule files ---------------------------------------------------------

def schedule_to_dict(schedule: Schedule, instance: Instance | None = None,
                     **meta: Any) -> dict[str, Any]:
    out: dict[str, Any] = dict(meta)
    if instance is not None:
        from .model import objective

        out.setdefault("instance", instance.name)
        out["cost"] = objective(schedule, instance.weights)
    out["distance_km"] = schedule.total_distance_km
    out["sorties"] = schedule.sortie_count
    out["plans"] = [
        {"depot": p.depot_id,
         "sorties": [{"pattern": s.pattern.value,
                      "legs": [[leg.src, leg.dst, leg.payload_kg] for leg in s.legs]}
                     for s in p.sorties]}
        for p in schedule.plans
    ]
    return out


def schedule_from_dict(data: Any, instance: Instance) -> Schedule:
    plans = []
    for i, p in enumerate(_require(data, "plans", "schedule")):
        depot = int(_number(p, "depot", f"plans[{i}]"))
        sorties = []
        for j, s in enumerate(_require(p, "sorties", f"plans[{i}]")):
            where = f"plans[{i}].sorties[{j}]"
            try:
                pattern = RoutePattern(_require(s, "pattern", where))
                legs = [Leg(int(a), int(b), float(w)) for a, b, w in _require(s, "legs", where)]
                sorties.append(Sortie.from_legs(instance, depot, legs, pattern))
            except (TypeError, ValueError, KeyError) as exc:
                raise InstanceFormatError(f"{where}: {exc}") from exc
        plans.append(DepotPlan(depot, tuple(sorties)))
    return Schedule(tuple(plans))


def save_schedule(schedule: Schedule, path: str | Path, instance: Instance | None = None,
                  **meta: Any) -> None:
    Path(path).write_text(json.dumps(schedule_to_dict(schedule, instance, **meta), indent=2) + "\n")


def load_schedule(path: str | Path, instance: Instance) -> Schedule:
    return schedule_from_dict(_read_json(path), instance)
