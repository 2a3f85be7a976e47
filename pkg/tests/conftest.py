import pytest

from skydrop.model import Depot, DroneSpec, Instance, Location, ObjectiveWeights, Task, TaskKind


def planar(depots, tasks, drone=None, weights=None, name="hand"):
    """Build a planar instance from depot (x, y) pairs and task tuples
    (x, y, kind, drop_weight, pickup_weight); ids follow list order."""
    c = len(tasks)
    ts = tuple(Task(i + 1, Location(x, y), TaskKind(k), dw, pw)
               for i, (x, y, k, dw, pw) in enumerate(tasks))
    ds = tuple(Depot(c + j + 1, Location(x, y)) for j, (x, y) in enumerate(depots))
    return Instance(name, ds, ts, drone or DroneSpec(), weights or ObjectiveWeights())


@pytest.fixture
def trio():
    """One depot at the origin serving a drop, a pickup and a pick-drop task."""
    return planar([(0, 0)], [(3, 4, "drop", 2.0, None), (6, 8, "pickup", None, 3.0),
                             (0, 7, "pickdrop", 1.0, 1.0)])


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_lines(request):
    return request.config.stash.setdefault(_ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
