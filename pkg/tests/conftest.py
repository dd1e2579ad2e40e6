import pytest

from archk.space import validate_space

ACCEPTANCE_RESULTS = []


@pytest.fixture
def record_acceptance():
    def record(name, passed, detail=""):
        ACCEPTANCE_RESULTS.append((name, passed, detail))
        print(f"[{'PASS' if passed else 'FAIL'}] {name} {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name} {detail}")


@pytest.fixture
def assign_all():
    """Random in-domain values for every dimension, active or not."""
    def assign(space, rng):
        out = {}
        for dim in space.dimensions:
            if dim.kind == "real":
                out[dim.id] = float(rng.uniform(dim.lower, dim.upper))
            else:
                out[dim.id] = dim.values[int(rng.integers(dim.m))]
        return out
    return assign


@pytest.fixture
def optimizer_space():
    """A = {on, off} governs B in [0, 1] (active iff A = on)."""
    return validate_space({
        "dimensions": [
            {"id": "A", "type": "categorical", "values": ["on", "off"]},
            {"id": "B", "type": "real", "lower": 0.0, "upper": 1.0},
        ],
        "conditions": [{"target": "B", "governor": "A", "allowed": ["on"]}],
    })


@pytest.fixture
def chain_space():
    """A -> B -> C, all categorical except C."""
    return validate_space({
        "dimensions": [
            {"id": "A", "type": "categorical", "values": ["on", "off"]},
            {"id": "B", "type": "categorical", "values": ["x", "y", "z"]},
            {"id": "C", "type": "real", "lower": -2.0, "upper": 3.0},
        ],
        "conditions": [
            {"target": "B", "governor": "A", "allowed": ["on"]},
            {"target": "C", "governor": "B", "allowed": ["x", "y"]},
        ],
    })


@pytest.fixture
def diamond_space():
    """A -> B, A -> C, B -> D, C -> D, plus an unrelated root R."""
    return validate_space({
        "dimensions": [
            {"id": "A", "type": "categorical", "values": ["a0", "a1", "a2"]},
            {"id": "B", "type": "categorical", "values": ["b0", "b1"]},
            {"id": "C", "type": "categorical", "values": ["c0", "c1", "c2", "c3"]},
            {"id": "D", "type": "real", "lower": 10.0, "upper": 20.0},
            {"id": "R", "type": "real", "lower": -1.0, "upper": 1.0},
        ],
        "conditions": [
            {"target": "B", "governor": "A", "allowed": ["a0", "a1"]},
            {"target": "C", "governor": "A", "allowed": ["a1", "a2"]},
            {"target": "D", "governor": "B", "allowed": ["b1"]},
            {"target": "D", "governor": "C", "allowed": ["c0", "c2"]},
        ],
    })
