import json
import random

import pytest
from hypothesis import HealthCheck, settings

from pogames.corpus import g0, g1, g2
from pogames.hardness import curated_machines, tm_accepts, tm_to_game
from pogames.solvers import solve_three

settings.register_profile(
    "suite", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")

# Lines recorded by the acceptance tests, echoed in the terminal summary so
# they survive output capturing.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def G0():
    return g0()


@pytest.fixture
def G1():
    return g1()


@pytest.fixture
def G2():
    return g2()


@pytest.fixture
def rng():
    return random.Random(20240611)


def g1_document() -> dict:
    return {
        "kind": "three-player",
        "states": ["s", "w", "l"],
        "initial": "s",
        "actions": {"a1": ["h", "t"], "a2": ["h", "t"], "a3": ["a"]},
        "obs1": ["*"],
        "obs2": ["*"],
        "transitions": [
            {"from": "s", "a1": "h", "a2": "h", "a3": "*", "to": "w"},
            {"from": "s", "a1": "t", "a2": "t", "a3": "*", "to": "w"},
            {"from": "s", "a1": "h", "a2": "t", "a3": "*", "to": "l"},
            {"from": "s", "a1": "t", "a2": "h", "a3": "*", "to": "l"},
            {"from": "w", "a1": "*", "a2": "*", "a3": "*", "to": "w"},
            {"from": "l", "a1": "*", "a2": "*", "a3": "*", "to": "l"},
        ],
        "objective": {"type": "reach", "target": ["w"]},
    }


@pytest.fixture
def g1_text():
    return json.dumps(g1_document())


@pytest.fixture(scope="session")
def curated():
    return curated_machines()


@pytest.fixture(scope="session")
def curated_n1(curated):
    """Exact solver verdict and machine acceptance for every curated machine
    at one address bit (a few minutes in total, computed once)."""
    out = {}
    for name, (m, w, n) in curated.items():
        tg = tm_to_game(m, w, n)
        v = solve_three(*tg.parts())
        out[name] = (v, tm_accepts(m, w, n), tg)
    return out
