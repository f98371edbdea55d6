from importlib import resources

import pytest

from edgeplace.cost import default_prices
from edgeplace.creason import preprocess
from edgeplace.instances import random_instance
from edgeplace.model import load_application, load_infrastructure

DATA = resources.files("edgeplace.data")
APPS = ("speakToMe", "arFarming", "distSecurity")


def app_path(name):
    return str(DATA / "apps" / f"{name}.json")


def infra_path(name):
    return str(DATA / "infra" / f"{name}.json")


@pytest.fixture(scope="session")
def table():
    return default_prices()


@pytest.fixture
def speak():
    return load_application(app_path("speakToMe"))


@pytest.fixture(scope="session")
def apps():
    return {name: load_application(app_path(name)) for name in APPS}


@pytest.fixture
def two_node():
    return load_infrastructure(infra_path("twoNodeFeasible"))


@pytest.fixture
def small_infra():
    return load_infrastructure(infra_path("smallFeasible"))


@pytest.fixture(scope="session")
def random_cases(table):
    """(seed, app, infra, outcome) for 150 seeded small instances."""
    out = []
    for seed in range(150):
        app, infra = random_instance(seed)
        out.append((seed, app, infra, preprocess(app, infra, table)))
    return out


# -- acceptance verdicts -----------------------------------------------------
# test_acceptance.py appends "(number, PASS|FAIL, detail)" here; the lines are
# printed once at the end of the run, whatever pytest's capture mode.

VERDICTS = []


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, verdict, detail in sorted(VERDICTS):
        terminalreporter.write_line(f"criterion {num:2d}: {verdict}  {detail}")
