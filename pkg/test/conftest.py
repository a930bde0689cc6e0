"""
Pytest configuration and fixtures for all tests.

Statistical simulation tests that take more than a few seconds are marked `slow` and only run
with --run-slow.
"""

import typing

import pytest

from coems_bench.models.physics_models import Environment, MechanicalMode
from coems_bench.utils.env_vars import JOBS_ENV_VAR, LOG_LEVEL_ENV_VAR

from .test_utils.configs import small_bench_config


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption("--run-slow", action="store_true", default=False, help="Run slow statistical simulations")


def pytest_configure(config: pytest.Config) -> None:
    config.addinivalue_line("markers", "slow: long statistical simulation, needs --run-slow")


def pytest_collection_modifyitems(config: pytest.Config, items: list[pytest.Item]) -> None:
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch: pytest.MonkeyPatch) -> typing.Iterator[None]:
    """The bench reads only optional variables; tests start without them."""
    monkeypatch.delenv(LOG_LEVEL_ENV_VAR, raising=False)
    monkeypatch.delenv(JOBS_ENV_VAR, raising=False)
    yield


@pytest.fixture
def room_temperature() -> Environment:
    return Environment(bath_temperature=300.0)


@pytest.fixture
def test_mode() -> MechanicalMode:
    """10 kHz, Q = 200: fast enough to simulate, narrow enough for the viscous closed forms."""
    return MechanicalMode.from_hertz("mode1", effective_mass=1e-12, resonance_hz=10_000.0, damping_hz=50.0)


@pytest.fixture
def bench_document() -> dict[str, typing.Any]:
    return small_bench_config()
