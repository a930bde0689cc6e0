#!/usr/bin/env python3
import importlib
import logging
import pkgutil

import pytest

from coems_bench.utils.env_vars import JOBS_ENV_VAR, LOG_LEVEL_ENV_VAR, get_default_jobs, get_log_level


def test_defaults():
    assert get_log_level() == logging.INFO
    assert get_default_jobs() == 1


def test_log_level_case_insensitive(monkeypatch):
    monkeypatch.setenv(LOG_LEVEL_ENV_VAR, " debug ")
    assert get_log_level() == logging.DEBUG


def test_invalid_log_level(monkeypatch):
    monkeypatch.setenv(LOG_LEVEL_ENV_VAR, "LOUD")
    with pytest.raises(ValueError, match=LOG_LEVEL_ENV_VAR):
        get_log_level()


def test_jobs(monkeypatch):
    monkeypatch.setenv(JOBS_ENV_VAR, "4")
    assert get_default_jobs() == 4


@pytest.mark.parametrize("raw", ["0", "many", "-2"])
def test_invalid_jobs(monkeypatch, raw):
    monkeypatch.setenv(JOBS_ENV_VAR, raw)
    with pytest.raises(ValueError, match=JOBS_ENV_VAR):
        get_default_jobs()


def test_module_loggers_inherit_level():
    import coems_bench

    for module in pkgutil.walk_packages(coems_bench.__path__, prefix="coems_bench."):
        importlib.import_module(module.name)
        assert logging.getLogger(module.name).level == logging.NOTSET, module.name
