import logging
import os

LOG_LEVEL_ENV_VAR = "COEMS_BENCH_LOG_LEVEL"
JOBS_ENV_VAR = "COEMS_BENCH_JOBS"

_VALID_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _get_optional_env_var(env_var: str, default: str) -> str:
    value = os.environ.get(env_var)
    if value is None or not value.strip():
        return default
    return value.strip()


def get_log_level() -> int:
    """
    Returns the logging level requested through COEMS_BENCH_LOG_LEVEL (default INFO).

    :raises ValueError: If the variable names an unknown level
    """
    name = _get_optional_env_var(LOG_LEVEL_ENV_VAR, "INFO").upper()
    if name not in _VALID_LOG_LEVELS:
        raise ValueError(f"Invalid environment variable {LOG_LEVEL_ENV_VAR}: {name}")
    return getattr(logging, name)


def get_default_jobs() -> int:
    """
    Returns the worker count used when --jobs is not given (COEMS_BENCH_JOBS, default 1).

    :raises ValueError: If the variable is not a positive integer
    """
    raw = _get_optional_env_var(JOBS_ENV_VAR, "1")
    try:
        jobs = int(raw)
    except ValueError:
        raise ValueError(f"Invalid environment variable {JOBS_ENV_VAR}: {raw}") from None
    if jobs < 1:
        raise ValueError(f"Invalid environment variable {JOBS_ENV_VAR}: {raw}")
    return jobs
