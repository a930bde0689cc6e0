import json
import logging
import pathlib
import typing

import pydantic

from coems_bench.models.bench_models import BenchConfig, ModeEntry

_LOGGER = logging.getLogger(__name__)

_MODE_LIST = pydantic.TypeAdapter(list[ModeEntry])


def load_bench_config(path: pathlib.Path) -> BenchConfig:
    """
    :raises OSError: If the file cannot be read
    :raises json.JSONDecodeError: If it is not JSON
    :raises pydantic.ValidationError: If it does not match the config schema
    """
    document = json.loads(path.read_text())
    config = BenchConfig.model_validate(document)
    _LOGGER.info(f"Loaded config {path} ({len(config.modes)} modes)")
    return config


def config_schema() -> dict[str, typing.Any]:
    return BenchConfig.model_json_schema()


def parse_float_list(text: str) -> list[float]:
    """
    Parses a comma list such as "0,1,2.5".

    :raises ValueError: On an empty list, a non-number or a negative value
    """
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise ValueError("Expected a comma-separated list of numbers")
    values = [float(item) for item in items]
    if any(value < 0 for value in values):
        raise ValueError(f"Values must be non-negative: {text}")
    return values


def parse_mode_guesses(text: str) -> list[ModeEntry]:
    """
    Initial guesses as a JSON list of mode entries, inline or in a file.

    :raises OSError: If a guess file cannot be read
    :raises pydantic.ValidationError: If the entries are malformed
    """
    raw = text if text.lstrip().startswith("[") else pathlib.Path(text).read_text()
    return _MODE_LIST.validate_json(raw)
