#!/usr/bin/env python3
import json

import numpy as np
import pytest

from coems_bench.models.bench_models import BenchConfig
from coems_bench.simulation.langevin import simulate
from coems_bench.simulation.record_io import RECORD_COLUMNS, read_record, sidecar_path, write_record

from ..test_utils.configs import small_bench_config


@pytest.fixture(scope="module")
def record():
    config = BenchConfig.model_validate(small_bench_config(duration_s=0.1)).to_simulation_config(gain=4.0)
    return simulate(config)


def test_written_record_reads_back(tmp_path, record):
    csv_path = tmp_path / "record.csv"
    written = write_record(record, csv_path)

    assert written == [csv_path, sidecar_path(csv_path)]
    assert csv_path.read_text().splitlines()[0] == ",".join(RECORD_COLUMNS)

    loaded = read_record(csv_path)
    np.testing.assert_array_equal(loaded.displacement, record.displacement)
    np.testing.assert_array_equal(loaded.feedback_force, record.feedback_force)
    assert loaded.config == record.config
    assert loaded.dt == record.dt


def test_header_mismatch(tmp_path, record):
    csv_path = tmp_path / "record.csv"
    write_record(record, csv_path)
    metadata = json.loads(sidecar_path(csv_path).read_text())
    metadata["columns"] = metadata["columns"][::-1]
    sidecar_path(csv_path).write_text(json.dumps(metadata))

    with pytest.raises(ValueError, match="does not match"):
        read_record(csv_path)
