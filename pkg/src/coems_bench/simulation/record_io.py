import json
import logging
import pathlib

import numpy as np

from coems_bench.models.simulation_models import SimulationConfig, SimulationRecord

_LOGGER = logging.getLogger(__name__)

RECORD_COLUMNS = ("time_s", "x_m", "y_inloop_m", "y_outloop_m", "feedback_force_n")
CSV_FORMAT = "%.17g"


def sidecar_path(csv_path: pathlib.Path) -> pathlib.Path:
    return csv_path.with_suffix(".json")


def _mode_column(label: str) -> str:
    return f"x_{label}_m"


def write_record(record: SimulationRecord, csv_path: pathlib.Path) -> list[pathlib.Path]:
    """
    Writes the record as columnar CSV plus a JSON sidecar echoing the configuration.
    Multi-mode records carry one extra x_<label>_m column per mode.

    :return: paths written, CSV first
    """
    columns = list(RECORD_COLUMNS)
    data = [record.time, record.displacement, record.inloop_signal, record.outloop_signal, record.feedback_force]
    if len(record.config.modes) > 1:
        for mode, trace in zip(record.config.modes, record.mode_displacements):
            columns.append(_mode_column(mode.label))
            data.append(trace)

    csv_path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(csv_path, np.column_stack(data), delimiter=",", header=",".join(columns), comments="", fmt=CSV_FORMAT)

    metadata = {
        "columns": columns,
        "dt_s": record.dt,
        "n_samples": record.n_samples,
        "seed": record.config.seed,
        "config": record.config.model_dump(mode="json"),
    }
    meta_path = sidecar_path(csv_path)
    meta_path.write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")
    _LOGGER.info(f"Wrote {record.n_samples} samples to {csv_path}")
    return [csv_path, meta_path]


def read_record(csv_path: pathlib.Path) -> SimulationRecord:
    """
    Loads a record written by write_record.

    :raises ValueError: If the CSV columns do not match the sidecar
    """
    metadata = json.loads(sidecar_path(csv_path).read_text())
    config = SimulationConfig.model_validate(metadata["config"])

    header = csv_path.read_text().split("\n", 1)[0].strip().split(",")
    if header != metadata["columns"]:
        raise ValueError(f"CSV header {header} does not match sidecar columns {metadata['columns']}")
    table = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)

    if len(config.modes) > 1:
        mode_displacements = table[:, len(RECORD_COLUMNS) :].T
    else:
        mode_displacements = table[:, 1][np.newaxis, :]
    return SimulationRecord(
        dt=float(metadata["dt_s"]),
        displacement=table[:, 1],
        mode_displacements=np.ascontiguousarray(mode_displacements),
        inloop_signal=table[:, 2],
        outloop_signal=table[:, 3],
        feedback_force=table[:, 4],
        config=config,
    )
