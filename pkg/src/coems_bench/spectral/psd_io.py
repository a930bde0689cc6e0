import json
import logging
import pathlib

import numpy as np
import pydantic

from coems_bench.models.spectrum_models import HANN_RBW_BINS, Psd

_LOGGER = logging.getLogger(__name__)

PSD_COLUMNS = ("frequency_hz", "psd_m2_per_hz")
CSV_FORMAT = "%.17g"


class PsdParseError(ValueError):
    def __init__(self, path: pathlib.Path, message: str) -> None:
        self.path = path
        super().__init__(f"{path}: {message}")


def sidecar_path(csv_path: pathlib.Path) -> pathlib.Path:
    return csv_path.with_suffix(".json")


def write_psd(psd: Psd, csv_path: pathlib.Path) -> list[pathlib.Path]:
    """
    Writes (frequency_hz, psd_m2_per_hz) rows and a JSON sidecar with rbw, window, averages and
    calibration scale.

    :return: paths written, CSV first
    """
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        csv_path,
        np.column_stack([psd.frequencies, psd.values]),
        delimiter=",",
        header=",".join(PSD_COLUMNS),
        comments="",
        fmt=CSV_FORMAT,
    )
    meta_path = sidecar_path(csv_path)
    metadata = {
        "rbw_hz": psd.rbw,
        "window": psd.window,
        "segments_averaged": psd.segments_averaged,
        "calibration_scale": psd.calibration_scale,
    }
    meta_path.write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")
    return [csv_path, meta_path]


def read_psd(csv_path: pathlib.Path) -> Psd:
    """
    Reads a spectrum CSV. Without a sidecar the spectrum is taken as a single Hann estimate.

    :raises PsdParseError: If the file is missing, empty, has the wrong header, or holds an invalid spectrum
    """
    try:
        text = csv_path.read_text()
    except OSError as e:
        raise PsdParseError(csv_path, f"cannot read file ({e})") from e
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise PsdParseError(csv_path, "file is empty")
    header = tuple(column.strip() for column in lines[0].split(","))
    if header != PSD_COLUMNS:
        raise PsdParseError(csv_path, f"expected header {','.join(PSD_COLUMNS)}, got {lines[0]}")

    try:
        table = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
    except ValueError as e:
        raise PsdParseError(csv_path, f"malformed row ({e})") from e
    if table.shape[0] < 2 or table.shape[1] != 2:
        raise PsdParseError(csv_path, "need at least two rows of two columns")

    frequencies, values = table[:, 0], table[:, 1]
    meta_path = sidecar_path(csv_path)
    if meta_path.exists():
        try:
            metadata = json.loads(meta_path.read_text())
        except json.JSONDecodeError as e:
            raise PsdParseError(meta_path, f"invalid JSON ({e})") from e
    else:
        _LOGGER.info(f"No sidecar for {csv_path}; assuming a single Hann estimate")
        metadata = {"rbw_hz": HANN_RBW_BINS * float(frequencies[1] - frequencies[0]), "window": "hann"}

    try:
        return Psd(
            frequencies=frequencies,
            values=values,
            rbw=metadata["rbw_hz"],
            window=metadata.get("window", "hann"),
            segments_averaged=metadata.get("segments_averaged", 1),
            calibration_scale=metadata.get("calibration_scale", 1.0),
        )
    except (pydantic.ValidationError, KeyError) as e:
        raise PsdParseError(csv_path, f"invalid spectrum ({e})") from e
