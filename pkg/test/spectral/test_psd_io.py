#!/usr/bin/env python3
import numpy as np
import pytest

from coems_bench.spectral.psd_io import PSD_COLUMNS, PsdParseError, read_psd, sidecar_path, write_psd

from ..test_utils.spectra import synthetic_psd, uniform_grid

HEADER = ",".join(PSD_COLUMNS)


def write_csv(tmp_path, text):
    path = tmp_path / "spectrum.csv"
    path.write_text(text)
    return path


def test_written_spectrum_reads_back(tmp_path):
    grid = uniform_grid(100.0, 200.0, 2.0)
    psd = synthetic_psd(grid, np.linspace(1e-30, 2e-30, grid.size), 16).scaled(3.0)
    path = tmp_path / "spectrum.csv"
    write_psd(psd, path)

    loaded = read_psd(path)
    np.testing.assert_array_equal(loaded.values, psd.values)
    assert loaded.rbw == psd.rbw
    assert loaded.segments_averaged == 16
    assert loaded.calibration_scale == pytest.approx(3.0)


def test_without_sidecar_assumes_hann(tmp_path):
    path = write_csv(tmp_path, f"{HEADER}\n0,1e-30\n10,2e-30\n20,1e-30\n")
    psd = read_psd(path)
    assert psd.rbw == pytest.approx(15.0)
    assert psd.window == "hann"
    assert psd.segments_averaged == 1


@pytest.mark.parametrize(
    "text, message",
    [
        ("", "empty"),
        ("f,S\n0,1\n1,1\n", "expected header"),
        (f"{HEADER}\n0,1e-30\n10,abc\n", "malformed"),
        (f"{HEADER}\n0,1e-30\n", "two rows"),
        (f"{HEADER}\n0,1e-30\n10,-1e-30\n", "invalid spectrum"),
        (f"{HEADER}\n0,1e-30\n10,1e-30\n30,1e-30\n", "invalid spectrum"),
    ],
)
def test_parse_errors(tmp_path, text, message):
    with pytest.raises(PsdParseError, match=message):
        read_psd(write_csv(tmp_path, text))


def test_missing_file(tmp_path):
    with pytest.raises(PsdParseError, match="cannot read"):
        read_psd(tmp_path / "absent.csv")


def test_corrupt_sidecar(tmp_path):
    path = write_csv(tmp_path, f"{HEADER}\n0,1e-30\n10,1e-30\n")
    sidecar_path(path).write_text("{not json")
    with pytest.raises(PsdParseError, match="invalid JSON"):
        read_psd(path)
