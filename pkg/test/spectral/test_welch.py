#!/usr/bin/env python3
import math

import numpy as np
import pytest

from coems_bench.models.bench_models import BenchConfig
from coems_bench.physics.oscillator import thermal_psd
from coems_bench.spectral.temperature import adaptive_band
from coems_bench.spectral.welch import SeriesTooShortError, ensemble_average, equivalent_noise_bandwidth, welch_psd

from ..test_utils.configs import small_bench_config
from ..test_utils.records import simulated_psd


@pytest.fixture
def white_noise():
    return np.random.default_rng(3).normal(scale=2.0, size=2**18)


class TestWelchPsd:
    def test_white_noise_level(self, white_noise):
        psd = welch_psd(white_noise, 1000.0, 1024)
        interior = psd.values[1:-1]
        assert np.mean(interior) == pytest.approx(2.0 * 4.0 / 1000.0, rel=0.02)

    def test_area_is_variance(self, white_noise):
        psd = welch_psd(white_noise, 1000.0, 1024)
        assert np.sum(psd.values) * psd.bin_width == pytest.approx(np.var(white_noise), rel=0.02)

    def test_hann_metadata(self, white_noise):
        psd = welch_psd(white_noise, 1000.0, 1024)
        assert psd.rbw == pytest.approx(1.5 * 1000.0 / 1024)
        assert psd.window == "hann"
        assert psd.segments_averaged == 511
        assert psd.frequencies[-1] == pytest.approx(500.0)

    def test_rectangular_window(self, white_noise):
        psd = welch_psd(white_noise, 1000.0, 1024, overlap_fraction=0.0, window="rectangular")
        assert psd.rbw == pytest.approx(1000.0 / 1024)
        assert psd.segments_averaged == 256

    def test_too_short(self):
        with pytest.raises(SeriesTooShortError) as e:
            welch_psd(np.zeros(100), 1000.0, 1024)
        assert e.value.segment_length == 1024

    def test_segment_not_power_of_two(self, white_noise):
        with pytest.raises(ValueError, match="power of two"):
            welch_psd(white_noise, 1000.0, 1000)

    def test_bad_overlap(self, white_noise):
        with pytest.raises(ValueError, match="Overlap"):
            welch_psd(white_noise, 1000.0, 1024, overlap_fraction=1.0)


def test_equivalent_noise_bandwidth():
    assert equivalent_noise_bandwidth("hann", 4096, 1e6) == pytest.approx(1.5 * 1e6 / 4096)
    assert equivalent_noise_bandwidth("rectangular", 4096, 1e6) == pytest.approx(1e6 / 4096)


class TestEnsembleAverage:
    def test_mean_and_segment_count(self, white_noise):
        first = welch_psd(white_noise[: 2**16], 1000.0, 1024)
        second = welch_psd(white_noise[2**16 : 2**17], 1000.0, 1024)
        averaged = ensemble_average([first, second])
        np.testing.assert_allclose(averaged.values, 0.5 * (first.values + second.values))
        assert averaged.segments_averaged == first.segments_averaged + second.segments_averaged

    def test_grids_must_match(self, white_noise):
        first = welch_psd(white_noise, 1000.0, 1024)
        second = welch_psd(white_noise, 1000.0, 2048)
        with pytest.raises(ValueError, match="frequency grid"):
            ensemble_average([first, second])

    def test_empty(self):
        with pytest.raises(ValueError):
            ensemble_average([])


@pytest.mark.slow
def test_simulated_outloop_matches_thermal_model(test_mode, room_temperature):
    document = small_bench_config()
    psd = simulated_psd(document, "outloop", range(16))
    floor = BenchConfig.model_validate(document).probes()[1].noise_floor_single_sided

    mask = psd.band_mask(adaptive_band(test_mode, 0.0, 5.0))
    model = 2.0 * thermal_psd(test_mode, room_temperature, 2.0 * math.pi * psd.frequencies[mask]) + floor
    groups = model.size // 4
    measured = psd.values[mask][: 4 * groups].reshape(groups, 4).mean(axis=1)
    expected = model[: 4 * groups].reshape(groups, 4).mean(axis=1)
    np.testing.assert_allclose(measured, expected, rtol=0.10)
