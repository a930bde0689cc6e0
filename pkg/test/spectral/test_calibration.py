#!/usr/bin/env python3
import math

import numpy as np
import pytest

from coems_bench.models.bench_models import BenchConfig
from coems_bench.models.physics_models import DriveConfig
from coems_bench.physics.oscillator import susceptibility
from coems_bench.simulation.langevin import simulate
from coems_bench.spectral.calibration import (
    ReferenceTone,
    ReferenceToneNotFoundError,
    apply_calibration,
    calibrate,
    tone_level_asd,
    tone_peak_asd,
    tone_power,
)
from coems_bench.spectral.welch import welch_psd

from ..test_utils.configs import small_bench_config

SAMPLE_RATE = 1000.0
SEGMENT = 1024
TONE_HZ = 100.3


@pytest.fixture
def series():
    t = np.arange(2**16) / SAMPLE_RATE
    noise = np.random.default_rng(9).normal(scale=0.01, size=t.shape)
    return np.cos(2.0 * math.pi * TONE_HZ * t) + noise


@pytest.fixture
def reference():
    rbw = 1.5 * SAMPLE_RATE / SEGMENT
    return ReferenceTone(frequency=TONE_HZ, level_asd=tone_level_asd(1.0, rbw))


def test_tone_power_off_bin(series):
    psd = welch_psd(series, SAMPLE_RATE, SEGMENT)
    assert tone_power(psd, TONE_HZ) == pytest.approx(0.5, rel=0.01)


def test_tone_peak_asd(series):
    psd = welch_psd(series, SAMPLE_RATE, SEGMENT)
    assert tone_peak_asd(psd, TONE_HZ) == pytest.approx(math.sqrt(0.125 / psd.rbw), rel=0.01)


def test_calibrated_channel_reads_unity(series, reference):
    psd = welch_psd(series, SAMPLE_RATE, SEGMENT)
    assert calibrate(psd, reference) == pytest.approx(1.0, rel=0.02)


def test_scale_undoes_gain_error(series, reference):
    raw = welch_psd(0.5 * series, SAMPLE_RATE, SEGMENT)
    scale = calibrate(raw, reference)
    assert scale == pytest.approx(4.0, rel=0.02)

    calibrated = apply_calibration(raw, scale)
    assert calibrated.calibration_scale == pytest.approx(scale)
    assert tone_power(calibrated, TONE_HZ) == pytest.approx(0.5, rel=0.02)


def test_missing_tone(reference):
    noise = np.random.default_rng(2).normal(size=2**16)
    with pytest.raises(ReferenceToneNotFoundError):
        calibrate(welch_psd(noise, SAMPLE_RATE, SEGMENT), reference)


def test_tone_outside_spectrum(series):
    psd = welch_psd(series, SAMPLE_RATE, SEGMENT)
    with pytest.raises(ReferenceToneNotFoundError, match="outside"):
        calibrate(psd, ReferenceTone(frequency=900.0, level_asd=1.0))


def test_non_positive_scale(series):
    with pytest.raises(ValueError):
        apply_calibration(welch_psd(series, SAMPLE_RATE, SEGMENT), 0.0)


def test_calibrate_simulated_channel(test_mode):
    document = small_bench_config(duration_s=1.0)
    document["outloop_probe"]["calibration_scale"] = 9.0
    config = BenchConfig.model_validate(document)
    amplitude = 1e-8
    omega = 2.0 * math.pi * 12_000.0
    force_amplitude = amplitude / float(np.abs(susceptibility(test_mode, omega)))
    drive = DriveConfig(voltage=1.0, force_per_volt=2.0 * force_amplitude, frequency=omega)

    record = simulate(config.to_simulation_config(drive=drive))
    raw = welch_psd(record.raw_channel("outloop"), record.sample_rate, config.analysis.segment_length)
    scale = calibrate(raw, ReferenceTone(frequency=12_000.0, level_asd=tone_level_asd(amplitude, raw.rbw)))
    assert scale == pytest.approx(9.0, rel=0.05)
