#!/usr/bin/env python3
import math

import pydantic
import pytest

from coems_bench.models.bench_models import BenchConfig, CoolingPoint, ProbeEntry
from coems_bench.physics.feedback_theory import snr


class TestBenchConfig:
    def test_converts_to_simulation_config(self, bench_document):
        config = BenchConfig.model_validate(bench_document)
        simulation = config.to_simulation_config(gain=8.0, seed=3)

        assert simulation.feedback.gain == 8.0
        assert simulation.seed == 3
        assert simulation.modes[0].resonance == pytest.approx(2.0 * math.pi * 10_000.0)
        assert simulation.n_samples == 800_000
        assert snr(simulation.modes[0], simulation.env, simulation.inloop_probe) == pytest.approx(100.0)

    def test_defaults_come_from_config(self, bench_document):
        config = BenchConfig.model_validate(bench_document)
        simulation = config.to_simulation_config()
        assert simulation.feedback.gain == 0.0
        assert simulation.seed == 11
        assert simulation.drive is None

    def test_configured_snr(self, bench_document):
        assert BenchConfig.model_validate(bench_document).configured_snr() == 100.0

    def test_configured_snr_from_floor(self, bench_document):
        config = BenchConfig.model_validate(bench_document)
        floor = config.probes()[0].noise_floor_single_sided
        bench_document["inloop_probe"] = {"noise_floor_m2_per_hz": floor / 2.0}
        assert BenchConfig.model_validate(bench_document).configured_snr() == pytest.approx(200.0)

    def test_unknown_keys_rejected(self, bench_document):
        bench_document["environment"]["bath_temperature_c"] = 27.0
        with pytest.raises(pydantic.ValidationError, match="Extra inputs"):
            BenchConfig.model_validate(bench_document)

    def test_unknown_target_mode(self, bench_document):
        bench_document["feedback"]["target_mode"] = "missing"
        with pytest.raises(pydantic.ValidationError, match="target_mode"):
            BenchConfig.model_validate(bench_document)

    def test_segment_length_power_of_two(self, bench_document):
        bench_document["analysis"]["segment_length"] = 30000
        with pytest.raises(pydantic.ValidationError, match="power of two"):
            BenchConfig.model_validate(bench_document)

    def test_negative_gain_in_sweep(self, bench_document):
        bench_document["sweep"]["gains"] = [0.0, -1.0]
        with pytest.raises(pydantic.ValidationError, match="non-negative"):
            BenchConfig.model_validate(bench_document)


@pytest.mark.parametrize("entry", [{}, {"snr": 100.0, "noise_floor_m2_per_hz": 1e-30}])
def test_sensor_entry_needs_exactly_one_floor(entry):
    with pytest.raises(pydantic.ValidationError, match="exactly one"):
        ProbeEntry.model_validate(entry)


class TestCoolingPoint:
    def test_theory_columns(self):
        point = CoolingPoint.from_measurement(8.0, 55.0, -3.0, 300.0, 100.0)
        assert point.t_theory_eq1_k == pytest.approx(54.667, rel=1e-4)
        assert point.t_theory_inloop_k == pytest.approx(300.0 * (1.0 - 0.8) / 9.0)
        assert point.unphysical

    def test_physical(self):
        assert not CoolingPoint.from_measurement(0.0, 300.0, 300.0, 300.0, 100.0).unphysical
