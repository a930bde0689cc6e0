#!/usr/bin/env python3
from unittest import mock

import numpy as np
import pytest

from coems_bench.artifacts.run_directory import RunDirectory
from coems_bench.bench.config_loader import load_bench_config
from coems_bench.bench.cooling_sweep import (
    CURVE_FILE,
    CoolingSweep,
    SweepRunError,
    psd_file_name,
    record_file_name,
    run_cooling_task,
)
from coems_bench.models.bench_models import BenchConfig
from coems_bench.models.spectrum_models import Psd
from coems_bench.physics.feedback_theory import loop_imprinted_floor
from coems_bench.physics.oscillator import thermal_peak
from coems_bench.simulation.propagator import UnstableSimulationError
from coems_bench.spectral.psd_io import read_psd
from coems_bench.spectral.temperature import adaptive_band

from ..test_utils.configs import CONFIG_DIR, small_bench_config, tiny_bench_config
from ..test_utils.spectra import uniform_grid


@pytest.fixture(scope="module")
def sweep(tmp_path_factory):
    run_dir = RunDirectory(tmp_path_factory.mktemp("sweep"), "cooling-sweep", {})
    points = CoolingSweep(BenchConfig.model_validate(small_bench_config())).run([0.0, 8.0, 20.0], run_dir)
    return run_dir, {point.gain: point for point in points}


class TestCoolingCurve:
    def test_reference_gain_reads_bath_temperature(self, sweep):
        _, points = sweep
        assert points[0.0].t_outloop_k == pytest.approx(300.0, rel=1e-12)
        assert points[0.0].t_inloop_k == pytest.approx(300.0, rel=1e-12)
        assert not points[0.0].unphysical

    def test_outloop_follows_cooling_law(self, sweep):
        _, points = sweep
        assert points[8.0].t_theory_eq1_k == pytest.approx(54.667, rel=1e-4)
        assert points[8.0].t_outloop_k == pytest.approx(54.667, rel=0.12)

    def test_inloop_goes_unphysical_past_optimum(self, sweep):
        _, points = sweep
        assert points[20.0].t_theory_inloop_k == pytest.approx(-48.5714, rel=1e-4)
        assert points[20.0].t_inloop_k < 0
        assert points[20.0].unphysical
        assert points[20.0].t_outloop_k > 54.3

    def test_artifacts(self, sweep):
        run_dir, _ = sweep
        lines = (run_dir.path / CURVE_FILE).read_text().splitlines()
        assert lines[0] == "gain,t_outloop_k,t_inloop_k,t_theory_eq1_k,t_theory_inloop_k,unphysical"
        assert len(lines) == 4
        for gain in (0.0, 8.0, 20.0):
            for side in ("inloop", "outloop"):
                assert (run_dir.path / psd_file_name(gain, side)).exists()


class TestBandFloor:
    @pytest.fixture
    def flat(self):
        frequencies = uniform_grid(0.0, 30_000.0, 5.0)
        return Psd(frequencies=frequencies, values=np.full(frequencies.shape, 3e-22), rbw=7.5)

    def test_configured_is_default(self, flat):
        sweep = CoolingSweep(BenchConfig.model_validate(small_bench_config()))
        band = adaptive_band(sweep.mode, 8.0)
        assert sweep.config.analysis.floor_method == "configured"
        assert sweep._floor(flat, "outloop", band, 8.0) == sweep.outloop_probe.noise_floor_single_sided
        assert sweep._floor(flat, "inloop", band, 0.0) == sweep.inloop_probe.noise_floor_single_sided

    def test_inloop_floor_carries_loop_imprint(self, flat):
        sweep = CoolingSweep(BenchConfig.model_validate(small_bench_config()))
        band = adaptive_band(sweep.mode, 8.0)
        edges = loop_imprinted_floor(sweep.mode, 8.0, 0.25, sweep.inloop_probe, 2.0 * np.pi * np.array(band))
        floor = sweep._floor(flat, "inloop", band, 8.0)
        assert floor == pytest.approx(float(np.mean(2.0 * edges)))
        assert floor > sweep.inloop_probe.noise_floor_single_sided

    def test_band_edge_reads_the_spectrum(self, flat):
        document = small_bench_config()
        document["analysis"]["floor_method"] = "band-edge"
        sweep = CoolingSweep(BenchConfig.model_validate(document))
        assert sweep._floor(flat, "inloop", adaptive_band(sweep.mode, 8.0), 8.0) == pytest.approx(3e-22)


def test_psd_file_name():
    assert psd_file_name(8.0, "inloop") == "psd_gain_8_inloop.csv"
    assert psd_file_name(0.5, "outloop") == "psd_gain_0.5_outloop.csv"


def test_reference_simulated_even_when_not_requested(tmp_path):
    run_dir = RunDirectory(tmp_path, "cooling-sweep", {})
    points = CoolingSweep(BenchConfig.model_validate(tiny_bench_config())).run([8.0], run_dir)
    assert [p.gain for p in points] == [8.0]
    assert not (run_dir.path / psd_file_name(0.0, "inloop")).exists()


def test_replicates_share_seeds_across_gains():
    sweep = CoolingSweep(BenchConfig.model_validate(tiny_bench_config()))
    tasks = sweep.tasks([0.0, 8.0], seeds_per_gain=3, seed=100)
    assert [t.config.seed for t in tasks] == [100, 101, 102, 100, 101, 102]
    assert [t.config.feedback.gain for t in tasks] == [0.0] * 3 + [8.0] * 3


def test_first_replicate_keeps_the_record(tmp_path):
    sweep = CoolingSweep(BenchConfig.model_validate(tiny_bench_config()))
    tasks = sweep.tasks([0.0, 8.0], seeds_per_gain=2, seed=100, record_dir=tmp_path)
    assert [t.record_path for t in tasks] == [
        tmp_path / record_file_name(0.0),
        None,
        tmp_path / record_file_name(8.0),
        None,
    ]
    assert all(t.record_path is None for t in sweep.tasks([8.0], seeds_per_gain=2, seed=100))


def test_failure_keeps_finished_points(tmp_path):
    def fail_at_high_gain(task):
        if task.config.feedback.gain == 20.0:
            raise UnstableSimulationError(1.01, "closed feedback loop is unstable")
        return run_cooling_task(task)

    run_dir = RunDirectory(tmp_path, "cooling-sweep", {})
    sweep = CoolingSweep(BenchConfig.model_validate(tiny_bench_config()))
    with mock.patch("coems_bench.bench.cooling_sweep.run_cooling_task", side_effect=fail_at_high_gain):
        with pytest.raises(SweepRunError) as e:
            sweep.run([0.0, 8.0, 20.0], run_dir)

    assert isinstance(e.value.cause, UnstableSimulationError)
    assert [p.gain for p in e.value.partial_points] == [0.0, 8.0]
    assert len((run_dir.path / CURVE_FILE).read_text().splitlines()) == 3


def test_worker_count_does_not_change_output(tmp_path):
    config = BenchConfig.model_validate(tiny_bench_config())
    outputs = []
    for jobs in (1, 2):
        run_dir = RunDirectory(tmp_path / f"jobs{jobs}", "cooling-sweep", {})
        CoolingSweep(config, jobs).run([0.0, 8.0], run_dir, seeds_per_gain=2)
        outputs.append((run_dir.path / CURVE_FILE).read_bytes())
    assert outputs[0] == outputs[1]


@pytest.mark.slow
def test_transducer_cooling_config(tmp_path):
    config = load_bench_config(CONFIG_DIR / "transducer_cooling.json")
    run_dir = RunDirectory(tmp_path, "cooling-sweep", {})
    points = CoolingSweep(config, jobs=4).run([0.0, 8.0], run_dir, seeds_per_gain=4)
    assert points[1].t_outloop_k == pytest.approx(points[1].t_theory_eq1_k, rel=0.15)


DESK_GAINS = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0]


@pytest.fixture(scope="module")
def desk_sweep(tmp_path_factory):
    config = load_bench_config(CONFIG_DIR / "desk_cooling.json")
    run_dir = RunDirectory(tmp_path_factory.mktemp("desk"), "cooling-sweep", {})
    points = CoolingSweep(config, jobs=4).run(DESK_GAINS, run_dir, seeds_per_gain=16)
    return config, run_dir, {point.gain: point for point in points}


@pytest.mark.slow
def test_desk_cooling_curve(desk_sweep):
    _, _, points = desk_sweep
    for gain in DESK_GAINS:
        assert points[gain].t_outloop_k == pytest.approx(points[gain].t_theory_eq1_k, rel=0.10), gain
    for gain in (1.0, 2.0, 4.0):
        assert points[gain].t_inloop_k == pytest.approx(points[gain].t_theory_inloop_k, rel=0.10), gain
    assert points[8.0].t_inloop_k > 0
    for gain in (16.0, 32.0):
        assert points[gain].t_inloop_k < 0
        assert points[gain].unphysical


@pytest.mark.slow
def test_desk_inloop_squashing(desk_sweep):
    config, run_dir, _ = desk_sweep
    mode = config.controlled_mode()
    inloop_floor = config.probes()[0].noise_floor_single_sided
    peak = 2.0 * thermal_peak(mode, config.environment_model())
    for gain in (8.0, 16.0, 32.0):
        psd = read_psd(run_dir.path / psd_file_name(gain, "inloop"))
        center = psd.nearest_index(mode.resonance_hz)
        on_resonance = float(np.mean(psd.values[center - 2 : center + 3]))
        assert on_resonance * (1.0 + gain) ** 2 == pytest.approx(peak + inloop_floor, rel=0.15), gain
        if gain > 8.0:
            assert on_resonance < 2.0 * inloop_floor

        below = psd.values[psd.band_mask((mode.resonance_hz - 40.0, mode.resonance_hz - 20.0))]
        above = psd.values[psd.band_mask((mode.resonance_hz + 20.0, mode.resonance_hz + 40.0))]
        assert np.mean(below) == pytest.approx(np.mean(above), rel=0.15), gain
