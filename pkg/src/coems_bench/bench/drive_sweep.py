import logging
import math
import typing

import numpy as np
from scipy import stats

from coems_bench.artifacts.run_directory import RunDirectory
from coems_bench.bench.parallel import ordered_map
from coems_bench.models.bench_models import AnalysisEntry, BenchConfig, DriveEntry
from coems_bench.models.physics_models import MechanicalMode
from coems_bench.models.simulation_models import SimulationConfig
from coems_bench.physics.actuation import gradient_force_from_peak
from coems_bench.simulation.langevin import simulate
from coems_bench.spectral.calibration import tone_peak_asd
from coems_bench.spectral.welch import equivalent_noise_bandwidth, welch_psd

_LOGGER = logging.getLogger(__name__)

SWEEP_FILE = "drive_sweep.csv"
SUMMARY_FILE = "drive_summary.json"


class MissingDriveError(ValueError):
    def __init__(self) -> None:
        super().__init__("Drive sweep needs a drive block with force_per_volt_n_per_v in the config")


class DriveTask(typing.NamedTuple):
    config: SimulationConfig
    analysis: AnalysisEntry
    mode: MechanicalMode


class DriveMeasurement(typing.NamedTuple):
    peak_asd: float
    """m/sqrt(Hz), gradient-force convention"""
    force_peak_to_peak: float
    """N"""


def run_drive_task(task: DriveTask) -> DriveMeasurement:
    """Simulates one drive setting and reads the tone on the out-of-loop channel."""
    assert task.config.drive is not None
    _LOGGER.info(f"Run start: {task.mode.label} at {task.config.drive.voltage:g} V_rms")
    record = simulate(task.config)
    analysis = task.analysis
    psd = welch_psd(
        record.outloop_signal, record.sample_rate, analysis.segment_length, analysis.overlap_fraction, analysis.window
    )
    peak = tone_peak_asd(psd, task.config.drive.frequency / (2.0 * math.pi))
    force = gradient_force_from_peak(task.mode, 2.0 * math.pi * psd.rbw, peak)
    _LOGGER.info(f"Run finish: {task.mode.label}, peak {peak:.4g} m/rtHz, force {force:.4g} N")
    return DriveMeasurement(peak_asd=peak, force_peak_to_peak=force)


def linear_fit(x: typing.Sequence[float], y: typing.Sequence[float]) -> dict[str, typing.Optional[float]]:
    if len(x) < 2 or np.ptp(x) == 0:
        return {"slope": None, "intercept": None, "r_squared": None}
    regression = stats.linregress(x, y)
    return {
        "slope": float(regression.slope),
        "intercept": float(regression.intercept),
        "r_squared": float(regression.rvalue**2),
    }


class DriveSweep:
    """
    Drives each mode on its resonance at every voltage in turn; all runs share one seed so the
    thermal background is common across voltages.
    """

    def __init__(self, config: BenchConfig, jobs: int = 1):
        if config.drive is None:
            raise MissingDriveError()
        self.config = config
        self.drive: DriveEntry = config.drive
        self.jobs = jobs

    def driven_modes(self) -> list[MechanicalMode]:
        if self.drive.target_mode is not None:
            return [self.config.mode(self.drive.target_mode)]
        return self.config.mechanical_modes()

    def tasks(self, voltages: typing.Sequence[float], seed: int) -> list[DriveTask]:
        return [
            DriveTask(
                self.config.to_simulation_config(seed=seed, drive=self.drive.to_drive(mode, voltage)),
                self.config.analysis,
                mode,
            )
            for voltage in voltages
            for mode in self.driven_modes()
        ]

    @staticmethod
    def columns(modes: typing.Sequence[MechanicalMode]) -> list[str]:
        columns = ["voltage_vrms"]
        for mode in modes:
            columns += [f"peak_asd_{mode.label}_m_per_rthz", f"force_pp_{mode.label}_n"]
        return columns

    def run(
        self, voltages: typing.Sequence[float], run_dir: RunDirectory, seed: typing.Optional[int] = None
    ) -> dict[str, typing.Any]:
        """
        Writes drive_sweep.csv (one row per voltage) and drive_summary.json with linear fits of peak
        ASD and inferred force against voltage for every driven mode.
        """
        modes = self.driven_modes()
        base_seed = seed if seed is not None else self.config.simulation.seed
        tasks = self.tasks(voltages, base_seed)
        _LOGGER.info(f"Drive sweep over {list(voltages)} V_rms for {[m.label for m in modes]}")

        measurements = list(ordered_map(run_drive_task, tasks, self.jobs))
        table = np.array(measurements, dtype=float).reshape(len(voltages), 2 * len(modes))
        rows = np.column_stack([np.asarray(voltages, dtype=float), table])
        run_dir.write_table(SWEEP_FILE, self.columns(modes), rows)

        analysis = self.config.analysis
        summary: dict[str, typing.Any] = {
            "force_per_volt_n_per_v": self.drive.force_per_volt_n_per_v,
            "rbw_hz": equivalent_noise_bandwidth(
                analysis.window, analysis.segment_length, self.config.simulation.sample_rate_hz
            ),
            "modes": {},
        }
        for j, mode in enumerate(modes):
            peaks, forces = table[:, 2 * j], table[:, 2 * j + 1]
            summary["modes"][mode.label] = {
                "peak_asd_vs_voltage": linear_fit(list(voltages), list(peaks)),
                "force_vs_voltage": linear_fit(list(voltages), list(forces)),
            }
        run_dir.write_json(SUMMARY_FILE, summary)
        return summary
