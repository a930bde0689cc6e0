"""
Gain sweep: simulate every (gain, replicate), estimate both channels' spectra, and infer the
in-loop and out-of-loop temperatures against the zero-gain reference.
"""

import logging
import math
import pathlib
import typing

import numpy as np

from coems_bench.artifacts.run_directory import RunDirectory
from coems_bench.bench.parallel import ordered_map
from coems_bench.models.bench_models import AnalysisEntry, BenchConfig, CoolingPoint
from coems_bench.models.simulation_models import SimulationConfig
from coems_bench.models.spectrum_models import Psd
from coems_bench.physics.feedback_theory import loop_imprinted_floor
from coems_bench.simulation.langevin import simulate
from coems_bench.simulation.record_io import write_record
from coems_bench.spectral.temperature import adaptive_band, band_area, estimate_band_floor, infer_temperature
from coems_bench.spectral.welch import ensemble_average, welch_psd
from coems_bench.utils.base_types import LoopSide

_LOGGER = logging.getLogger(__name__)

COOLING_COLUMNS = ("gain", "t_outloop_k", "t_inloop_k", "t_theory_eq1_k", "t_theory_inloop_k", "unphysical")
CURVE_FILE = "cooling_curve.csv"
REFERENCE_GAIN = 0.0


class SweepRunError(RuntimeError):
    def __init__(self, cause: BaseException, partial_points: list[CoolingPoint]) -> None:
        self.cause = cause
        self.partial_points = partial_points
        super().__init__(f"Sweep aborted after {len(partial_points)} gains: {cause}")


class CoolingTask(typing.NamedTuple):
    config: SimulationConfig
    analysis: AnalysisEntry
    record_path: typing.Optional[pathlib.Path] = None
    """When set, the time series is written there as CSV plus sidecar"""


class ChannelSpectra(typing.NamedTuple):
    inloop: Psd
    outloop: Psd
    record_files: tuple[pathlib.Path, ...] = ()

    def side(self, side: LoopSide) -> Psd:
        return self.inloop if side == "inloop" else self.outloop


def psd_file_name(gain: float, side: LoopSide) -> str:
    return f"psd_gain_{gain:g}_{side}.csv"


def record_file_name(gain: float) -> str:
    return f"record_gain_{gain:g}.csv"


def run_cooling_task(task: CoolingTask) -> ChannelSpectra:
    """One simulation and its two Welch spectra. Module-level so process pools can pickle it."""
    analysis = task.analysis
    _LOGGER.info(f"Run start: gain {task.config.feedback.gain:g}, seed {task.config.seed}")
    record = simulate(task.config)
    inloop, outloop = (
        welch_psd(
            record.signal(side),
            record.sample_rate,
            analysis.segment_length,
            analysis.overlap_fraction,
            analysis.window,
        )
        for side in ("inloop", "outloop")
    )
    record_files = tuple(write_record(record, task.record_path)) if task.record_path is not None else ()
    _LOGGER.info(f"Run finish: gain {task.config.feedback.gain:g}, seed {task.config.seed}")
    return ChannelSpectra(inloop, outloop, record_files)


class CoolingSweep:
    """
    Replicate r of every gain uses seed + r, so gains share their thermal and sensor noise draws
    and the output does not depend on scheduling.
    """

    def __init__(self, config: BenchConfig, jobs: int = 1):
        self.config = config
        self.jobs = jobs
        self.mode = config.controlled_mode()
        self.bath_temperature = config.environment.bath_temperature_k
        self.snr = config.configured_snr()
        self.inloop_probe, self.outloop_probe = config.probes()

    def tasks(
        self,
        gains: typing.Sequence[float],
        seeds_per_gain: int,
        seed: int,
        record_dir: typing.Optional[pathlib.Path] = None,
    ) -> list[CoolingTask]:
        """With record_dir, the first replicate of each gain also writes its time series there."""
        return [
            CoolingTask(
                self.config.to_simulation_config(gain=gain, seed=seed + replicate),
                self.config.analysis,
                record_dir / record_file_name(gain) if record_dir is not None and replicate == 0 else None,
            )
            for gain in gains
            for replicate in range(seeds_per_gain)
        ]

    def _floor(self, psd: Psd, side: LoopSide, band: tuple[float, float], gain: float) -> float:
        """
        Single-sided floor subtracted before integrating. The configured in-loop floor is taken as
        the closed loop imprints it, averaged over the band edges.
        """
        if self.config.analysis.floor_method == "band-edge":
            return estimate_band_floor(psd, band)
        if side == "outloop":
            return self.outloop_probe.noise_floor_single_sided
        feedback = self.config.feedback
        if not feedback.enabled or gain <= 0:
            return self.inloop_probe.noise_floor_single_sided
        edges = 2.0 * math.pi * np.array(band)
        floor = loop_imprinted_floor(self.mode, gain, feedback.delay_periods, self.inloop_probe, edges)
        return 2.0 * float(np.mean(floor))

    def reference_areas(self, reference: ChannelSpectra) -> dict[LoopSide, float]:
        band = adaptive_band(self.mode, REFERENCE_GAIN, self.config.analysis.band_linewidths)
        areas: dict[LoopSide, float] = {}
        for side in typing.get_args(LoopSide):
            psd = reference.side(side)
            areas[side] = band_area(psd, self._floor(psd, side, band, REFERENCE_GAIN), band)
        return areas

    def cooling_point(self, gain: float, spectra: ChannelSpectra, references: dict[LoopSide, float]) -> CoolingPoint:
        band = adaptive_band(self.mode, gain, self.config.analysis.band_linewidths)
        temperatures = {}
        for side in typing.get_args(LoopSide):
            psd = spectra.side(side)
            estimate = infer_temperature(
                psd, self._floor(psd, side, band, gain), band, references[side], self.bath_temperature
            )
            temperatures[side] = estimate.value
        return CoolingPoint.from_measurement(
            gain, temperatures["outloop"], temperatures["inloop"], self.bath_temperature, self.snr
        )

    def run(
        self,
        gains: typing.Sequence[float],
        run_dir: RunDirectory,
        seeds_per_gain: typing.Optional[int] = None,
        seed: typing.Optional[int] = None,
        save_records: bool = False,
    ) -> list[CoolingPoint]:
        """
        Runs the sweep and writes cooling_curve.csv plus per-gain spectra. The zero-gain reference is
        always simulated first; it appears in the table only when requested. With save_records the first
        replicate of every simulated gain is also kept as a time-series record.

        :raises SweepRunError: If any run fails; the points finished so far are written first
        """
        replicates = seeds_per_gain if seeds_per_gain is not None else self.config.analysis.seeds_per_gain
        base_seed = seed if seed is not None else self.config.simulation.seed
        requested = list(gains)
        ordered = [REFERENCE_GAIN] + [g for g in requested if g != REFERENCE_GAIN]
        tasks = self.tasks(ordered, replicates, base_seed, run_dir.path if save_records else None)
        _LOGGER.info(f"Cooling sweep over gains {ordered}, {replicates} replicate(s), seed {base_seed}")

        points: dict[float, CoolingPoint] = {}
        references: dict[LoopSide, float] = {}
        pending: list[ChannelSpectra] = []
        try:
            for index, spectra in enumerate(ordered_map(run_cooling_task, tasks, self.jobs)):
                run_dir.register(spectra.record_files)
                pending.append(spectra)
                if len(pending) < replicates:
                    continue
                gain = ordered[index // replicates]
                averaged = ChannelSpectra(
                    ensemble_average([s.inloop for s in pending]), ensemble_average([s.outloop for s in pending])
                )
                pending = []
                if gain == REFERENCE_GAIN:
                    references = self.reference_areas(averaged)
                if gain in requested:
                    for side in typing.get_args(LoopSide):
                        run_dir.write_psd(psd_file_name(gain, side), averaged.side(side))
                    points[gain] = self.cooling_point(gain, averaged, references)
                    _LOGGER.info(
                        f"g={gain:g}: T_out {points[gain].t_outloop_k:.4g} K, T_in {points[gain].t_inloop_k:.4g} K"
                    )
        except Exception as e:
            finished = [points[g] for g in requested if g in points]
            _LOGGER.error(f"Cooling sweep failed after {len(finished)} gains: {e}", exc_info=True)
            self.write_curve(finished, run_dir)
            raise SweepRunError(e, finished) from e

        result = [points[g] for g in requested]
        self.write_curve(result, run_dir)
        return result

    @staticmethod
    def write_curve(points: list[CoolingPoint], run_dir: RunDirectory) -> None:
        rows = np.array(
            [
                (p.gain, p.t_outloop_k, p.t_inloop_k, p.t_theory_eq1_k, p.t_theory_inloop_k, float(p.unphysical))
                for p in points
            ]
        ).reshape(len(points), len(COOLING_COLUMNS))
        run_dir.write_table(CURVE_FILE, COOLING_COLUMNS, rows)
