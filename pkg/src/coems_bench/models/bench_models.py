"""
JSON bench configuration and run records. Keys are SI with unit suffixes; converters produce the
internal domain types (angular frequencies, double-sided angular PSDs).
"""

import math
import typing

import pydantic

from coems_bench.models.physics_models import DriveConfig, Environment, FeedbackConfig, MechanicalMode, ProbeModel
from coems_bench.models.simulation_models import MAX_SEED, SimulationConfig
from coems_bench.physics.feedback_theory import (
    cooling_temperature,
    inferred_temperature_theory,
    noise_floor_for_snr,
    snr,
)
from coems_bench.utils.base_types import IntegratorName, IsoTimestamp, LoopSide, WindowName

FloorMethod = typing.Literal["band-edge", "configured"]
RunStatus = typing.Literal["complete", "partial", "failed"]


class _Entry(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(extra="forbid", frozen=True)


class ModeEntry(_Entry):
    label: str
    mass_kg: float = pydantic.Field(gt=0)
    resonance_hz: float = pydantic.Field(gt=0)
    damping_hz: float = pydantic.Field(gt=0)
    note: str = ""

    def to_mode(self) -> MechanicalMode:
        return MechanicalMode.from_hertz(self.label, self.mass_kg, self.resonance_hz, self.damping_hz)


class ProbeEntry(_Entry):
    """
    A probe's white floor, given either directly (single-sided, m^2/Hz) or as the peak SNR of the
    controlled mode's thermal spectrum.
    """

    noise_floor_m2_per_hz: typing.Optional[float] = pydantic.Field(default=None, ge=0)
    snr: typing.Optional[float] = pydantic.Field(default=None, gt=0)
    calibration_scale: float = pydantic.Field(default=1.0, gt=0)

    @pydantic.model_validator(mode="after")
    def check_one_floor(self) -> "ProbeEntry":
        if (self.noise_floor_m2_per_hz is None) == (self.snr is None):
            raise ValueError("Give exactly one of noise_floor_m2_per_hz and snr")
        return self

    def to_probe(self, label: LoopSide, mode: MechanicalMode, env: Environment) -> ProbeModel:
        if self.noise_floor_m2_per_hz is not None:
            return ProbeModel.from_single_sided(label, self.noise_floor_m2_per_hz, self.calibration_scale)
        assert self.snr is not None
        return ProbeModel(
            label=label, noise_floor=noise_floor_for_snr(mode, env, self.snr), calibration_scale=self.calibration_scale
        )


class EnvironmentEntry(_Entry):
    bath_temperature_k: float = pydantic.Field(ge=0)


class FeedbackEntry(_Entry):
    gain: float = pydantic.Field(default=0.0, ge=0)
    delay_periods: float = pydantic.Field(default=0.25, ge=0, lt=1)
    bandpass_center_hz: typing.Optional[float] = pydantic.Field(default=None, gt=0)
    bandpass_width_hz: typing.Optional[float] = pydantic.Field(default=None, gt=0)
    enabled: bool = True
    hold_compensation: bool = True
    target_mode: typing.Optional[str] = None

    def to_feedback(self, gain: typing.Optional[float] = None) -> FeedbackConfig:
        return FeedbackConfig(
            gain=self.gain if gain is None else gain,
            delay=self.delay_periods,
            bandpass_center=None if self.bandpass_center_hz is None else 2.0 * math.pi * self.bandpass_center_hz,
            bandpass_width=None if self.bandpass_width_hz is None else 2.0 * math.pi * self.bandpass_width_hz,
            enabled=self.enabled,
            hold_compensation=self.hold_compensation,
            target_mode=self.target_mode,
        )


class DriveEntry(_Entry):
    """
    Gradient-force drive. Without frequency_hz the drive sits on the resonance of the mode it targets.
    target_mode restricts drive sweeps to one mode; by default every mode is driven in turn.
    """

    voltage_vrms: float = pydantic.Field(default=0.0, ge=0)
    force_per_volt_n_per_v: float = pydantic.Field(ge=0)
    frequency_hz: typing.Optional[float] = pydantic.Field(default=None, gt=0)
    phase_rad: float = 0.0
    target_mode: typing.Optional[str] = None

    def to_drive(self, mode: MechanicalMode, voltage: typing.Optional[float] = None) -> DriveConfig:
        frequency = mode.resonance if self.frequency_hz is None else 2.0 * math.pi * self.frequency_hz
        return DriveConfig(
            voltage=self.voltage_vrms if voltage is None else voltage,
            force_per_volt=self.force_per_volt_n_per_v,
            frequency=frequency,
            phase=self.phase_rad,
        )


class SimulationEntry(_Entry):
    sample_rate_hz: float = pydantic.Field(gt=0)
    duration_s: float = pydantic.Field(gt=0)
    seed: int = pydantic.Field(default=0, ge=0, le=MAX_SEED)
    integrator: IntegratorName = "exact-gaussian"


class AnalysisEntry(_Entry):
    segment_length: int = pydantic.Field(default=2**16, ge=2)
    overlap_fraction: float = pydantic.Field(default=0.5, ge=0, lt=1)
    window: WindowName = "hann"
    band_linewidths: float = pydantic.Field(default=10.0, gt=0)
    floor_method: FloorMethod = "configured"
    seeds_per_gain: int = pydantic.Field(default=1, ge=1)

    @pydantic.field_validator("segment_length")
    @classmethod
    def check_power_of_two(cls, value: int) -> int:
        if value & (value - 1):
            raise ValueError(f"segment_length must be a power of two, got {value}")
        return value


class SweepEntry(_Entry):
    gains: list[float] = pydantic.Field(default_factory=lambda: [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
    voltages_vrms: list[float] = pydantic.Field(default_factory=lambda: [0.5, 1.0, 1.5, 2.0, 2.5, 3.0])

    @pydantic.field_validator("gains", "voltages_vrms")
    @classmethod
    def check_non_negative(cls, values: list[float]) -> list[float]:
        if any(v < 0 for v in values):
            raise ValueError("Sweep values must be non-negative")
        return values


class BenchConfig(_Entry):
    description: str = ""
    environment: EnvironmentEntry
    modes: list[ModeEntry] = pydantic.Field(min_length=1)
    inloop_probe: ProbeEntry
    outloop_probe: ProbeEntry
    feedback: FeedbackEntry = FeedbackEntry()
    drive: typing.Optional[DriveEntry] = None
    simulation: SimulationEntry
    analysis: AnalysisEntry = AnalysisEntry()
    sweep: SweepEntry = SweepEntry()

    @pydantic.model_validator(mode="after")
    def check_targets(self) -> "BenchConfig":
        labels = [mode.label for mode in self.modes]
        for name, target in (("feedback", self.feedback.target_mode), ("drive", self.drive and self.drive.target_mode)):
            if target is not None and target not in labels:
                raise ValueError(f"{name}.target_mode {target} is not one of {labels}")
        return self

    def environment_model(self) -> Environment:
        return Environment(bath_temperature=self.environment.bath_temperature_k)

    def mechanical_modes(self) -> list[MechanicalMode]:
        return [entry.to_mode() for entry in self.modes]

    def mode(self, label: str) -> MechanicalMode:
        return next(entry.to_mode() for entry in self.modes if entry.label == label)

    def controlled_mode(self) -> MechanicalMode:
        if self.feedback.target_mode is None:
            return self.modes[0].to_mode()
        return self.mode(self.feedback.target_mode)

    def probes(self) -> tuple[ProbeModel, ProbeModel]:
        mode, env = self.controlled_mode(), self.environment_model()
        return self.inloop_probe.to_probe("inloop", mode, env), self.outloop_probe.to_probe("outloop", mode, env)

    def configured_snr(self) -> float:
        """
        SNR used for closed-form columns: the configured value when the in-loop probe is given as an
        SNR, otherwise the ratio of the thermal peak to the configured floor.

        :raises InfiniteSnrError: If the in-loop floor is zero
        """
        if self.inloop_probe.snr is not None:
            return self.inloop_probe.snr
        return snr(self.controlled_mode(), self.environment_model(), self.probes()[0])

    def to_simulation_config(
        self,
        *,
        gain: typing.Optional[float] = None,
        seed: typing.Optional[int] = None,
        drive: typing.Optional[DriveConfig] = None,
    ) -> SimulationConfig:
        inloop, outloop = self.probes()
        return SimulationConfig(
            modes=self.mechanical_modes(),
            env=self.environment_model(),
            inloop_probe=inloop,
            outloop_probe=outloop,
            feedback=self.feedback.to_feedback(gain),
            drive=drive,
            sample_rate=self.simulation.sample_rate_hz,
            duration=self.simulation.duration_s,
            seed=self.simulation.seed if seed is None else seed,
            integrator=self.simulation.integrator,
        )


class CoolingPoint(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(frozen=True)

    gain: float = pydantic.Field(ge=0)
    t_outloop_k: float
    t_inloop_k: float
    t_theory_eq1_k: float
    t_theory_inloop_k: float
    unphysical: bool

    @classmethod
    def from_measurement(
        cls, gain: float, t_outloop: float, t_inloop: float, bath_temperature: float, snr_value: float
    ) -> "CoolingPoint":
        return cls(
            gain=gain,
            t_outloop_k=t_outloop,
            t_inloop_k=t_inloop,
            t_theory_eq1_k=cooling_temperature(bath_temperature, gain, snr_value),
            t_theory_inloop_k=inferred_temperature_theory("inloop", bath_temperature, gain, snr_value),
            unphysical=t_inloop <= 0,
        )


class ArtifactEntry(pydantic.BaseModel):
    path: str
    sha256: str


class RunManifest(pydantic.BaseModel):
    """Everything needed to re-run an invocation and check its artifacts byte for byte."""

    command: str
    arguments: dict[str, typing.Any]
    config: typing.Optional[dict[str, typing.Any]] = None
    seed: typing.Optional[int] = None
    tool_version: str
    started_at: IsoTimestamp
    finished_at: typing.Optional[IsoTimestamp] = None
    status: RunStatus = "complete"
    error: typing.Optional[str] = None
    artifacts: list[ArtifactEntry] = pydantic.Field(default_factory=list)

