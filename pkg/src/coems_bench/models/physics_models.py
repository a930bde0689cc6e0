import math
import typing

import pydantic
from scipy import constants

from coems_bench.utils.base_types import AngularPsd, HertzPsd, Kelvin, Kilogram, LoopSide, RadPerSecond


class MechanicalMode(pydantic.BaseModel):
    """
    One mechanical mode: effective mass, resonance and damping in angular units.
    """

    model_config = pydantic.ConfigDict(frozen=True)

    label: str = "mode"
    effective_mass: Kilogram = pydantic.Field(gt=0, description="kg")
    resonance: RadPerSecond = pydantic.Field(gt=0, description="omega_m, rad/s")
    damping: RadPerSecond = pydantic.Field(gt=0, description="Gamma, rad/s (energy damping rate)")

    @pydantic.model_validator(mode="after")
    def check_underdamped(self) -> "MechanicalMode":
        if self.resonance / self.damping <= 1.0:
            raise ValueError(
                f"Mode {self.label} is not underdamped: resonance/damping = {self.resonance / self.damping:.3g}"
            )
        return self

    @property
    def resonance_hz(self) -> float:
        return self.resonance / (2.0 * math.pi)

    @property
    def damping_hz(self) -> float:
        return self.damping / (2.0 * math.pi)

    @property
    def quality_factor(self) -> float:
        return self.resonance / self.damping

    @classmethod
    def from_hertz(cls, label: str, effective_mass: float, resonance_hz: float, damping_hz: float) -> "MechanicalMode":
        return cls(
            label=label,
            effective_mass=effective_mass,
            resonance=2.0 * math.pi * resonance_hz,
            damping=2.0 * math.pi * damping_hz,
        )


class Environment(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(frozen=True)

    boltzmann: typing.ClassVar[float] = constants.k
    hbar: typing.ClassVar[float] = constants.hbar

    bath_temperature: Kelvin = pydantic.Field(ge=0, description="T0, kelvin")

    @property
    def thermal_energy(self) -> float:
        return self.boltzmann * self.bath_temperature


class ProbeModel(pydantic.BaseModel):
    """
    A transduction channel with a white displacement-noise floor.

    noise_floor is stored double-sided in angular frequency (m^2 s); the single-sided
    hertz level an analyzer shows is twice that.
    """

    model_config = pydantic.ConfigDict(frozen=True)

    label: LoopSide
    noise_floor: AngularPsd = pydantic.Field(ge=0)
    calibration_scale: float = pydantic.Field(default=1.0, gt=0)

    @property
    def noise_floor_single_sided(self) -> HertzPsd:
        return HertzPsd(2.0 * self.noise_floor)

    @classmethod
    def from_single_sided(cls, label: LoopSide, noise_floor_hz: float, calibration_scale: float = 1.0) -> "ProbeModel":
        return cls(label=label, noise_floor=noise_floor_hz / 2.0, calibration_scale=calibration_scale)


class FeedbackConfig(pydantic.BaseModel):
    """
    Cold-damping loop settings. The electronic loop gain is g * m * Gamma * omega_m of the
    controlled mode, so the closed-loop damping is (1 + g) * Gamma.
    """

    model_config = pydantic.ConfigDict(frozen=True)

    gain: float = pydantic.Field(default=0.0, ge=0)
    delay: float = pydantic.Field(default=0.25, ge=0, lt=1, description="fraction of the mechanical period")
    bandpass_center: typing.Optional[RadPerSecond] = pydantic.Field(default=None, gt=0)
    bandpass_width: typing.Optional[RadPerSecond] = pydantic.Field(default=None, gt=0)
    enabled: bool = True
    hold_compensation: bool = pydantic.Field(
        default=True, description="average two delay-line taps so the force hold adds no net lag"
    )
    target_mode: typing.Optional[str] = None

    @property
    def active(self) -> bool:
        return self.enabled and self.gain > 0


class DriveConfig(pydantic.BaseModel):
    """
    Gradient-force drive. force_per_volt is the peak-to-peak force per applied RMS volt,
    so the force amplitude is force_per_volt * voltage / 2.
    """

    model_config = pydantic.ConfigDict(frozen=True)

    voltage: float = pydantic.Field(ge=0, description="V_rms")
    force_per_volt: float = pydantic.Field(ge=0, description="kappa, N/V peak-to-peak")
    frequency: RadPerSecond = pydantic.Field(gt=0)
    phase: float = 0.0

    @property
    def force_peak_to_peak(self) -> float:
        return self.force_per_volt * self.voltage

    @property
    def force_amplitude(self) -> float:
        return 0.5 * self.force_peak_to_peak
