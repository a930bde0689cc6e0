import math
import typing

import numpy as np
import pydantic

from coems_bench.models.physics_models import MechanicalMode
from coems_bench.physics.oscillator import zero_point_psd_peak
from coems_bench.utils.base_types import Hertz, HertzPsd, Kelvin, WindowName

# Equivalent noise bandwidth of a periodic Hann window, in bins
HANN_RBW_BINS = 1.5

_GRID_RTOL = 1e-6
_RBW_RTOL = 1e-2


class Psd(pydantic.BaseModel):
    """
    Displacement spectrum on a uniform grid, single-sided in hertz (m^2/Hz).
    """

    model_config = pydantic.ConfigDict(frozen=True, arbitrary_types_allowed=True)

    frequencies: np.ndarray
    values: np.ndarray
    rbw: Hertz = pydantic.Field(gt=0)
    window: WindowName = "hann"
    segments_averaged: int = pydantic.Field(default=1, ge=1)
    calibration_scale: float = pydantic.Field(default=1.0, gt=0)

    @pydantic.model_validator(mode="after")
    def check_grid(self) -> "Psd":
        if self.frequencies.ndim != 1 or self.frequencies.shape != self.values.shape:
            raise ValueError(
                f"Frequency axis {self.frequencies.shape} and values {self.values.shape} must be 1-D and equal length"
            )
        if self.frequencies.size < 2:
            raise ValueError("A spectrum needs at least two bins")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ValueError("PSD values must be finite and non-negative")

        steps = np.diff(self.frequencies)
        if np.any(steps <= 0):
            raise ValueError("Frequency axis must be strictly increasing")
        if not np.allclose(steps, steps[0], rtol=_GRID_RTOL, atol=0.0):
            raise ValueError("Frequency axis must be uniform")

        if self.window == "hann":
            expected = HANN_RBW_BINS * float(steps[0])
        else:
            expected = float(steps[0])
        if not math.isclose(self.rbw, expected, rel_tol=_RBW_RTOL):
            raise ValueError(f"rbw {self.rbw:.6g} Hz inconsistent with {self.window} window (expected {expected:.6g} Hz)")
        return self

    @property
    def bin_width(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])

    @property
    def asd(self) -> np.ndarray:
        return np.sqrt(self.values)

    def band_mask(self, band: tuple[float, float]) -> np.ndarray:
        return (self.frequencies >= band[0]) & (self.frequencies <= band[1])

    def nearest_index(self, frequency: float) -> int:
        return int(np.argmin(np.abs(self.frequencies - frequency)))

    def scaled(self, scale: float) -> "Psd":
        """Copy with values multiplied by scale and the scale folded into calibration_scale."""
        return self.model_copy(
            update={"values": self.values * scale, "calibration_scale": self.calibration_scale * scale}
        )


class ModeFit(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(frozen=True)

    label: str
    effective_mass: float
    resonance: float = pydantic.Field(description="rad/s")
    damping: float = pydantic.Field(description="rad/s")
    effective_mass_error: float = math.nan
    resonance_error: float = math.nan
    damping_error: float = math.nan

    @property
    def resonance_hz(self) -> float:
        return self.resonance / (2.0 * math.pi)

    @property
    def damping_hz(self) -> float:
        return self.damping / (2.0 * math.pi)

    def to_mode(self) -> MechanicalMode:
        return MechanicalMode(
            label=self.label, effective_mass=self.effective_mass, resonance=self.resonance, damping=self.damping
        )

    @property
    def zero_point_asd(self) -> float:
        """Zero-point peak amplitude, m/sqrt(Hz)."""
        return math.sqrt(zero_point_psd_peak(self.to_mode()))


class SpectrumFit(pydantic.BaseModel):
    """
    Result of a multi-Lorentzian fit at fixed bath temperature. noise_floor is single-sided (m^2/Hz).
    """

    model_config = pydantic.ConfigDict(frozen=True)

    modes: list[ModeFit]
    noise_floor: HertzPsd
    noise_floor_error: float = math.nan
    bath_temperature: Kelvin
    residual_norm: float
    converged: bool
    message: str = ""

    @pydantic.model_validator(mode="after")
    def check_converged_values(self) -> "SpectrumFit":
        if not self.converged:
            return self
        if not math.isfinite(self.residual_norm):
            raise ValueError("A converged fit must have a finite residual norm")
        for mode in self.modes:
            if min(mode.effective_mass, mode.resonance, mode.damping) <= 0:
                raise ValueError(f"Converged fit has a non-positive parameter on mode {mode.label}")
        if self.noise_floor <= 0:
            raise ValueError("Converged fit has a non-positive noise floor")
        return self

    @property
    def noise_asd(self) -> float:
        return math.sqrt(max(self.noise_floor, 0.0))

    def report(self) -> dict[str, typing.Any]:
        """JSON-ready summary in the units an analyzer trace is read in."""
        return {
            "converged": self.converged,
            "message": self.message,
            "bath_temperature_k": self.bath_temperature,
            "residual_norm": self.residual_norm,
            "noise_floor_m2_per_hz": self.noise_floor,
            "noise_floor_error_m2_per_hz": self.noise_floor_error,
            "noise_asd_m_per_rthz": self.noise_asd,
            "modes": [
                {
                    "label": mode.label,
                    "mass_kg": mode.effective_mass,
                    "mass_error_kg": mode.effective_mass_error,
                    "resonance_hz": mode.resonance_hz,
                    "resonance_error_hz": mode.resonance_error / (2.0 * math.pi),
                    "damping_hz": mode.damping_hz,
                    "damping_error_hz": mode.damping_error / (2.0 * math.pi),
                    "zero_point_asd_m_per_rthz": mode.zero_point_asd if self.converged else math.nan,
                }
                for mode in self.modes
            ],
        }


class TemperatureEstimate(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(frozen=True)

    value: Kelvin
    reference_area: float = pydantic.Field(gt=0, description="m^2")
    area: float = pydantic.Field(description="m^2, signed")
    band: tuple[float, float]
    unphysical: bool

    @pydantic.model_validator(mode="after")
    def check_band(self) -> "TemperatureEstimate":
        if not self.band[0] < self.band[1]:
            raise ValueError(f"Band must be increasing, got {self.band}")
        return self
