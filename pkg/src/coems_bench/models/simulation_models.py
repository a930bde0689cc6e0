import math
import typing

import numpy as np
import pydantic

from coems_bench.models.physics_models import DriveConfig, Environment, FeedbackConfig, MechanicalMode, ProbeModel
from coems_bench.utils.base_types import IntegratorName, LoopSide, Seed

MAX_SEED = 2**64 - 1


class SimulationConfig(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(frozen=True)

    modes: list[MechanicalMode] = pydantic.Field(min_length=1)
    env: Environment
    inloop_probe: ProbeModel
    outloop_probe: ProbeModel
    feedback: FeedbackConfig = FeedbackConfig()
    drive: typing.Optional[DriveConfig] = None
    sample_rate: float = pydantic.Field(gt=0, description="Hz")
    duration: float = pydantic.Field(gt=0, description="s")
    seed: Seed = pydantic.Field(default=0, ge=0, le=MAX_SEED)
    integrator: IntegratorName = "exact-gaussian"

    @pydantic.model_validator(mode="after")
    def check_probe_labels(self) -> "SimulationConfig":
        if self.inloop_probe.label != "inloop" or self.outloop_probe.label != "outloop":
            raise ValueError("Probes must be labelled inloop and outloop respectively")
        labels = [mode.label for mode in self.modes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"Mode labels must be unique, got {labels}")
        if self.feedback.target_mode is not None and self.feedback.target_mode not in labels:
            raise ValueError(f"Feedback target mode {self.feedback.target_mode} is not one of {labels}")
        return self

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))

    @property
    def controlled_mode(self) -> MechanicalMode:
        if self.feedback.target_mode is None:
            return self.modes[0]
        return next(mode for mode in self.modes if mode.label == self.feedback.target_mode)

    @property
    def max_resonance_hz(self) -> float:
        return max(mode.resonance for mode in self.modes) / (2.0 * math.pi)


class SimulationRecord(pydantic.BaseModel):
    """
    Time series produced by one simulation run. Per-mode traces are stacked along axis 0
    of mode_displacements; displacement is their sum.
    """

    model_config = pydantic.ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dt: float = pydantic.Field(gt=0)
    displacement: np.ndarray
    mode_displacements: np.ndarray
    inloop_signal: np.ndarray
    outloop_signal: np.ndarray
    feedback_force: np.ndarray
    config: SimulationConfig

    @pydantic.model_validator(mode="after")
    def check_lengths(self) -> "SimulationRecord":
        n = self.displacement.shape[0]
        for name in ("inloop_signal", "outloop_signal", "feedback_force"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected ({n},)")
        if self.mode_displacements.shape != (len(self.config.modes), n):
            raise ValueError(f"mode_displacements has shape {self.mode_displacements.shape}")
        return self

    @property
    def n_samples(self) -> int:
        return int(self.displacement.shape[0])

    @property
    def time(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt

    @property
    def sample_rate(self) -> float:
        return self.config.sample_rate

    def signal(self, side: LoopSide) -> np.ndarray:
        return self.inloop_signal if side == "inloop" else self.outloop_signal

    def raw_channel(self, side: LoopSide) -> np.ndarray:
        """Uncalibrated channel reading: the calibrated signal divided by sqrt(calibration_scale)."""
        probe = self.config.inloop_probe if side == "inloop" else self.config.outloop_probe
        return self.signal(side) / math.sqrt(probe.calibration_scale)
