import logging
import math
import typing

import numpy as np

from coems_bench.artifacts.run_directory import RunDirectory
from coems_bench.physics.feedback_theory import (
    cooling_temperature,
    inferred_temperature_theory,
    min_temperature,
    numerical_min_temperature,
)
from coems_bench.physics.oscillator import phonon_occupancy

_LOGGER = logging.getLogger(__name__)

DESIGN_COLUMNS = ("gain", "t_eq1_k", "t_inloop_theory_k")
CURVE_FILE = "design_curve.csv"
SUMMARY_FILE = "design_summary.json"


class DesignParameters(typing.NamedTuple):
    bath_temperature: float = 300.0
    snr: float = 100.0
    g_max: float = 50.0
    n_points: int = 501
    resonance_hz: float = 6.272e6

    def validate(self) -> None:
        if self.bath_temperature < 0:
            raise ValueError(f"Bath temperature must be non-negative, got {self.bath_temperature}")
        if not self.snr > 0:
            raise ValueError(f"SNR must be positive, got {self.snr}")
        if not self.g_max > 0:
            raise ValueError(f"g_max must be positive, got {self.g_max}")
        if self.n_points < 2:
            raise ValueError(f"n_points must be at least 2, got {self.n_points}")
        if not self.resonance_hz > 0:
            raise ValueError(f"Resonance must be positive, got {self.resonance_hz}")


def design_curve(params: DesignParameters) -> np.ndarray:
    """Rows of (g, T from the cooling law, in-loop inferred temperature) on a uniform gain grid."""
    params.validate()
    gains = np.linspace(0.0, params.g_max, params.n_points)
    return np.array(
        [
            (
                g,
                cooling_temperature(params.bath_temperature, g, params.snr),
                inferred_temperature_theory("inloop", params.bath_temperature, g, params.snr),
            )
            for g in gains
        ]
    )


def design_summary(params: DesignParameters, curve: np.ndarray) -> dict[str, typing.Any]:
    closed = min_temperature(params.bath_temperature, params.snr)
    numerical = numerical_min_temperature(params.bath_temperature, params.snr, gain_max=max(params.g_max, closed.gain))
    grid_index = int(np.argmin(curve[:, 1]))
    return {
        "bath_temperature_k": params.bath_temperature,
        "snr": params.snr,
        "t_min_k": closed.temperature,
        "g_opt": closed.gain,
        "t_min_numerical_k": numerical.temperature,
        "g_opt_numerical": numerical.gain,
        "grid_min_t_k": float(curve[grid_index, 1]),
        "grid_min_gain": float(curve[grid_index, 0]),
        "resonance_hz": params.resonance_hz,
        "phonon_occupancy_at_t_min": phonon_occupancy(closed.temperature, 2.0 * math.pi * params.resonance_hz),
    }


class DesignCommand:
    def __init__(self, params: DesignParameters):
        self.params = params

    def run(self, run_dir: RunDirectory) -> dict[str, typing.Any]:
        curve = design_curve(self.params)
        summary = design_summary(self.params, curve)
        run_dir.write_table(CURVE_FILE, DESIGN_COLUMNS, curve)
        run_dir.write_json(SUMMARY_FILE, summary)
        _LOGGER.info(f"T_min {summary['t_min_k']:.4g} K at g_opt {summary['g_opt']:.4g}")
        return summary
