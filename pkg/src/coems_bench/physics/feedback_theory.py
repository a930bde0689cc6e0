"""
Closed-form cold-damping results: cooling law, optimum gain, closed-loop spectra of the
in-loop and out-of-loop channels, and the temperatures inferred from their areas.
"""

import logging
import math
import typing

import numpy as np
import numpy.typing as npt
from scipy import optimize

from coems_bench.models.physics_models import Environment, MechanicalMode, ProbeModel
from coems_bench.physics.oscillator import susceptibility, thermal_peak
from coems_bench.utils.base_types import LoopSide

_LOGGER = logging.getLogger(__name__)


class InfiniteSnrError(ValueError):
    def __init__(self, probe_label: str) -> None:
        self.probe_label = probe_label
        super().__init__(f"infinite SNR: {probe_label} probe has a zero noise floor")


class MinimumTemperature(typing.NamedTuple):
    temperature: float
    gain: float


class DelayedLoopSpectra(typing.NamedTuple):
    inloop: np.ndarray
    outloop: np.ndarray


def snr(mode: MechanicalMode, env: Environment, inloop_noise: ProbeModel) -> float:
    """
    Peak signal-to-noise ratio S_x0(omega_m) / S_N^IL, both double-sided angular.

    :raises InfiniteSnrError: If the in-loop noise floor is zero
    """
    if inloop_noise.noise_floor <= 0:
        raise InfiniteSnrError(inloop_noise.label)
    return thermal_peak(mode, env) / inloop_noise.noise_floor


def noise_floor_for_snr(mode: MechanicalMode, env: Environment, target_snr: float) -> float:
    """Double-sided angular floor that gives the requested peak SNR."""
    if target_snr <= 0:
        raise ValueError(f"SNR must be positive, got {target_snr}")
    return thermal_peak(mode, env) / target_snr


def cooling_temperature(bath_temperature: float, gain: float, snr_value: float) -> float:
    """
    Mode temperature under viscous feedback: T0 (1 + g^2/SNR) / (1 + g).
    """
    if gain < 0:
        raise ValueError(f"Gain must be non-negative, got {gain}")
    if snr_value <= 0:
        raise ValueError(f"SNR must be positive, got {snr_value}")
    return bath_temperature * (1.0 + gain**2 / snr_value) / (1.0 + gain)


def squashing_onset_gain(snr_value: float) -> float:
    """
    Gain sqrt(1 + SNR) - 1 where the out-of-loop temperature is minimal, the in-loop inference
    crosses zero and the in-loop peak drops below the in-loop floor.
    """
    if snr_value <= 0:
        raise ValueError(f"SNR must be positive, got {snr_value}")
    return math.sqrt(1.0 + snr_value) - 1.0


def min_temperature(bath_temperature: float, snr_value: float) -> MinimumTemperature:
    g_opt = squashing_onset_gain(snr_value)
    t_min = 2.0 * bath_temperature * (math.sqrt(1.0 + snr_value) - 1.0) / snr_value
    return MinimumTemperature(temperature=t_min, gain=g_opt)


def numerical_min_temperature(bath_temperature: float, snr_value: float, gain_max: float = 100.0) -> MinimumTemperature:
    """
    Minimizes the cooling law numerically over [0, gain_max] (bounded Brent search).
    """
    result = optimize.minimize_scalar(
        lambda g: cooling_temperature(bath_temperature, g, snr_value),
        bounds=(0.0, gain_max),
        method="bounded",
        options={"xatol": 1e-12, "maxiter": 1000},
    )
    if not result.success:
        _LOGGER.warning(f"Cooling-law minimization did not converge: {result.message}")
    return MinimumTemperature(temperature=float(result.fun), gain=float(result.x))


def closed_loop_susceptibility(mode: MechanicalMode, gain: float, omega: npt.ArrayLike) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    damping = (1.0 + gain) * mode.damping
    return 1.0 / (mode.effective_mass * (mode.resonance**2 - w**2 - 1j * damping * w))


def _thermal_force_psd(mode: MechanicalMode, env: Environment) -> float:
    return 2.0 * env.thermal_energy * mode.effective_mass * mode.damping


def outloop_psd_theory(
    mode: MechanicalMode,
    env: Environment,
    gain: float,
    inloop_probe: ProbeModel,
    outloop_probe: ProbeModel,
    omega: npt.ArrayLike,
) -> np.ndarray:
    """
    Out-of-loop spectrum: closed-loop motion (thermal force plus the in-loop noise imprinted
    by the loop) on top of the independent out-of-loop floor.
    """
    w = np.asarray(omega, dtype=float)
    chi_eff = closed_loop_susceptibility(mode, gain, w)
    imprinted = (gain * mode.effective_mass * mode.damping * w) ** 2 * inloop_probe.noise_floor
    return np.abs(chi_eff) ** 2 * (_thermal_force_psd(mode, env) + imprinted) + outloop_probe.noise_floor


def inloop_psd_theory(
    mode: MechanicalMode,
    env: Environment,
    gain: float,
    inloop_probe: ProbeModel,
    omega: npt.ArrayLike,
) -> np.ndarray:
    """
    In-loop spectrum. The floor term is weighted by |chi_eff/chi|^2, which carries the
    anti-correlation between the in-loop noise and the motion it drives.
    """
    w = np.asarray(omega, dtype=float)
    chi = susceptibility(mode, w)
    chi_eff = closed_loop_susceptibility(mode, gain, w)
    return (
        np.abs(chi_eff) ** 2 * _thermal_force_psd(mode, env)
        + np.abs(chi_eff / chi) ** 2 * inloop_probe.noise_floor
    )


def inferred_temperature_theory(loop: LoopSide, bath_temperature: float, gain: float, snr_value: float) -> float:
    """
    Temperature an area-based inference reports for the given channel. The in-loop value
    goes negative past the optimum gain.
    """
    if loop == "outloop":
        return cooling_temperature(bath_temperature, gain, snr_value)
    if loop == "inloop":
        if gain < 0 or snr_value <= 0:
            raise ValueError("Gain must be non-negative and SNR positive")
        return bath_temperature * (1.0 - gain * (gain + 2.0) / snr_value) / (1.0 + gain)
    raise ValueError(f"Unknown loop side: {loop}")


def _delayed_loop(mode: MechanicalMode, gain: float, delay: float, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Loop transfer g m Gamma omega_m exp(i omega tau) and |1 - loop chi|^2."""
    tau = delay * 2.0 * math.pi / mode.resonance
    loop = gain * mode.effective_mass * mode.damping * mode.resonance * np.exp(1j * w * tau)
    return loop, np.abs(1.0 - loop * susceptibility(mode, w)) ** 2


def delayed_loop_psds(
    mode: MechanicalMode,
    env: Environment,
    gain: float,
    delay: float,
    inloop_probe: ProbeModel,
    outloop_probe: ProbeModel,
    omega: npt.ArrayLike,
) -> DelayedLoopSpectra:
    """
    Exact spectra for a pure delay-line loop, F_fb(t) = g m Gamma omega_m y_IL(t - tau).

    Matches the viscous closed forms near omega_m; away from resonance the delay's phase
    slope adds an offset of about g pi Gamma / (2 omega_m) times the floor to the in-loop
    spectrum and stretches the out-of-loop peak by 1 / (1 - g pi Gamma / (4 omega_m)).

    :param delay: loop delay as a fraction of the mechanical period
    """
    w = np.asarray(omega, dtype=float)
    loop, denominator = _delayed_loop(mode, gain, delay, w)
    chi = susceptibility(mode, w)

    force_psd = _thermal_force_psd(mode, env)
    motion = np.abs(chi) ** 2 * (force_psd + np.abs(loop) ** 2 * inloop_probe.noise_floor) / denominator
    inloop = (np.abs(chi) ** 2 * force_psd + inloop_probe.noise_floor) / denominator
    return DelayedLoopSpectra(inloop=inloop, outloop=motion + outloop_probe.noise_floor)


def loop_imprinted_floor(
    mode: MechanicalMode, gain: float, delay: float, inloop_probe: ProbeModel, omega: npt.ArrayLike
) -> np.ndarray:
    """
    In-loop transduction floor as the loop reshapes it, S_N / |1 - loop chi|^2, double-sided angular.
    Far from omega_m this sits about g pi Gamma / (2 omega_m) above S_N; it equals S_N at zero gain.
    """
    _, denominator = _delayed_loop(mode, gain, delay, np.asarray(omega, dtype=float))
    return inloop_probe.noise_floor / denominator
