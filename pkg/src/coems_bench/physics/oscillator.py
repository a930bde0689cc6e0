import logging
import math
import typing

import numpy as np
import numpy.typing as npt
from scipy import integrate

from coems_bench.models.physics_models import Environment, MechanicalMode

_LOGGER = logging.getLogger(__name__)

# Quadrature window around a resonance, in linewidths
_QUADRATURE_HALF_SPAN = 50.0


class ModeForce(typing.NamedTuple):
    amplitude: float
    phase: float = 0.0


def susceptibility(mode: MechanicalMode, omega: npt.ArrayLike) -> np.ndarray:
    """
    Mechanical susceptibility chi(omega) = 1 / (m (omega_m^2 - omega^2 - i Gamma omega)),
    under the exp(-i omega t) convention.

    :return: complex compliance in m/N, same shape as omega
    """
    w = np.asarray(omega, dtype=float)
    return 1.0 / (mode.effective_mass * (mode.resonance**2 - w**2 - 1j * mode.damping * w))


def thermal_psd(mode: MechanicalMode, env: Environment, omega: npt.ArrayLike) -> np.ndarray:
    """
    Brownian displacement spectrum 2 k_B T Gamma m |chi|^2 (double-sided angular, m^2 s).
    """
    chi = susceptibility(mode, omega)
    return 2.0 * env.thermal_energy * mode.damping * mode.effective_mass * np.abs(chi) ** 2


def thermal_peak(mode: MechanicalMode, env: Environment) -> float:
    return 2.0 * env.thermal_energy / (mode.effective_mass * mode.damping * mode.resonance**2)


def thermal_variance(mode: MechanicalMode, env: Environment) -> float:
    return env.thermal_energy / (mode.effective_mass * mode.resonance**2)


def transduced_psd(
    modes: typing.Sequence[MechanicalMode], env: Environment, noise_floor: float, omega: npt.ArrayLike
) -> np.ndarray:
    """
    Incoherent sum of the Brownian spectra of every mode plus a white transduction floor.
    """
    total = np.full(np.shape(omega), float(noise_floor))
    for mode in modes:
        total = total + thermal_psd(mode, env, omega)
    return total


def zero_point_psd_peak(mode: MechanicalMode) -> float:
    return Environment.hbar / (mode.effective_mass * mode.damping * mode.resonance)


def resonance_from_zero_point(effective_mass: float, damping: float, zero_point_peak: float) -> float:
    """
    Inverts S_zp = hbar / (m Gamma omega_m) for omega_m.

    :param zero_point_peak: S_zp as a PSD (square of the quoted amplitude spectral density)
    :return: omega_m in rad/s
    """
    if effective_mass <= 0 or damping <= 0 or zero_point_peak <= 0:
        raise ValueError("Mass, damping and zero-point peak must be positive")
    return Environment.hbar / (effective_mass * damping * zero_point_peak)


def phonon_occupancy(temperature: float, omega_m: float) -> float:
    if temperature < 0:
        raise ValueError(f"Temperature must be non-negative, got {temperature}")
    return Environment.boltzmann * temperature / (Environment.hbar * omega_m)


def driven_response(
    modes: typing.Sequence[MechanicalMode],
    per_mode_forces: typing.Sequence[ModeForce],
    omega: npt.ArrayLike,
) -> np.ndarray:
    """
    Coherent response |sum_j chi_j F_j exp(i phi_j)|^2 of modes sharing one drive.

    :raises ValueError: If the mode and force lists differ in length
    """
    if len(modes) != len(per_mode_forces):
        raise ValueError(f"Got {len(modes)} modes but {len(per_mode_forces)} forces")

    amplitude = np.zeros(np.shape(omega), dtype=complex)
    for mode, force in zip(modes, per_mode_forces):
        amplitude = amplitude + susceptibility(mode, omega) * force.amplitude * np.exp(1j * force.phase)
    return np.abs(amplitude) ** 2


def spectrum_variance(
    spectrum: typing.Callable[[float], float],
    center: float,
    linewidth: float,
) -> float:
    """
    Variance (1/2pi) * integral of an even double-sided angular spectrum over all omega,
    by adaptive quadrature split around the resonance.

    :param spectrum: S(omega) for omega >= 0
    :param center: resonance (rad/s) where the integrand is concentrated
    :param linewidth: width (rad/s) of the resonant feature
    """
    lower = max(center - _QUADRATURE_HALF_SPAN * linewidth, 0.0)
    upper = center + _QUADRATURE_HALF_SPAN * linewidth
    options = {"epsabs": 0.0, "epsrel": 1e-11, "limit": 500}

    def integrand(w: float) -> float:
        return float(spectrum(w))

    total = 0.0
    if lower > 0.0:
        total += integrate.quad(integrand, 0.0, lower, **options)[0]
    total += integrate.quad(integrand, lower, upper, points=[center], **options)[0]
    total += integrate.quad(integrand, upper, math.inf, **options)[0]
    # integral over negative frequencies equals the positive half
    return total / math.pi
