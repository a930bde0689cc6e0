"""
One-step maps for a single damped mode driven by white thermal force and a held external force.

The state is (x, v / omega_m) so both components carry units of metres; this keeps the
process-noise covariance well conditioned at MHz sample rates.
"""

import logging
import typing

import numpy as np
from scipy import linalg, signal

from coems_bench.models.physics_models import Environment, MechanicalMode
from coems_bench.utils.base_types import IntegratorName

_LOGGER = logging.getLogger(__name__)

_OUTPUT_ROW = np.array([[1.0, 0.0]])


class UnstableSimulationError(Exception):
    def __init__(self, spectral_radius: float, message: str) -> None:
        self.spectral_radius = spectral_radius
        super().__init__(message)


class DiscreteMode(typing.NamedTuple):
    """
    s[k+1] = transition @ s[k] + force_input * u[k] + noise_input @ eta[k], x[k] = s[k][0],
    with eta[k] standard normal of length 2 and u[k] the held external force (N).
    """

    transition: np.ndarray
    force_input: np.ndarray
    noise_input: np.ndarray


class TransferFunction(typing.NamedTuple):
    """Coefficients in ascending powers of z^-1, equal length."""

    numerator: np.ndarray
    denominator: np.ndarray


def _continuous_generator(mode: MechanicalMode) -> np.ndarray:
    return np.array([[0.0, mode.resonance], [-mode.resonance, -mode.damping]])


def _thermal_force_psd(mode: MechanicalMode, env: Environment) -> float:
    return 2.0 * env.thermal_energy * mode.effective_mass * mode.damping


def _exact_gaussian(mode: MechanicalMode, env: Environment, dt: float) -> DiscreteMode:
    generator = _continuous_generator(mode)
    unit_input = np.array([[0.0], [1.0]])

    transition = linalg.expm(generator * dt)

    # zero-order-hold input: top-right block of expm([[A, b], [0, 0]] dt)
    augmented = np.zeros((3, 3))
    augmented[:2, :2] = generator
    augmented[:2, 2:] = unit_input
    hold = linalg.expm(augmented * dt)[:2, 2]

    # Van Loan: process covariance of unit-intensity noise entering the scaled velocity
    van_loan = np.zeros((4, 4))
    van_loan[:2, :2] = -generator
    van_loan[:2, 2:] = unit_input @ unit_input.T
    van_loan[2:, 2:] = generator.T
    blocks = linalg.expm(van_loan * dt)
    unit_covariance = transition @ blocks[:2, 2:]
    unit_covariance = 0.5 * (unit_covariance + unit_covariance.T)

    scale = 1.0 / (mode.effective_mass * mode.resonance)
    noise_scale = np.sqrt(_thermal_force_psd(mode, env)) * scale
    return DiscreteMode(
        transition=transition,
        force_input=hold * scale,
        noise_input=noise_scale * np.linalg.cholesky(unit_covariance),
    )


def _semi_implicit_euler(mode: MechanicalMode, env: Environment, dt: float) -> DiscreteMode:
    wdt = mode.resonance * dt
    gdt = mode.damping * dt
    transition = np.array([[1.0 - wdt**2, wdt * (1.0 - gdt)], [-wdt, 1.0 - gdt]])
    force_input = np.array([dt**2 / mode.effective_mass, dt / (mode.effective_mass * mode.resonance)])

    # the thermal force is held over the step like any other force, with variance S_F / dt
    force_std = np.sqrt(_thermal_force_psd(mode, env) / dt)
    noise_input = np.zeros((2, 2))
    noise_input[:, 0] = force_input * force_std
    return DiscreteMode(transition=transition, force_input=force_input, noise_input=noise_input)


def spectral_radius(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(matrix))))


def discretize_mode(
    mode: MechanicalMode, env: Environment, sample_rate: float, integrator: IntegratorName = "exact-gaussian"
) -> DiscreteMode:
    """
    One-step map of a mode at the given sample rate.

    :raises UnstableSimulationError: If the map does not decay (time step too large for the scheme)
    """
    dt = 1.0 / sample_rate
    if integrator == "exact-gaussian":
        discrete = _exact_gaussian(mode, env, dt)
    elif integrator == "semi-implicit-euler":
        discrete = _semi_implicit_euler(mode, env, dt)
    else:
        raise ValueError(f"Unknown integrator: {integrator}")

    radius = spectral_radius(discrete.transition)
    if radius >= 1.0:
        _LOGGER.error(f"Unstable {integrator} map for mode {mode.label}: spectral radius {radius:.6f}")
        raise UnstableSimulationError(
            radius, f"{integrator} step is unstable for mode {mode.label} at {sample_rate:.6g} Hz; raise sample_rate"
        )
    return discrete


def stationary_covariance(discrete: DiscreteMode) -> np.ndarray:
    """Stationary state covariance of the undriven map (discrete Lyapunov equation)."""
    process = discrete.noise_input @ discrete.noise_input.T
    return linalg.solve_discrete_lyapunov(discrete.transition, process)


def stationary_variance(
    mode: MechanicalMode, env: Environment, sample_rate: float, integrator: IntegratorName = "exact-gaussian"
) -> float:
    """Displacement variance the discretized mode settles to without feedback or drive."""
    return float(stationary_covariance(discretize_mode(mode, env, sample_rate, integrator))[0, 0])


def _transfer(discrete: DiscreteMode, input_vector: np.ndarray) -> TransferFunction:
    numerator, denominator = signal.ss2tf(discrete.transition, input_vector.reshape(2, 1), _OUTPUT_ROW, [[0.0]])
    return TransferFunction(numerator=np.asarray(numerator[0], dtype=float), denominator=np.asarray(denominator))


def force_transfer(discrete: DiscreteMode) -> TransferFunction:
    """Transfer from held force u[k] to displacement x[k]."""
    return _transfer(discrete, discrete.force_input)


def noise_transfers(discrete: DiscreteMode) -> list[TransferFunction]:
    """Transfers from each standard-normal noise component to displacement."""
    return [_transfer(discrete, discrete.noise_input[:, i]) for i in range(discrete.noise_input.shape[1])]
