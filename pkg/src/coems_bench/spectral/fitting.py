"""
Multi-Lorentzian fit of a transduced Brownian spectrum at fixed bath temperature.

Parameters are fitted as log-ratios to the initial guesses, which keeps every physical parameter
positive. Residuals are relative to the model (weights 1/model^2). The first pass uses the live
model as weight; later passes freeze the weight at the previous optimum, which removes the upward
level bias a live relative weight gives on averaged (chi-squared) spectra.
"""

import logging
import math
import typing

import numpy as np
from scipy import optimize, signal

from coems_bench.models.physics_models import Environment, MechanicalMode
from coems_bench.models.spectrum_models import ModeFit, Psd, SpectrumFit

_LOGGER = logging.getLogger(__name__)

MAX_WEIGHT_PASSES = 4
WEIGHT_PASS_RTOL = 1e-10
MIN_PROMINENCE_TO_FLOOR = 1.0
# A mode narrower than this many resolution bandwidths is not resolved
MIN_LINEWIDTH_RBWS = 2.0
# Peak above floor, in units of the single-bin relative scatter 1/sqrt(segments)
MIN_PEAK_SIGMAS = 5.0


class FitConvergenceError(RuntimeError):
    def __init__(self, message: str, n_found: int = 0) -> None:
        self.n_found = n_found
        super().__init__(message)


class _Parameters(typing.NamedTuple):
    masses: np.ndarray
    dampings: np.ndarray
    resonances: np.ndarray
    noise_floor: float


def _unpack(values: np.ndarray, n_modes: int) -> _Parameters:
    return _Parameters(
        masses=values[0:n_modes],
        dampings=values[n_modes : 2 * n_modes],
        resonances=values[2 * n_modes : 3 * n_modes],
        noise_floor=float(values[3 * n_modes]),
    )


def model_spectrum(params: _Parameters, thermal_energy: float, frequencies: np.ndarray) -> np.ndarray:
    """Single-sided hertz model: sum of 4 k_B T Gamma / (m |omega_m^2 - omega^2 - i Gamma omega|^2) plus floor."""
    w = 2.0 * math.pi * frequencies
    total = np.full(w.shape, params.noise_floor)
    for m, gamma, w0 in zip(params.masses, params.dampings, params.resonances):
        total = total + 4.0 * thermal_energy * gamma / (m * ((w0**2 - w**2) ** 2 + (gamma * w) ** 2))
    return total


def estimate_initial_guesses(psd: Psd, n_modes: int, env: Environment) -> list[MechanicalMode]:
    """
    Seeds a fit from the n most prominent peaks: centre from the peak bin, damping from the full
    width at half height above the median floor, mass from the peak height at the bath temperature.

    :raises FitConvergenceError: If fewer than n_modes peaks stand out of the floor
    """
    if env.bath_temperature <= 0:
        raise ValueError("Mass guesses need a positive bath temperature")
    floor = float(np.median(psd.values))
    peaks, properties = signal.find_peaks(psd.values, prominence=MIN_PROMINENCE_TO_FLOOR * floor)
    if peaks.size < n_modes:
        raise FitConvergenceError(f"Found {peaks.size} peaks, {n_modes} modes requested", n_found=int(peaks.size))

    strongest = np.sort(peaks[np.argsort(properties["prominences"])[::-1][:n_modes]])
    widths = signal.peak_widths(psd.values, strongest, rel_height=0.5)[0]

    guesses = []
    for j, (index, width) in enumerate(zip(strongest, widths)):
        resonance = 2.0 * math.pi * float(psd.frequencies[index])
        damping = 2.0 * math.pi * max(float(width) * psd.bin_width, psd.bin_width)
        height = max(float(psd.values[index]) - floor, float(psd.values[index]) * 1e-3)
        mass = 4.0 * env.thermal_energy / (height * damping * resonance**2)
        guesses.append(MechanicalMode(label=f"mode{j + 1}", effective_mass=mass, resonance=resonance, damping=damping))
    _LOGGER.info(f"Initial guesses at {[round(g.resonance_hz) for g in guesses]} Hz")
    return guesses


def _standard_errors(jacobian: np.ndarray, residual_sum: float, n_points: int) -> typing.Optional[np.ndarray]:
    """Relative standard errors of the log-parameters from the quadratic model at the optimum."""
    normal = jacobian.T @ jacobian
    if not np.all(np.isfinite(normal)) or np.linalg.cond(normal) > 1.0 / np.finfo(float).eps:
        return None
    dof = max(n_points - jacobian.shape[1], 1)
    covariance = np.linalg.inv(normal) * residual_sum / dof
    return np.sqrt(np.abs(np.diag(covariance)))


def _resolution_problems(params: _Parameters, labels: list[str], psd: Psd, thermal_energy: float) -> list[str]:
    problems = []
    scatter = 1.0 / math.sqrt(psd.segments_averaged)
    for label, m, gamma, w0 in zip(labels, params.masses, params.dampings, params.resonances):
        f0 = w0 / (2.0 * math.pi)
        if not psd.frequencies[0] < f0 < psd.frequencies[-1] or gamma >= w0:
            problems.append(f"{label} resonance outside the spectrum or overdamped")
            continue
        if gamma / (2.0 * math.pi) < MIN_LINEWIDTH_RBWS * psd.rbw:
            problems.append(f"{label} linewidth below {MIN_LINEWIDTH_RBWS} resolution bandwidths")
        peak = 4.0 * thermal_energy / (m * gamma * w0**2)
        if peak < MIN_PEAK_SIGMAS * scatter * params.noise_floor:
            problems.append(f"{label} peak not significant above the floor")
    return problems


def fit_spectrum(
    psd: Psd,
    n_modes: int,
    env: Environment,
    initial_guesses: typing.Optional[typing.Sequence[MechanicalMode]] = None,
    noise_floor_guess: typing.Optional[float] = None,
    band: typing.Optional[tuple[float, float]] = None,
    max_nfev: int = 2000,
) -> SpectrumFit:
    """
    Fits masses, dampings, resonances and the white floor at the fixed bath temperature. Mass and
    temperature enter only as T/m, so the temperature has to be known.

    Initial guesses should be within a factor of 3 in mass and damping and within a linewidth in
    resonance; estimate_initial_guesses provides them from the peaks when none are given.

    :param noise_floor_guess: single-sided floor (m^2/Hz); defaults to the median level
    :param band: (low, high) Hz to restrict the fit; defaults to every bin above DC
    :return: the fit, with converged=False (and a message) instead of raising when the optimizer
        fails or the result is degenerate
    """
    if n_modes < 1:
        raise ValueError(f"n_modes must be at least 1, got {n_modes}")
    if env.bath_temperature <= 0:
        raise ValueError("Fitting at fixed temperature needs a positive bath temperature")
    guesses = list(initial_guesses) if initial_guesses is not None else estimate_initial_guesses(psd, n_modes, env)
    if len(guesses) != n_modes:
        raise ValueError(f"Got {len(guesses)} initial guesses for {n_modes} modes")

    mask = psd.frequencies > 0
    if band is not None:
        mask &= psd.band_mask(band)
    frequencies = psd.frequencies[mask]
    data = psd.values[mask]

    start = np.array(
        [g.effective_mass for g in guesses]
        + [g.damping for g in guesses]
        + [g.resonance for g in guesses]
        + [noise_floor_guess if noise_floor_guess is not None else float(np.median(psd.values))]
    )
    thermal_energy = env.thermal_energy

    def to_physical(log_ratio: np.ndarray) -> _Parameters:
        return _unpack(start * np.exp(log_ratio), n_modes)

    x = np.zeros(start.shape)
    weight: typing.Optional[np.ndarray] = None
    result = None
    for weight_pass in range(MAX_WEIGHT_PASSES):
        frozen = weight

        def residuals(log_ratio: np.ndarray) -> np.ndarray:
            model = model_spectrum(to_physical(log_ratio), thermal_energy, frequencies)
            return (data - model) / (model if frozen is None else frozen)

        result = optimize.least_squares(
            residuals, x, method="trf", x_scale="jac", ftol=1e-12, xtol=1e-12, gtol=1e-12, max_nfev=max_nfev
        )
        step = np.max(np.abs(result.x - x)) if weight_pass > 0 else math.inf
        x = result.x
        weight = model_spectrum(to_physical(x), thermal_energy, frequencies)
        if result.status <= 0 or step < WEIGHT_PASS_RTOL:
            break

    assert result is not None
    params = to_physical(x)
    labels = [g.label for g in guesses]
    residual_norm = float(np.sqrt(2.0 * result.cost))

    problems: list[str] = []
    if result.status <= 0:
        problems.append(f"optimizer stopped: {result.message}")
    errors = _standard_errors(result.jac, 2.0 * result.cost, frequencies.size)
    if errors is None:
        problems.append("normal matrix is singular")
        errors = np.full(start.shape, math.inf)
    elif np.any(errors > 1.0):
        problems.append("a parameter has relative standard error above 1")
    problems.extend(_resolution_problems(params, labels, psd, thermal_energy))

    absolute = _unpack(start * np.exp(x) * errors, n_modes)
    fit = SpectrumFit(
        modes=[
            ModeFit(
                label=label,
                effective_mass=float(params.masses[j]),
                resonance=float(params.resonances[j]),
                damping=float(params.dampings[j]),
                effective_mass_error=float(absolute.masses[j]),
                resonance_error=float(absolute.resonances[j]),
                damping_error=float(absolute.dampings[j]),
            )
            for j, label in enumerate(labels)
        ],
        noise_floor=params.noise_floor,
        noise_floor_error=absolute.noise_floor,
        bath_temperature=env.bath_temperature,
        residual_norm=residual_norm,
        converged=not problems and math.isfinite(residual_norm),
        message="; ".join(problems) if problems else str(result.message),
    )
    if fit.converged:
        _LOGGER.info(f"Fit converged after {result.nfev} evaluations, residual norm {residual_norm:.4g}")
    else:
        _LOGGER.warning(f"Fit not converged: {fit.message}")
    return fit


def fitted_spectrum(fit: SpectrumFit, psd: Psd) -> Psd:
    """The fitted model evaluated on the frequency grid (and with the rbw) of psd."""
    params = _Parameters(
        masses=np.array([m.effective_mass for m in fit.modes]),
        dampings=np.array([m.damping for m in fit.modes]),
        resonances=np.array([m.resonance for m in fit.modes]),
        noise_floor=fit.noise_floor,
    )
    thermal_energy = Environment(bath_temperature=fit.bath_temperature).thermal_energy
    return psd.model_copy(update={"values": model_spectrum(params, thermal_energy, psd.frequencies)})
