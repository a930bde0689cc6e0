"""
Time-domain Langevin simulation of the multi-mode oscillator under cold-damping feedback.

The system is linear, so the closed loop is propagated by recursive filtering rather than a
per-sample Python loop: each mode's one-step map becomes a pair of transfer functions, the
integer delay line and optional band-pass form the loop filter, and the resulting closed-loop
filter is applied to the open-loop motion as a cascade of second-order sections.
"""

import logging
import math
import typing

import numpy as np
import numpy.typing as npt
from scipy import signal

from coems_bench.models.physics_models import DriveConfig, FeedbackConfig, MechanicalMode, ProbeModel
from coems_bench.models.simulation_models import SimulationConfig, SimulationRecord
from coems_bench.simulation.propagator import (
    DiscreteMode,
    TransferFunction,
    UnstableSimulationError,
    discretize_mode,
    force_transfer,
    noise_transfers,
)
from coems_bench.utils.config_validator import InvalidConfigurationError, SimulationConfigValidator, delay_in_samples

_LOGGER = logging.getLogger(__name__)

BURN_IN_DECAY_TIMES = 20.0
DEFAULT_BANDPASS_LINEWIDTHS = 20.0


class LoopFilter(typing.NamedTuple):
    """
    u_fb[k] = gain * bp(y)[k - delay_samples], bp given by (numerator, denominator) or identity.
    With hold compensation the delay line reads gain * (bp(y)[k - d + 1] + bp(y)[k - d]) / 2 instead.
    """

    gain: float
    delay_samples: int
    bandpass: typing.Optional[TransferFunction]
    hold_compensated: bool = False

    def taps(self) -> np.ndarray:
        """Delay-line impulse response in ascending powers of z^-1, gain included."""
        taps = np.zeros(self.delay_samples + 1)
        if self.hold_compensated:
            taps[self.delay_samples - 1 :] = 0.5 * self.gain
        else:
            taps[self.delay_samples] = self.gain
        return taps


def loop_gain(feedback: FeedbackConfig, mode: MechanicalMode) -> float:
    """Electronic gain g * m * Gamma * omega_m (N/m) that gives closed-loop damping (1 + g) Gamma."""
    return feedback.gain * mode.effective_mass * mode.damping * mode.resonance


def hold_correction(feedback: FeedbackConfig, mode: MechanicalMode, sample_rate: float) -> float:
    """
    Gain factor 1 / cos(omega_m dt / 2) that restores the loop magnitude at omega_m after the
    two-tap hold compensation; 1 without it.
    """
    if not feedback.hold_compensation:
        return 1.0
    return 1.0 / math.cos(0.5 * mode.resonance / sample_rate)


def feedback_force(
    history: npt.ArrayLike, feedback: FeedbackConfig, mode: MechanicalMode, sample_rate: float
) -> float:
    """
    Feedback force at the current step from the (band-passed) in-loop history, newest sample last:
    F_fb = g m Gamma omega_m y(t - tau). At a quarter-period delay this is -g m Gamma dy/dt for a
    tone at omega_m.

    The force is held over the coming step, which lags it by half a sample. With hold compensation
    the two samples around t - tau + dt/2 are averaged, so the net delay is exactly the
    integer-sample tau.

    :raises InvalidConfigurationError: If the delay rounds to less than one sample
    :raises ValueError: If the history does not reach back over the delay
    """
    if not feedback.enabled or feedback.gain == 0:
        return 0.0

    samples = delay_in_samples(feedback.delay, mode.resonance, sample_rate)
    if samples < 1:
        raise InvalidConfigurationError("feedback.delay", "delay is shorter than one sample; raise sample_rate")

    y = np.asarray(history, dtype=float)
    if y.shape[0] <= samples:
        raise ValueError(f"History of {y.shape[0]} samples does not cover a delay of {samples} samples")
    gain = loop_gain(feedback, mode) * hold_correction(feedback, mode, sample_rate)
    if feedback.hold_compensation:
        return gain * 0.5 * float(y[-samples] + y[-1 - samples])
    return gain * float(y[-1 - samples])


def sensor_sample(
    x: npt.ArrayLike, probe: ProbeModel, sample_rate: float, rng: np.random.Generator
) -> np.ndarray:
    """
    Reading x + n with n white and of per-sample variance S_N * sample_rate, so that the measured
    floor equals the configured double-sided angular noise_floor.
    """
    if sample_rate <= 0:
        raise ValueError(f"Sample rate must be positive, got {sample_rate}")
    x_arr = np.asarray(x, dtype=float)
    if probe.noise_floor == 0:
        return x_arr.copy()
    return x_arr + rng.standard_normal(x_arr.shape) * math.sqrt(probe.noise_floor * sample_rate)


def drive_force(t: npt.ArrayLike, drive: DriveConfig) -> np.ndarray:
    """F(t) = (kappa V / 2) cos(omega_d t + phi): kappa V is the peak-to-peak force."""
    return drive.force_amplitude * np.cos(drive.frequency * np.asarray(t, dtype=float) + drive.phase)


def burn_in_samples(config: SimulationConfig) -> int:
    slowest = min(mode.damping for mode in config.modes)
    return int(math.ceil(BURN_IN_DECAY_TIMES / slowest * config.sample_rate))


def inloop_bandpass(config: SimulationConfig) -> typing.Optional[TransferFunction]:
    """
    Second-order resonator ahead of the feedback. Explicit settings win; otherwise it is centred
    on the controlled mode with a width of 20 linewidths, and only when several modes are simulated.
    """
    feedback = config.feedback
    mode = config.controlled_mode
    center = feedback.bandpass_center
    width = feedback.bandpass_width
    if center is None and width is None and len(config.modes) == 1:
        return None
    center = center if center is not None else mode.resonance
    width = width if width is not None else DEFAULT_BANDPASS_LINEWIDTHS * mode.damping

    numerator, denominator = signal.iirpeak(
        center / (2.0 * math.pi), center / width, fs=config.sample_rate
    )
    return TransferFunction(numerator=np.asarray(numerator), denominator=np.asarray(denominator))


def build_loop_filter(config: SimulationConfig) -> typing.Optional[LoopFilter]:
    if not config.feedback.active:
        return None
    mode = config.controlled_mode
    return LoopFilter(
        gain=loop_gain(config.feedback, mode) * hold_correction(config.feedback, mode, config.sample_rate),
        delay_samples=delay_in_samples(config.feedback.delay, mode.resonance, config.sample_rate),
        bandpass=inloop_bandpass(config),
        hold_compensated=config.feedback.hold_compensation,
    )


def _pad(coefficients: np.ndarray, length: int) -> np.ndarray:
    return np.concatenate([coefficients, np.zeros(length - coefficients.shape[0])])


def _apply(transfer: TransferFunction, series: np.ndarray) -> np.ndarray:
    if not np.any(transfer.numerator):
        return np.zeros_like(series)
    return signal.lfilter(transfer.numerator, transfer.denominator, series)


def _plant(transfers: typing.Sequence[TransferFunction]) -> TransferFunction:
    """Sum of the force-to-displacement transfers of every mode over a common denominator."""
    denominator = np.array([1.0])
    for transfer in transfers:
        denominator = np.polymul(denominator, transfer.denominator)
    numerator = np.zeros(1)
    for j, transfer in enumerate(transfers):
        term = transfer.numerator
        for i, other in enumerate(transfers):
            if i != j:
                term = np.polymul(term, other.denominator)
        # coefficients are in powers of z^-1, so shorter terms are padded at the tail
        length = max(numerator.shape[0], term.shape[0])
        numerator = _pad(numerator, length) + _pad(term, length)
    return TransferFunction(numerator=numerator, denominator=denominator)


def closed_loop_response(plant: TransferFunction, loop: LoopFilter) -> TransferFunction:
    """
    Transfer from the open-loop in-loop reading (motion without feedback plus in-loop noise)
    to the closed-loop in-loop reading: a_P a_f / (a_P a_f - D N_P b_f), D the delay-line taps.
    """
    if loop.bandpass is None:
        b_f, a_f = np.array([1.0]), np.array([1.0])
    else:
        b_f, a_f = loop.bandpass.numerator, loop.bandpass.denominator

    numerator = np.polymul(plant.denominator, a_f)
    feedback_path = np.polymul(loop.taps(), np.polymul(plant.numerator, b_f))
    length = max(numerator.shape[0], feedback_path.shape[0])
    denominator = _pad(numerator, length) - _pad(feedback_path, length)
    return TransferFunction(numerator=_pad(numerator, length), denominator=denominator)


def check_closed_loop_stability(response: TransferFunction) -> float:
    """
    :return: largest closed-loop pole radius
    :raises UnstableSimulationError: If any pole lies on or outside the unit circle
    """
    radius = float(np.max(np.abs(np.roots(response.denominator))))
    if radius >= 1.0:
        _LOGGER.error(f"Closed loop is unstable: pole radius {radius:.6f}")
        raise UnstableSimulationError(
            radius, f"closed feedback loop is unstable (pole radius {radius:.6f}); lower the gain or change the delay"
        )
    return radius


def _noise_streams(seed: int, n_modes: int) -> tuple[list[np.random.Generator], np.random.Generator, np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(n_modes + 2)
    generators = [np.random.default_rng(child) for child in children]
    return generators[:n_modes], generators[n_modes], generators[n_modes + 1]


def simulate(config: SimulationConfig) -> SimulationRecord:
    """
    Integrates every mode under thermal force, drive and feedback, and samples both probes.

    The run starts at rest and discards a burn-in of 20 decay times of the slowest mode.

    :raises InvalidConfigurationError: If the configuration fails cross-field checks
    :raises UnstableSimulationError: If the step map or the closed loop does not decay
    """
    SimulationConfigValidator.validate_simulation_config(config)

    n_burn = burn_in_samples(config)
    n_total = n_burn + config.n_samples
    _LOGGER.info(
        f"Simulating {len(config.modes)} mode(s), {config.n_samples} samples (+{n_burn} burn-in), "
        f"gain {config.feedback.gain if config.feedback.active else 0.0}, seed {config.seed}"
    )

    thermal_rngs, inloop_rng, outloop_rng = _noise_streams(config.seed, len(config.modes))
    discrete: list[DiscreteMode] = [
        discretize_mode(mode, config.env, config.sample_rate, config.integrator) for mode in config.modes
    ]
    plants = [force_transfer(step) for step in discrete]

    thermal = np.empty((len(config.modes), n_total))
    for j, (step, rng) in enumerate(zip(discrete, thermal_rngs)):
        eta = rng.standard_normal((step.noise_input.shape[1], n_total))
        thermal[j] = sum(_apply(transfer, eta[i]) for i, transfer in enumerate(noise_transfers(step)))

    external = np.zeros(n_total)
    if config.drive is not None:
        external = drive_force((np.arange(n_total) - n_burn) * config.dt, config.drive)

    inloop_noise = sensor_sample(np.zeros(n_total), config.inloop_probe, config.sample_rate, inloop_rng)
    outloop_noise = sensor_sample(np.zeros(n_total), config.outloop_probe, config.sample_rate, outloop_rng)

    loop = build_loop_filter(config)
    force = np.zeros(n_total)
    if loop is not None:
        driven = [_apply(plant, external) for plant in plants]
        open_loop_reading = thermal.sum(axis=0) + np.sum(driven, axis=0) + inloop_noise
        response = closed_loop_response(_plant(plants), loop)
        radius = check_closed_loop_stability(response)
        _LOGGER.debug(f"Closed-loop pole radius {radius:.9f}, delay {loop.delay_samples} samples")

        sections = signal.tf2sos(response.numerator, response.denominator)
        reading = signal.sosfilt(sections, open_loop_reading)
        filtered = reading if loop.bandpass is None else _apply(loop.bandpass, reading)
        force = signal.lfilter(loop.taps(), [1.0], filtered)

    total_force = external + force
    per_mode = thermal + np.stack([_apply(plant, total_force) for plant in plants])
    displacement = per_mode.sum(axis=0)

    kept = slice(n_burn, None)
    return SimulationRecord(
        dt=config.dt,
        displacement=displacement[kept],
        mode_displacements=per_mode[:, kept],
        inloop_signal=(displacement + inloop_noise)[kept],
        outloop_signal=(displacement + outloop_noise)[kept],
        feedback_force=force[kept],
        config=config,
    )
