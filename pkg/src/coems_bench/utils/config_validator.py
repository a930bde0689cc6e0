import logging
import math
import typing

if typing.TYPE_CHECKING:
    from coems_bench.models.simulation_models import SimulationConfig

_LOGGER = logging.getLogger(__name__)


class InvalidConfigurationError(ValueError):
    def __init__(self, field_name: str, message: str) -> None:
        self.field_name = field_name
        super().__init__(f"{field_name}: {message}")


def delay_in_samples(delay_fraction: float, resonance: float, sample_rate: float) -> int:
    """
    Integer-sample length of a delay given as a fraction of the mechanical period.

    :param resonance: omega_m of the controlled mode (rad/s)
    """
    return int(round(delay_fraction * (2.0 * math.pi / resonance) * sample_rate))


class SimulationConfigValidator:
    """
    Cross-field checks on a simulation configuration that field constraints cannot express.

    Checks:
    - Sampling density relative to the fastest mode
    - Minimum record length
    - Feedback delay resolution on the integer-sample delay line
    - Band-pass filter inside the Nyquist band
    """

    MIN_SAMPLES_PER_PERIOD = 20
    MIN_RECORD_SAMPLES = 2**14
    MIN_DELAY_SAMPLES = 4

    @classmethod
    def validate_simulation_config(cls, config: "SimulationConfig") -> None:
        """
        Validate every cross-field constraint of a simulation configuration.

        :raises InvalidConfigurationError: If any check fails
        """
        cls.validate_sample_rate(config)
        cls.validate_record_length(config)
        cls.validate_feedback_delay(config)
        cls.validate_bandpass(config)

    @classmethod
    def validate_sample_rate(cls, config: "SimulationConfig") -> None:
        required = cls.MIN_SAMPLES_PER_PERIOD * config.max_resonance_hz
        # tolerate representation error when the rate is set to exactly the minimum
        if config.sample_rate < required * (1.0 - 1e-9):
            _LOGGER.warning(f"Sample rate {config.sample_rate:.6g} Hz below required {required:.6g} Hz")
            raise InvalidConfigurationError(
                "sample_rate",
                f"must be at least {cls.MIN_SAMPLES_PER_PERIOD} x the highest mode frequency ({required:.6g} Hz)",
            )

    @classmethod
    def validate_record_length(cls, config: "SimulationConfig") -> None:
        if config.n_samples < cls.MIN_RECORD_SAMPLES:
            raise InvalidConfigurationError(
                "duration",
                f"record has {config.n_samples} samples, at least {cls.MIN_RECORD_SAMPLES} are required",
            )

    @classmethod
    def validate_feedback_delay(cls, config: "SimulationConfig") -> None:
        if not config.feedback.active:
            return

        samples = delay_in_samples(config.feedback.delay, config.controlled_mode.resonance, config.sample_rate)
        if samples < 1:
            raise InvalidConfigurationError("feedback.delay", "delay is shorter than one sample; raise sample_rate")
        if samples < cls.MIN_DELAY_SAMPLES:
            raise InvalidConfigurationError(
                "feedback.delay",
                f"delay spans {samples} samples, at least {cls.MIN_DELAY_SAMPLES} are required; raise sample_rate",
            )

    @classmethod
    def validate_bandpass(cls, config: "SimulationConfig") -> None:
        center = config.feedback.bandpass_center
        if center is None:
            return
        nyquist = math.pi * config.sample_rate
        if center >= nyquist:
            raise InvalidConfigurationError("feedback.bandpass_center", "must lie below the Nyquist frequency")
