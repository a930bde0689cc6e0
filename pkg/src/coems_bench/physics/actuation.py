import logging
import math

from coems_bench.models.physics_models import MechanicalMode

_LOGGER = logging.getLogger(__name__)

_FORCE_PREFACTOR = 4.0 / math.sqrt(math.pi)

# The peak spectral density in the gradient-force relation is a quarter of the
# single-sided level a tone of the same power produces in one resolution bandwidth.
PEAK_DENSITY_PER_TONE_DENSITY = 0.25


def gradient_force_from_peak(mode: MechanicalMode, rbw: float, peak_asd: float) -> float:
    """
    Peak-to-peak drive force implied by the resonant peak of the driven spectrum:
    F = (4/sqrt(pi)) m omega_m Gamma sqrt(Gamma_RBW) sqrt(S_x,max).

    :param rbw: resolution bandwidth as an angular rate (rad/s)
    :param peak_asd: peak amplitude spectral density (m/sqrt(Hz))
    :return: peak-to-peak force in newtons
    """
    if rbw <= 0:
        raise ValueError(f"Resolution bandwidth must be positive, got {rbw}")
    if peak_asd < 0:
        raise ValueError(f"Peak ASD must be non-negative, got {peak_asd}")
    return _FORCE_PREFACTOR * mode.effective_mass * mode.resonance * mode.damping * math.sqrt(rbw) * peak_asd


def peak_asd_from_tone_power(tone_power: float, rbw_hz: float) -> float:
    """
    Peak ASD, in the convention of gradient_force_from_peak, of a tone carrying
    tone_power (m^2, i.e. amplitude^2 / 2) measured with the given resolution bandwidth.
    """
    if rbw_hz <= 0:
        raise ValueError(f"Resolution bandwidth must be positive, got {rbw_hz}")
    return math.sqrt(PEAK_DENSITY_PER_TONE_DENSITY * max(tone_power, 0.0) / rbw_hz)


def resonant_amplitude(mode: MechanicalMode, force_amplitude: float) -> float:
    """Steady-state displacement amplitude for a force of the given amplitude at omega_m."""
    return force_amplitude / (mode.effective_mass * mode.damping * mode.resonance)
