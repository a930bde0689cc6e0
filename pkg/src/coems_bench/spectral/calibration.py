"""
Reference-tone calibration and tone measurements.

A tone's power is measured by summing the bins around it, so the result does not depend on
where the tone falls relative to the bin centres.
"""

import logging
import math
import typing

import numpy as np

from coems_bench.models.spectrum_models import Psd
from coems_bench.physics.actuation import peak_asd_from_tone_power

_LOGGER = logging.getLogger(__name__)

TONE_HALF_WIDTH_BINS = 4
MIN_TONE_TO_FLOOR = 10.0  # 10 dB


class ReferenceTone(typing.NamedTuple):
    frequency: float
    """Hz"""
    level_asd: float
    """Single-sided level the tone shows in one resolution bandwidth, m/sqrt(Hz)"""


class ReferenceToneNotFoundError(ValueError):
    def __init__(self, frequency: float, message: str) -> None:
        self.frequency = frequency
        super().__init__(message)


def tone_level_asd(amplitude: float, rbw_hz: float) -> float:
    """Level sqrt(A^2 / 2 / rbw) at which a tone of amplitude A shows on an analyzer."""
    return math.sqrt(0.5 * amplitude**2 / rbw_hz)


def _tone_slice(psd: Psd, frequency: float, half_width_bins: int) -> slice:
    if not psd.frequencies[0] <= frequency <= psd.frequencies[-1]:
        raise ReferenceToneNotFoundError(frequency, f"Tone at {frequency:.6g} Hz lies outside the spectrum")
    center = psd.nearest_index(frequency)
    return slice(max(center - half_width_bins, 0), min(center + half_width_bins + 1, psd.frequencies.size))


def local_floor(psd: Psd, frequency: float, half_width_bins: int = TONE_HALF_WIDTH_BINS) -> float:
    """Median level in a ring of bins just outside the tone."""
    center = psd.nearest_index(frequency)
    offsets = np.arange(2 * half_width_bins, 6 * half_width_bins + 1)
    indices = np.concatenate([center - offsets, center + offsets])
    indices = indices[(indices >= 0) & (indices < psd.frequencies.size)]
    if indices.size == 0:
        raise ReferenceToneNotFoundError(frequency, "No bins around the tone to estimate a floor")
    return float(np.median(psd.values[indices]))


def tone_power(
    psd: Psd, frequency: float, half_width_bins: int = TONE_HALF_WIDTH_BINS, floor: float = 0.0
) -> float:
    """
    Power (m^2, i.e. A^2 / 2) in the bins around a tone, less `floor` (m^2/Hz) over the same bins.
    """
    bins = psd.values[_tone_slice(psd, frequency, half_width_bins)]
    return float(np.sum(bins - floor) * psd.bin_width)


def tone_peak_asd(psd: Psd, frequency: float, half_width_bins: int = TONE_HALF_WIDTH_BINS) -> float:
    """Peak ASD of a tone in the convention of gradient_force_from_peak."""
    return peak_asd_from_tone_power(tone_power(psd, frequency, half_width_bins), psd.rbw)


def calibrate(psd: Psd, reference: ReferenceTone, half_width_bins: int = TONE_HALF_WIDTH_BINS) -> float:
    """
    Scale that maps the channel's PSD to absolute m^2/Hz, so that the reference tone reads
    its known level.

    :raises ReferenceToneNotFoundError: If the tone is outside the spectrum or less than 10 dB above
        the local floor
    """
    floor = local_floor(psd, reference.frequency, half_width_bins)
    power = tone_power(psd, reference.frequency, half_width_bins, floor=floor)
    level = power / psd.rbw
    if level <= 0 or level < MIN_TONE_TO_FLOOR * floor:
        _LOGGER.warning(f"Reference tone at {reference.frequency:.6g} Hz: level {level:.3g}, floor {floor:.3g}")
        raise ReferenceToneNotFoundError(
            reference.frequency, f"No reference tone at {reference.frequency:.6g} Hz at least 10 dB above the floor"
        )

    scale = reference.level_asd**2 / level
    _LOGGER.info(f"Calibration scale {scale:.6g} from tone at {reference.frequency:.6g} Hz")
    return scale


def apply_calibration(psd: Psd, scale: float) -> Psd:
    if scale <= 0:
        raise ValueError(f"Calibration scale must be positive, got {scale}")
    return psd.scaled(scale)
