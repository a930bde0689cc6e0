"""
Spectral density conventions.

Internally every displacement PSD is double-sided in angular frequency, so that
(1/2pi) * integral over all omega gives the variance. Reported spectra are single-sided
in hertz: S_ss(f) = 2 * S_ds(omega = 2 pi f).
"""

import enum
import math

import numpy as np
import numpy.typing as npt


class SpectralConvention(enum.Enum):
    DOUBLE_SIDED_ANGULAR = "double-sided-angular"
    SINGLE_SIDED_HERTZ = "single-sided-hertz"


def to_single_sided_hertz(
    omega: npt.ArrayLike, psd_double_sided: npt.ArrayLike
) -> tuple[np.ndarray, np.ndarray]:
    """
    :param omega: angular frequencies (rad/s), non-negative
    :param psd_double_sided: PSD values in the double-sided angular convention
    :return: (frequency in Hz, PSD in m^2/Hz single-sided)
    """
    omega_arr = np.asarray(omega, dtype=float)
    return omega_arr / (2.0 * math.pi), 2.0 * np.asarray(psd_double_sided, dtype=float)


def to_double_sided_angular(
    frequency_hz: npt.ArrayLike, psd_single_sided: npt.ArrayLike
) -> tuple[np.ndarray, np.ndarray]:
    frequency_arr = np.asarray(frequency_hz, dtype=float)
    return 2.0 * math.pi * frequency_arr, 0.5 * np.asarray(psd_single_sided, dtype=float)


def convert(
    values: npt.ArrayLike, source: SpectralConvention, target: SpectralConvention
) -> np.ndarray:
    """Converts PSD levels between conventions (the frequency axis is handled separately)."""
    arr = np.asarray(values, dtype=float)
    if source == target:
        return arr.copy()
    if source == SpectralConvention.DOUBLE_SIDED_ANGULAR:
        return 2.0 * arr
    return 0.5 * arr
