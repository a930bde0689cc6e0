import logging
import math

import numpy as np

from coems_bench.models.physics_models import MechanicalMode
from coems_bench.models.spectrum_models import Psd, TemperatureEstimate

_LOGGER = logging.getLogger(__name__)

DEFAULT_BAND_LINEWIDTHS = 10.0
EDGE_FRACTION = 0.1


def adaptive_band(mode: MechanicalMode, gain: float, linewidths: float = DEFAULT_BAND_LINEWIDTHS) -> tuple[float, float]:
    """(low, high) in Hz: f_m +/- linewidths * (1 + g) * Gamma / 2pi, so a broadened cooled peak stays inside."""
    if gain < 0:
        raise ValueError(f"Gain must be non-negative, got {gain}")
    half_width = linewidths * (1.0 + gain) * mode.damping_hz
    return max(mode.resonance_hz - half_width, 0.0), mode.resonance_hz + half_width


def _check_band(psd: Psd, band: tuple[float, float]) -> np.ndarray:
    low, high = band
    if not low < high:
        raise ValueError(f"Band must be increasing, got {band}")
    if low < psd.frequencies[0] or high > psd.frequencies[-1]:
        raise ValueError(
            f"Band {low:.6g}-{high:.6g} Hz outside the spectrum {psd.frequencies[0]:.6g}-{psd.frequencies[-1]:.6g} Hz"
        )
    mask = psd.band_mask(band)
    if not np.any(mask):
        raise ValueError(f"Band {band} contains no bins")
    return mask


def band_area(psd: Psd, noise_floor: float, band: tuple[float, float]) -> float:
    """Signed area sum((S - floor) * df) over the band, m^2."""
    mask = _check_band(psd, band)
    return float(np.sum(psd.values[mask] - noise_floor) * psd.bin_width)


def estimate_band_floor(psd: Psd, band: tuple[float, float], edge_fraction: float = EDGE_FRACTION) -> float:
    """Mean level in the outer edge_fraction of the band on each side, read like a floor off an analyzer trace."""
    if not 0.0 < edge_fraction < 0.5:
        raise ValueError(f"Edge fraction must lie in (0, 0.5), got {edge_fraction}")
    mask = _check_band(psd, band)
    edge = edge_fraction * (band[1] - band[0])
    in_edges = mask & ((psd.frequencies <= band[0] + edge) | (psd.frequencies >= band[1] - edge))
    if not np.any(in_edges):
        raise ValueError(f"Band {band} is too narrow to read a floor from its edges")
    return float(np.mean(psd.values[in_edges]))


def infer_temperature(
    psd: Psd, noise_floor: float, band: tuple[float, float], reference_area: float, bath_temperature: float
) -> TemperatureEstimate:
    """
    Area-based temperature T0 * area / reference_area. The area is signed, so an in-loop spectrum
    squashed below its floor gives a negative, unphysical value.

    :param noise_floor: single-sided floor (m^2/Hz) subtracted before integrating
    :param reference_area: area of the same channel at zero gain
    :raises ValueError: If reference_area is not positive or the band leaves the spectrum
    """
    if not reference_area > 0:
        raise ValueError(f"Reference area must be positive, got {reference_area}")
    area = band_area(psd, noise_floor, band)
    value = bath_temperature * area / reference_area
    if value <= 0 or not math.isfinite(value):
        _LOGGER.info(f"Unphysical inferred temperature {value:.4g} K over {band[0]:.6g}-{band[1]:.6g} Hz")
    return TemperatureEstimate(
        value=value, reference_area=reference_area, area=area, band=band, unphysical=value <= 0
    )
