import logging

import numpy as np
import numpy.typing as npt
from scipy import signal

from coems_bench.models.spectrum_models import Psd
from coems_bench.utils.base_types import WindowName

_LOGGER = logging.getLogger(__name__)

_SCIPY_WINDOWS: dict[str, str] = {"hann": "hann", "rectangular": "boxcar"}


class SeriesTooShortError(ValueError):
    def __init__(self, series_length: int, segment_length: int) -> None:
        self.series_length = series_length
        self.segment_length = segment_length
        super().__init__(f"Series of {series_length} samples is shorter than one segment of {segment_length}")


def equivalent_noise_bandwidth(window: WindowName, segment_length: int, sample_rate: float) -> float:
    """Resolution bandwidth fs * sum(w^2) / sum(w)^2 of the periodic window, in Hz."""
    taper = signal.get_window(_SCIPY_WINDOWS[window], segment_length, fftbins=True)
    return float(sample_rate * np.sum(taper**2) / np.sum(taper) ** 2)


def welch_psd(
    series: npt.ArrayLike,
    sample_rate: float,
    segment_length: int,
    overlap_fraction: float = 0.5,
    window: WindowName = "hann",
) -> Psd:
    """
    Averaged-periodogram estimate, single-sided in hertz, normalized so that white noise of
    variance s^2 reads 2 s^2 / fs and the bins sum (times the bin width) to the series variance.

    :param segment_length: samples per segment, a power of two
    :param overlap_fraction: fraction of a segment shared with the next, in [0, 1)
    :raises SeriesTooShortError: If the series does not fill one segment
    """
    x = np.asarray(series, dtype=float)
    if segment_length < 2 or segment_length & (segment_length - 1):
        raise ValueError(f"Segment length must be a power of two, got {segment_length}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise ValueError(f"Overlap fraction must lie in [0, 1), got {overlap_fraction}")
    if x.ndim != 1 or x.shape[0] < segment_length:
        raise SeriesTooShortError(x.shape[0] if x.ndim == 1 else 0, segment_length)

    overlap = int(overlap_fraction * segment_length)
    frequencies, values = signal.welch(
        x,
        fs=sample_rate,
        window=_SCIPY_WINDOWS[window],
        nperseg=segment_length,
        noverlap=overlap,
        detrend="constant",
        return_onesided=True,
        scaling="density",
        average="mean",
    )
    segments = 1 + (x.shape[0] - segment_length) // (segment_length - overlap)
    _LOGGER.debug(f"Welch estimate: {segments} segments of {segment_length}, {window} window")

    return Psd(
        frequencies=frequencies,
        values=values,
        rbw=equivalent_noise_bandwidth(window, segment_length, sample_rate),
        window=window,
        segments_averaged=segments,
    )


def ensemble_average(spectra: list[Psd]) -> Psd:
    """Mean of spectra on the same grid; the segment counts add."""
    if not spectra:
        raise ValueError("Nothing to average")
    first = spectra[0]
    for psd in spectra[1:]:
        if psd.frequencies.shape != first.frequencies.shape or not np.array_equal(psd.frequencies, first.frequencies):
            raise ValueError("Spectra must share a frequency grid")
    return first.model_copy(
        update={
            "values": np.mean([psd.values for psd in spectra], axis=0),
            "segments_averaged": sum(psd.segments_averaged for psd in spectra),
        }
    )
