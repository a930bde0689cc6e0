import logging
import pathlib
import typing

from coems_bench.artifacts.run_directory import RunDirectory
from coems_bench.models.bench_models import ModeEntry
from coems_bench.models.physics_models import Environment
from coems_bench.models.spectrum_models import SpectrumFit
from coems_bench.spectral.fitting import fit_spectrum, fitted_spectrum
from coems_bench.spectral.psd_io import read_psd

_LOGGER = logging.getLogger(__name__)

FIT_FILE = "fit.json"
MODEL_FILE = "model_spectrum.csv"
DEFAULT_BATH_TEMPERATURE_K = 300.0


class AnalyzeCommand:
    """
    Fits a spectrum file at a known bath temperature. The report is always written; the model
    spectrum only when the fit converged.
    """

    def __init__(
        self,
        psd_path: pathlib.Path,
        n_modes: int,
        guesses: typing.Optional[list[ModeEntry]] = None,
        bath_temperature: float = DEFAULT_BATH_TEMPERATURE_K,
    ):
        if guesses is not None and len(guesses) != n_modes:
            raise ValueError(f"Got {len(guesses)} initial guesses for {n_modes} modes")
        self.psd_path = psd_path
        self.n_modes = n_modes
        self.guesses = guesses
        self.env = Environment(bath_temperature=bath_temperature)

    def run(self, run_dir: RunDirectory) -> SpectrumFit:
        """
        :raises PsdParseError: If the spectrum file cannot be parsed
        :raises FitConvergenceError: If no guesses were given and too few peaks stand out
        """
        psd = read_psd(self.psd_path)
        _LOGGER.info(f"Fitting {self.n_modes} mode(s) to {self.psd_path} ({psd.frequencies.size} bins)")
        initial = [entry.to_mode() for entry in self.guesses] if self.guesses is not None else None
        fit = fit_spectrum(psd, self.n_modes, self.env, initial_guesses=initial)

        run_dir.write_json(FIT_FILE, fit.report())
        if fit.converged:
            run_dir.write_psd(MODEL_FILE, fitted_spectrum(fit, psd))
        return fit
