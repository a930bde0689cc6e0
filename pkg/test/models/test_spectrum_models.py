#!/usr/bin/env python3
import math

import numpy as np
import pydantic
import pytest

from coems_bench.models.spectrum_models import ModeFit, Psd, SpectrumFit, TemperatureEstimate


def flat_psd(n=16, step=2.0, level=1e-30, **kwargs):
    return Psd(frequencies=step * np.arange(n), values=np.full(n, level), rbw=1.5 * step, **kwargs)


class TestPsd:
    def test_valid(self):
        psd = flat_psd()
        assert psd.bin_width == 2.0
        assert psd.nearest_index(7.1) == 4
        assert psd.band_mask((4.0, 8.0)).sum() == 3
        np.testing.assert_allclose(psd.asd, 1e-15)

    def test_non_uniform_grid(self):
        with pytest.raises(pydantic.ValidationError, match="uniform"):
            Psd(frequencies=np.array([0.0, 1.0, 3.0]), values=np.ones(3), rbw=1.5)

    def test_decreasing_grid(self):
        with pytest.raises(pydantic.ValidationError, match="increasing"):
            Psd(frequencies=np.array([2.0, 1.0, 0.0]), values=np.ones(3), rbw=1.5)

    def test_negative_values(self):
        with pytest.raises(pydantic.ValidationError, match="non-negative"):
            Psd(frequencies=np.arange(3.0), values=np.array([1.0, -1.0, 1.0]), rbw=1.5)

    def test_shape_mismatch(self):
        with pytest.raises(pydantic.ValidationError, match="equal length"):
            Psd(frequencies=np.arange(3.0), values=np.ones(4), rbw=1.5)

    def test_single_bin(self):
        with pytest.raises(pydantic.ValidationError, match="two bins"):
            Psd(frequencies=np.array([1.0]), values=np.ones(1), rbw=1.5)

    def test_rbw_must_match_window(self):
        with pytest.raises(pydantic.ValidationError, match="rbw"):
            Psd(frequencies=np.arange(4.0), values=np.ones(4), rbw=1.0)
        Psd(frequencies=np.arange(4.0), values=np.ones(4), rbw=1.0, window="rectangular")

    def test_scaled_tracks_calibration(self):
        psd = flat_psd(calibration_scale=2.0).scaled(3.0)
        np.testing.assert_allclose(psd.values, 3e-30)
        assert psd.calibration_scale == pytest.approx(6.0)


class TestSpectrumFit:
    def mode_fit(self, **overrides):
        values = {"label": "m", "effective_mass": 1e-12, "resonance": 6.28e4, "damping": 314.0}
        values.update(overrides)
        return ModeFit(**values)

    def test_converged_requires_positive_parameters(self):
        with pytest.raises(pydantic.ValidationError, match="non-positive"):
            SpectrumFit(
                modes=[self.mode_fit(damping=-1.0)], noise_floor=1e-30, bath_temperature=300.0, residual_norm=1.0, converged=True
            )

    def test_unconverged_may_hold_anything(self):
        fit = SpectrumFit(
            modes=[self.mode_fit(damping=-1.0)],
            noise_floor=1e-30,
            bath_temperature=300.0,
            residual_norm=math.inf,
            converged=False,
            message="optimizer stopped",
        )
        report = fit.report()
        assert report["converged"] is False
        assert math.isnan(report["modes"][0]["zero_point_asd_m_per_rthz"])

    def test_report_units(self):
        fit = SpectrumFit(
            modes=[self.mode_fit()], noise_floor=2.25e-36, bath_temperature=300.0, residual_norm=0.5, converged=True
        )
        report = fit.report()
        assert report["noise_asd_m_per_rthz"] == pytest.approx(1.5e-18)
        assert report["modes"][0]["resonance_hz"] == pytest.approx(6.28e4 / (2.0 * math.pi))
        assert report["modes"][0]["zero_point_asd_m_per_rthz"] > 0


def test_temperature_estimate_band_order():
    with pytest.raises(pydantic.ValidationError, match="increasing"):
        TemperatureEstimate(value=1.0, reference_area=1.0, area=1.0, band=(2.0, 1.0), unphysical=False)
    with pytest.raises(pydantic.ValidationError):
        TemperatureEstimate(value=1.0, reference_area=0.0, area=1.0, band=(1.0, 2.0), unphysical=False)
