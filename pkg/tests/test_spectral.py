import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from squeezechain import anchors
from squeezechain.chain import ChainParams, simulate_chain
from squeezechain.config import SpectralConfig
from squeezechain.spectral import (
    SINC2_HALF_POWER_X,
    CouplerTable,
    DispersionSpec,
    SpectralGrid,
    SpectralModelParams,
    bandwidth,
    beta2_for_half_power_width,
    gain_profile,
    linearized_squeezing,
    phase_mismatch,
    squeezing_at_wavelength,
    squeezing_spectrum,
    temporal_cycles,
)

C = 299792458.0
# mpmath values
SINC2_ROOT = 1.3915573782515101
DK_REF = 3.9478417604357434
GAUSS_TL_CYCLES = 2.5202248227758821  # 0.441 / 25.1 THz at 2090 nm


def small_grid(n=41, span=60e12):
    return SpectralGrid.symmetric(2.09e-6, span, n)


class TestGrid:
    def test_symmetric_constructor(self):
        g = small_grid()
        assert g.n_bins == 41
        assert np.allclose(g.offsets, -g.offsets[::-1])
        assert g.center_frequency == pytest.approx(C / 2.09e-6)

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            SpectralGrid(2.09e-6, np.array([-1.0, 0.0, 2.0]))

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            SpectralGrid(2.09e-6, np.array([1.0, 0.0, -1.0]))

    def test_dispersion_length(self):
        with pytest.raises(ValueError):
            DispersionSpec(0.0)


class TestPhaseMismatch:
    def test_zero_at_degeneracy(self):
        assert phase_mismatch(DispersionSpec(1e-3, beta2=1e-26), 0.0) == 0.0

    def test_quadratic_scaling(self):
        d = DispersionSpec(1e-3, beta2=2e-26)
        assert phase_mismatch(d, math.sqrt(2) * 3e13) == pytest.approx(2 * phase_mismatch(d, 3e13))

    def test_reference(self):
        d = DispersionSpec(1e-3, beta2=1e-27)
        assert phase_mismatch(d, 2 * math.pi * 1e13) == pytest.approx(DK_REF, rel=1e-14)

    def test_fourth_order(self):
        d = DispersionSpec(1e-3, delta_k0=5.0, beta4=12.0)
        assert phase_mismatch(d, 2.0) == pytest.approx(5.0 + 16.0)


class TestGainProfile:
    def test_flat(self):
        assert np.all(gain_profile(DispersionSpec(1e-3), 1.3, small_grid()) == 1.3)

    def test_zero_peak(self):
        assert np.all(gain_profile(DispersionSpec(1e-3, beta2=1e-26), 0.0, small_grid()) == 0.0)

    def test_half_gain_point(self):
        assert SINC2_HALF_POWER_X == pytest.approx(SINC2_ROOT, rel=1e-14)
        L = 2e-3
        d = DispersionSpec(L, beta2=1e-26)
        omega = math.sqrt(2 * SINC2_ROOT / (L * 1e-26))
        assert gain_profile(d, 1.0, [omega])[0] == pytest.approx(1 / math.sqrt(2), rel=1e-12)

    def test_negative_peak(self):
        with pytest.raises(ValueError):
            gain_profile(DispersionSpec(1e-3), -1.0, small_grid())


class TestCouplerTable:
    def test_interpolates_through_nodes(self):
        t = CouplerTable((1950, 2090, 2200), (0.66, 0.70, 0.76))
        assert t([1950, 2090, 2200]) == pytest.approx([0.66, 0.70, 0.76])

    def test_clamps_outside(self):
        t = CouplerTable((1950, 2090, 2200), (0.66, 0.70, 0.76))
        assert t(1000.0) == pytest.approx(0.66)
        assert t(3000.0) == pytest.approx(0.76)

    def test_monotone_between_monotone_nodes(self):
        t = CouplerTable((1950, 2090, 2200), (0.66, 0.70, 0.76))
        v = t(np.linspace(1950, 2200, 200))
        assert np.all(np.diff(v) >= -1e-15)

    def test_validation(self):
        with pytest.raises(ValueError):
            CouplerTable((1950, 2090), (0.5, 1.2))
        with pytest.raises(ValueError):
            CouplerTable((2090, 1950), (0.5, 0.6))


def flat_params(**kw):
    base = dict(
        r1_peak=1.1,
        r2_peak=5.0,
        squeezer=DispersionSpec(2.5e-3),
        measurement=DispersionSpec(5e-3),
        coupler=CouplerTable.flat(0.7),
    )
    base.update(kw)
    return SpectralModelParams(**base)


class TestSpectrum:
    def test_flat_equals_single_mode(self):
        spec = squeezing_spectrum(flat_params(noise_floor=3.0), small_grid(11))
        single = simulate_chain(ChainParams(r1=1.1, r2=5.0, eta_coupler=0.7, noise_floor=3.0))
        assert np.allclose(spec.s_minus_db, single.s_minus_db, atol=1e-12)
        assert np.allclose(spec.s_plus_db, single.s_plus_db, atol=1e-12)

    def test_even_in_detuning(self):
        p = flat_params(
            squeezer=DispersionSpec(2.5e-3, beta2=8e-26, beta4=1e-53),
            measurement=DispersionSpec(5e-3, beta2=1e-25),
            noise_floor=10.0,
        )
        spec = squeezing_spectrum(p, small_grid(31))
        assert np.allclose(spec.s_minus_db, spec.s_minus_db[::-1], atol=1e-9)
        assert np.allclose(spec.s_plus_db, spec.s_plus_db[::-1], atol=1e-9)

    @settings(max_examples=15, deadline=None)
    @given(st.floats(0.1, 1.0), st.floats(0.0, 0.5))
    def test_lower_coupler_never_improves(self, eta, drop):
        grid = small_grid(15)
        disp = dict(squeezer=DispersionSpec(2.5e-3, beta2=8e-26), measurement=DispersionSpec(5e-3, beta2=1e-25))
        hi = squeezing_spectrum(flat_params(coupler=CouplerTable.flat(eta), **disp), grid)
        lo = squeezing_spectrum(flat_params(coupler=CouplerTable.flat(eta * (1 - drop)), **disp), grid)
        assert np.all(np.abs(lo.s_minus_db) <= np.abs(hi.s_minus_db) + 1e-12)

    def test_narrower_measurement_narrows_bandwidth(self):
        grid = SpectralGrid.symmetric(2.09e-6, 100e12, 201)
        sq = DispersionSpec(2.5e-3, beta2=anchors.CALIBRATED_SQUEEZER_BETA2)
        wide = flat_params(squeezer=sq, measurement=DispersionSpec(5e-3, beta2=0.5 * anchors.CALIBRATED_SQUEEZER_BETA2), noise_floor=80.0)
        narrow = replace(wide, measurement=DispersionSpec(5e-3, beta2=2 * anchors.CALIBRATED_SQUEEZER_BETA2))
        bw = lambda p: bandwidth(grid.frequencies, squeezing_spectrum(p, grid).s_minus_db).width_hz
        assert bw(narrow) < bw(wide)

    def test_at_wavelength_matches_grid_bin(self):
        p = SpectralConfig().to_params()
        grid = small_grid(21)
        spec = squeezing_spectrum(p, grid)
        k = 3
        res = squeezing_at_wavelength(p, 2.09e-6, grid.wavelengths[k])
        assert res.s_minus_db == pytest.approx(spec.s_minus_db[k], abs=1e-9)


class TestBandwidth:
    def test_rectangle(self):
        f = np.arange(-50, 51, dtype=float)
        v = np.where(np.abs(f) <= 20, -5.0, 0.0)
        bw = bandwidth(f, v, 3.0)
        # edges interpolated between the last inside and first outside bins
        assert bw.width_hz == pytest.approx(40.0 + 2 * (5 - 2) / 5)
        assert not bw.saturated

    def test_gaussian_fwhm(self):
        sigma = 7e12
        f = np.linspace(-50e12, 50e12, 401)
        bw = bandwidth(f, np.exp(-0.5 * (f / sigma) ** 2), 10 * math.log10(2), in_db=False)
        assert bw.width_hz == pytest.approx(2 * math.sqrt(2 * math.log(2)) * sigma, rel=0.01)

    def test_sinc2_calibrated_width(self):
        width = anchors.SQUEEZER_OPG_WIDTH_HZ
        beta2 = beta2_for_half_power_width(anchors.SQUEEZER_LENGTH, width)
        assert beta2 == pytest.approx(anchors.CALIBRATED_SQUEEZER_BETA2, rel=1e-12)
        grid = anchors.default_grid()
        r = gain_profile(DispersionSpec(anchors.SQUEEZER_LENGTH, beta2=beta2), 1.0, grid)
        bw = bandwidth(grid.frequencies, r**2, 10 * math.log10(2), in_db=False)
        resolution = np.diff(grid.frequencies).max()
        assert abs(bw.width_hz - width) < resolution

    def test_saturated(self):
        f = np.linspace(-1, 1, 11)
        bw = bandwidth(f, np.full(11, -4.0), 3.0)
        assert bw.saturated and bw.width_hz == pytest.approx(2.0)

    def test_threshold_ordering(self):
        p = SpectralConfig().to_params()
        grid = small_grid(61, 100e12)
        s = squeezing_spectrum(p, grid).s_minus_db
        assert bandwidth(grid.frequencies, s, 3.0).width_hz <= bandwidth(grid.frequencies, s, 10.0).width_hz

    def test_errors(self):
        with pytest.raises(ValueError):
            bandwidth([], [], 3.0)


class TestTemporalCycles:
    def gaussian(self, fwhm, n=801, span=200e12):
        f = np.linspace(-span / 2, span / 2, n)
        sd = fwhm / (2 * math.sqrt(2 * math.log(2)))
        return f, np.exp(-0.5 * (f / sd) ** 2)

    def test_reference_gaussian(self):
        f, s = self.gaussian(25.1e12)
        d = temporal_cycles(f, s, 2.09e-6)
        assert d.cycles == pytest.approx(GAUSS_TL_CYCLES, rel=2e-3)
        assert d.duration_s == pytest.approx(17.57e-15, rel=2e-3)
        assert "FWHM" in d.definition

    def test_width_scaling(self):
        a = temporal_cycles(*self.gaussian(20e12), 2.09e-6).cycles
        b = temporal_cycles(*self.gaussian(40e12), 2.09e-6).cycles
        assert a / b == pytest.approx(2.0, rel=1e-6)

    @pytest.mark.parametrize("fwhm", [10e12, 25.1e12, 40e12])
    def test_numeric_matches_fit(self, fwhm):
        f, s = self.gaussian(fwhm)
        fit = temporal_cycles(f, s, 2.09e-6, "gaussian_fit").cycles
        num = temporal_cycles(f, s, 2.09e-6, "transform_limit_numeric").cycles
        assert num == pytest.approx(fit, rel=0.02)

    def test_single_bin_flagged(self):
        f = np.linspace(-50e12, 50e12, 101)
        s = np.zeros(101)
        s[50] = 1.0
        for method in ("gaussian_fit", "transform_limit_numeric"):
            assert temporal_cycles(f, s, 2.09e-6, method).flagged

    def test_zero_spectrum(self):
        with pytest.raises(ValueError):
            temporal_cycles(np.arange(5.0), np.zeros(5), 2.09e-6)

    def test_linearized(self):
        assert linearized_squeezing([-10.0, 0.0, 3.0]) == pytest.approx([0.9, 0.0, 0.0])
