import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from squeezechain import anchors
from squeezechain.calibration import (
    LABELS,
    ZeroSpanTrace,
    extract_squeezing,
    fit_gain_curve,
    fit_loss_model,
    gain_curve_model,
    gain_from_antisqueezing,
    gain_from_photon_number,
    interference_amplitude,
    squeezer_gain_parameter,
    synthesize_traces,
)
from squeezechain.chain import ChainParams, lossy_squeezing_limit, simulate_chain
from squeezechain.units import db_to_r, r_to_db

RAMP = np.linspace(0.0, 2 * math.pi, 10_001)
# mpmath: inverse of the anti-squeezing law at (9.21 dB, 0.7)
GAIN_FROM_921 = 10.599857609482797
SINH2_4605 = 2498.6492398679775


def ref_chain(**kw):
    base = dict(r1=db_to_r(10.6), r2=db_to_r(50), eta_coupler=0.7, pump_leak=0.2, noise_floor=anchors.CALIBRATED_NOISE_FLOOR)
    base.update(kw)
    return ChainParams(**base)


class TestTrace:
    def test_validation(self):
        with pytest.raises(ValueError):
            ZeroSpanTrace(np.arange(8.0), np.ones(8), "squeezing_run", 0)
        with pytest.raises(ValueError):
            ZeroSpanTrace(np.arange(20.0), -np.ones(20), "squeezing_run", 0)
        with pytest.raises(ValueError):
            ZeroSpanTrace(np.arange(20.0), np.ones(20), "dark", 0)
        with pytest.raises(ValueError):
            ZeroSpanTrace(np.arange(20.0), np.ones(19), "squeezing_run", 0)


class TestSynthesize:
    def test_labels(self):
        assert set(synthesize_traces(ref_chain(), RAMP)) == set(LABELS)

    def test_no_leak_flat_references(self):
        t = synthesize_traces(ref_chain(pump_leak=0.0), RAMP)
        levels = [t[k].power for k in ("shotnoise_original", "shotnoise_max", "shotnoise_min")]
        assert np.ptp(levels) == 0.0

    def test_leak_without_squeezer_spans_references(self):
        t = synthesize_traces(ref_chain(r1=0.0), RAMP)
        run = t["squeezing_run"].power
        assert run.max() == pytest.approx(t["shotnoise_max"].power[0], rel=1e-12)
        assert run.min() == pytest.approx(t["shotnoise_min"].power[0], rel=1e-12)
        assert t["shotnoise_max"].power[0] > t["shotnoise_min"].power[0]

    def test_interference_extrema(self):
        a = interference_amplitude([0.0, math.pi], 0.2, 0.05)
        leak = math.sqrt(0.2) * 0.05
        assert a == pytest.approx([1 + leak, 1 - leak])

    def test_deterministic(self):
        a = synthesize_traces(ref_chain(), RAMP, rin=0.01, seed=7)
        b = synthesize_traces(ref_chain(), RAMP, rin=0.01, seed=7)
        c = synthesize_traces(ref_chain(), RAMP, rin=0.01, seed=8)
        for k in LABELS:
            assert np.array_equal(a[k].power, b[k].power)
        assert not np.array_equal(a["squeezing_run"].power, c["squeezing_run"].power)

    def test_short_ramp(self):
        with pytest.raises(ValueError):
            synthesize_traces(ref_chain(), np.linspace(0, 5.0, 100))


class TestExtract:
    @pytest.mark.parametrize("r1_db", [3.0, 10.6, 15.0])
    @pytest.mark.parametrize("eta", [0.4, 0.7, 1.0])
    @pytest.mark.parametrize("leak", [0.0, 0.2])
    @pytest.mark.parametrize("floor", [0.0, 1.0])
    def test_noiseless_round_trip(self, r1_db, eta, leak, floor):
        p = ref_chain(r1=db_to_r(r1_db), eta_coupler=eta, pump_leak=leak, noise_floor=floor)
        got = extract_squeezing(synthesize_traces(p, RAMP))
        want = simulate_chain(p)
        assert abs(got.s_minus_db - want.s_minus_db) < 0.05
        assert abs(got.s_plus_db - want.s_plus_db) < 0.05

    def test_reference_device_round_trip(self):
        p = ref_chain()
        got = extract_squeezing(synthesize_traces(p, RAMP))
        want = simulate_chain(p)
        assert abs(got.s_minus_db - want.s_minus_db) < 0.01

    def test_floor_bias_with_leak(self):
        # the floor breaks gain invariance of the ratio, and the leak moves the
        # gain between extrema: strong squeezing near the floor reads low
        p = ref_chain(r1=db_to_r(15.0), eta_coupler=1.0)
        got = extract_squeezing(synthesize_traces(p, RAMP))
        bias = got.s_minus_db - simulate_chain(p).s_minus_db
        assert 0.05 < bias < 0.2
        no_leak = ref_chain(r1=db_to_r(15.0), eta_coupler=1.0, pump_leak=0.0)
        assert extract_squeezing(synthesize_traces(no_leak, RAMP)).s_minus_db == pytest.approx(
            simulate_chain(no_leak).s_minus_db, abs=1e-9
        )

    def test_identical_traces_zero(self):
        ramp = np.linspace(0, 7, 50)
        traces = [ZeroSpanTrace(ramp, np.full(50, 3.0), lab, 0) for lab in LABELS]
        res = extract_squeezing(traces)
        assert (res.s_minus_db, res.s_plus_db) == (0.0, 0.0)

    def test_missing_label(self):
        t = synthesize_traces(ref_chain(), RAMP)
        del t["shotnoise_min"]
        with pytest.raises(ValueError, match="shotnoise_min"):
            extract_squeezing(t)

    def test_zero_power(self):
        ramp = np.linspace(0, 7, 20)
        traces = [ZeroSpanTrace(ramp, np.zeros(20) if lab == "squeezing_run" else np.ones(20), lab, 0) for lab in LABELS]
        with pytest.raises(ValueError):
            extract_squeezing(traces)

    def test_smoothing_reduces_bias(self):
        p = ref_chain()
        want = simulate_chain(p).s_minus_db
        errs = {}
        for w in (1, 25):
            errs[w] = np.mean(
                [abs(extract_squeezing(synthesize_traces(p, RAMP, rin=0.02, seed=s), w).s_minus_db - want) for s in range(10)]
            )
        assert errs[25] < errs[1]

    def test_spread_grows_with_rin(self):
        p = ref_chain()
        spreads = []
        for rin in (0.0, 0.005, 0.01, 0.02):
            vals = [extract_squeezing(synthesize_traces(p, RAMP, rin=rin, seed=s)).s_minus_db for s in range(30)]
            spreads.append(np.std(vals))
        assert all(a <= b for a, b in zip(spreads, spreads[1:]))


def loss_data(eta, rs):
    return [lossy_squeezing_limit(r, eta)[::-1] for r in rs]


class TestLossFit:
    def test_noiseless(self):
        rs = np.linspace(0.4, db_to_r(10.6), 8)
        fit = fit_loss_model(loss_data(0.7, rs))
        assert fit.eta_hat == pytest.approx(0.7, abs=1e-4)
        assert fit.inferred_squeezing_db == pytest.approx(10.6, abs=0.01)
        assert fit.r_hat == pytest.approx(rs, abs=1e-4)
        assert fit.residual_db < 1e-6

    def test_lossless_single_point(self):
        r = 1.1
        fit = fit_loss_model([(r_to_db(r), -r_to_db(r))])
        assert fit.eta_hat == pytest.approx(1.0)

    def test_two_points_exact(self):
        fit = fit_loss_model(loss_data(0.55, [0.6, 1.3]))
        assert fit.eta_hat == pytest.approx(0.55, abs=1e-6)
        assert fit.residual_db < 1e-6

    def test_degenerate(self):
        fit = fit_loss_model([(0.0, 0.0), (0.0, 0.0)])
        assert fit.underdetermined and fit.eta_hat is None

    def test_noisy_over_seeds(self):
        rs = np.linspace(0.4, db_to_r(10.6), 10)
        clean = np.array(loss_data(0.7, rs))
        worst = 0.0
        for seed in range(100):
            noisy = clean + 0.1 * np.random.default_rng(seed).standard_normal(clean.shape)
            worst = max(worst, abs(fit_loss_model(noisy).eta_hat - 0.7))
        assert worst < 0.03

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.2, 1.0), st.floats(0.5, 2.0))
    def test_recovers_eta(self, eta, r_max):
        fit = fit_loss_model(loss_data(eta, np.linspace(0.3, r_max, 6)))
        assert fit.eta_hat == pytest.approx(eta, abs=1e-4)


class TestGainFit:
    def data(self, g=1.4, eta=0.2, noise=0.0, seed=0):
        e = np.linspace(0.2, 6.0, 15)
        n = gain_curve_model(e, g, eta) * (1 + noise * np.random.default_rng(seed).standard_normal(e.size))
        return np.column_stack([e, n])

    def test_noiseless(self):
        fit = fit_gain_curve(self.data())
        assert fit.g_hat == pytest.approx(1.4, rel=1e-6)
        assert fit.eta_overall_hat == pytest.approx(0.2, rel=1e-6)

    def test_one_percent_noise(self):
        fit = fit_gain_curve(self.data(noise=0.01, seed=3))
        assert fit.g_hat == pytest.approx(1.4, rel=0.01)
        assert fit.eta_overall_hat == pytest.approx(0.2, rel=0.05)

    def test_scaling_separability(self):
        d = self.data()
        a = fit_gain_curve(d)
        d[:, 1] *= 3.0
        b = fit_gain_curve(d)
        assert b.g_hat == pytest.approx(a.g_hat, rel=1e-6)
        assert b.eta_overall_hat == pytest.approx(3 * a.eta_overall_hat, rel=1e-6)

    def test_errors(self):
        with pytest.raises(ValueError):
            fit_gain_curve([(1.0, 2.0)])
        with pytest.raises(ValueError):
            fit_gain_curve([(-1.0, 2.0), (1.0, 3.0)])

    def test_high_gain_rule(self):
        assert np.sinh(4.605) ** 2 == pytest.approx(SINH2_4605, rel=1e-12)
        assert SINH2_4605 == pytest.approx(10 ** 4 / 4, rel=0.001)

    def test_gain_law(self):
        assert squeezer_gain_parameter(0.76, 1.4) == pytest.approx(db_to_r(10.6), rel=2e-4)


class TestInversions:
    def test_lossless(self):
        assert gain_from_antisqueezing(7.3, 1.0) == pytest.approx(7.3, rel=1e-14)

    def test_reference(self):
        assert gain_from_antisqueezing(9.21, 0.7) == pytest.approx(GAIN_FROM_921, abs=1e-10)
        assert gain_from_antisqueezing(9.21, 0.7) == pytest.approx(10.6, abs=0.01)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.0, 3.0), st.floats(0.01, 1.0))
    def test_round_trip(self, r, eta):
        s_plus = lossy_squeezing_limit(r, eta)[1]
        assert gain_from_antisqueezing(s_plus, eta) == pytest.approx(r_to_db(r), abs=1e-9)

    def test_below_floor(self):
        with pytest.raises(ValueError):
            gain_from_antisqueezing(-0.5, 0.7)

    def test_photon_number(self):
        r = 4.0
        n = 0.2 * math.sinh(r) ** 2
        assert gain_from_photon_number(n, 0.2) == pytest.approx(r_to_db(r))
        assert gain_from_photon_number(n, 0.2, exact=False) == pytest.approx(r_to_db(r), abs=0.02)
