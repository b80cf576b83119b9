"""Zero-span trace synthesis, shot-noise calibration and model fits.

Traces are in detected mean photon number.  The leaked squeezer pump adds to
the measurement pump in amplitude, ``A_eff = |1 + sqrt(pump_leak) * a * e^{i phi}|``
(amplitudes relative to pump 2, ``a = pump_ratio``), and the measurement gain
parameter scales linearly with ``A_eff``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize
from scipy.ndimage import uniform_filter1d

from .chain import ChainParams, SqueezingResult, output_photons_array
from .units import r_to_db

LABELS = ("squeezing_run", "shotnoise_original", "shotnoise_max", "shotnoise_min")

#: Pump-1 to pump-2 field amplitude ratio at the chip; not measured, a config constant.
DEFAULT_PUMP_RATIO = 0.05

_LOG_FACTOR = 10.0 / math.log(10.0)


@dataclass(frozen=True)
class ZeroSpanTrace:
    ramp_phase: np.ndarray
    power: np.ndarray
    label: str
    rng_seed: int

    def __post_init__(self):
        ramp = np.array(self.ramp_phase, dtype=float)
        power = np.array(self.power, dtype=float)
        if ramp.ndim != 1 or ramp.shape != power.shape:
            raise ValueError("ramp_phase and power must be 1-D and equally long")
        if ramp.size < 16:
            raise ValueError(f"a trace needs at least 16 samples, got {ramp.size}")
        if np.any(power < 0) or not np.all(np.isfinite(power)):
            raise ValueError("trace powers must be finite and >= 0")
        if self.label not in LABELS:
            raise ValueError(f"unknown trace label {self.label!r}")
        ramp.setflags(write=False)
        power.setflags(write=False)
        object.__setattr__(self, "ramp_phase", ramp)
        object.__setattr__(self, "power", power)


@dataclass(frozen=True)
class LossFitResult:
    eta_hat: Optional[float]
    r_hat: Tuple[float, ...]
    residual_db: float
    inferred_squeezing_db: Optional[float]
    underdetermined: bool = False


@dataclass(frozen=True)
class GainFitResult:
    g_hat: float
    eta_overall_hat: float
    residual: float


def interference_amplitude(ramp_phase, pump_leak: float, pump_ratio: float = DEFAULT_PUMP_RATIO):
    """Effective measurement-pump amplitude relative to pump 2 alone."""
    leak = math.sqrt(pump_leak) * pump_ratio
    return np.abs(1.0 + leak * np.exp(1j * np.asarray(ramp_phase, dtype=float)))


def synthesize_traces(
    p: ChainParams,
    ramp: Sequence[float],
    rin: float = 0.0,
    seed: int = 0,
    *,
    pump_ratio: float = DEFAULT_PUMP_RATIO,
) -> Dict[str, ZeroSpanTrace]:
    """Emulate a zero-span squeezing run and its three shot-noise references.

    The squeezing run scans the relative pump phase over ``ramp``; the
    shot-noise traces block the squeezer (``r1 = 0``) and hold pump 2 at its
    original level and at the two interference extrema.  Every trace gets
    independent multiplicative Gaussian noise of fractional RMS ``rin``.
    """
    ramp = np.asarray(ramp, dtype=float)
    if ramp.size == 0 or np.ptp(ramp) < 2 * math.pi - 1e-12:
        raise ValueError("ramp must span at least 2*pi to cover both interference extrema")
    if rin < 0:
        raise ValueError(f"rin must be >= 0, got {rin}")

    amp = interference_amplitude(ramp, p.pump_leak, pump_ratio)
    leak = math.sqrt(p.pump_leak) * pump_ratio
    flat = np.zeros_like(ramp)
    clean = {
        "squeezing_run": output_photons_array(p, ramp, p.r2 * amp),
        "shotnoise_original": output_photons_array(p, flat, p.r2, r1=0.0),
        "shotnoise_max": output_photons_array(p, flat, p.r2 * (1.0 + leak), r1=0.0),
        "shotnoise_min": output_photons_array(p, flat, p.r2 * abs(1.0 - leak), r1=0.0),
    }

    streams = np.random.SeedSequence(seed).spawn(len(LABELS))
    traces = {}
    for label, stream in zip(LABELS, streams):
        power = np.broadcast_to(clean[label], ramp.shape).astype(float)
        if rin > 0:
            noise = np.random.default_rng(stream).standard_normal(ramp.size)
            power = np.clip(power * (1.0 + rin * noise), 0.0, None)
        traces[label] = ZeroSpanTrace(ramp, power, label, seed)
    return traces


def extract_squeezing(traces, window: int = 1) -> SqueezingResult:
    """Squeezing from trace extrema against the matching shot-noise level.

    The run minimum is referred to the shot-noise minimum and the run maximum
    to the shot-noise maximum.  Photon numbers in the result are rescaled to
    the original shot-noise level when that trace is present.
    """
    if isinstance(traces, dict):
        by_label = dict(traces)
    else:
        by_label = {t.label: t for t in traces}
    for label in ("squeezing_run", "shotnoise_max", "shotnoise_min"):
        if label not in by_label:
            raise ValueError(f"missing trace {label!r}")
    if window < 1:
        raise ValueError("smoothing window must be >= 1")

    run = by_label["squeezing_run"].power
    if window > 1:
        run = uniform_filter1d(run, size=window, mode="nearest")
    ref_min = float(np.mean(by_label["shotnoise_min"].power))
    ref_max = float(np.mean(by_label["shotnoise_max"].power))
    low, high = float(run.min()), float(run.max())
    if low <= 0 or ref_min <= 0 or ref_max <= 0:
        raise ValueError("trace powers must be positive for a dB ratio")

    if "shotnoise_original" in by_label:
        n_vac = float(np.mean(by_label["shotnoise_original"].power))
    else:
        n_vac = math.sqrt(ref_min * ref_max)
    return SqueezingResult.from_photons(low * n_vac / ref_min, high * n_vac / ref_max, n_vac)


def _loss_model_db(r, eta):
    plus = _LOG_FACTOR * np.log((1.0 - eta) + eta * np.exp(2.0 * r))
    minus = _LOG_FACTOR * np.log((1.0 - eta) + eta * np.exp(-2.0 * r))
    return plus, minus


def _fit_r(eta, s_plus, s_minus, r_max=20.0, iterations=60):
    """Per-point least-squares r for a fixed eta (vectorized Gauss-Newton)."""
    if eta <= 0:
        return np.zeros_like(s_plus)
    # start from the anti-squeezing inversion; it is well conditioned for any eta > 0
    r = 0.5 * np.log(np.maximum(10.0 ** (s_plus / 10.0) - 1.0 + eta, 1e-300) / eta)
    r = np.clip(r, 0.0, r_max)
    for _ in range(iterations):
        ep, em = np.exp(2.0 * r), np.exp(-2.0 * r)
        dp = (1.0 - eta) + eta * ep
        dm = (1.0 - eta) + eta * em
        res_p = _LOG_FACTOR * np.log(dp) - s_plus
        res_m = _LOG_FACTOR * np.log(dm) - s_minus
        jac_p = _LOG_FACTOR * 2.0 * eta * ep / dp
        jac_m = -_LOG_FACTOR * 2.0 * eta * em / dm
        step = (jac_p * res_p + jac_m * res_m) / (jac_p**2 + jac_m**2)
        r_new = np.clip(r - step, 0.0, r_max)
        if np.max(np.abs(r_new - r)) < 1e-14:
            r = r_new
            break
        r = r_new
    return r


def _loss_objective(eta, s_plus, s_minus):
    r = _fit_r(eta, s_plus, s_minus)
    plus, minus = _loss_model_db(r, eta)
    return float(np.sum((plus - s_plus) ** 2 + (minus - s_minus) ** 2)), r


def fit_loss_model(data: Iterable[Tuple[float, float]]) -> LossFitResult:
    """Shared-efficiency fit of ``S+- = 10 log10((1 - eta) + eta e^{+-2 r_i})``.

    ``data`` holds ``(s_plus_db, s_minus_db)`` pairs.  The per-point ``r_i``
    are solved for each trial ``eta``; ``eta`` itself comes from a grid scan
    refined by bounded Brent search, with both endpoints checked explicitly.
    """
    arr = np.asarray(list(data), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
        raise ValueError("data must be a sequence of (s_plus_db, s_minus_db) pairs")
    s_plus, s_minus = arr[:, 0], arr[:, 1]
    if np.all(np.abs(arr) < 1e-12):
        return LossFitResult(None, tuple(0.0 for _ in s_plus), 0.0, None, underdetermined=True)

    grid = np.linspace(0.0, 1.0, 201)
    costs = [_loss_objective(e, s_plus, s_minus)[0] for e in grid]
    k = int(np.argmin(costs))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    best = optimize.minimize_scalar(
        lambda e: _loss_objective(e, s_plus, s_minus)[0],
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    candidates = [(best.fun, float(best.x)), (costs[0], 0.0), (costs[-1], 1.0)]
    _, eta = min(candidates)
    cost, r = _loss_objective(eta, s_plus, s_minus)
    residual = math.sqrt(cost / (2 * s_plus.size))
    return LossFitResult(eta, tuple(float(x) for x in r), residual, float(r_to_db(r.max())))


def squeezer_gain_parameter(energy_pj, g: float):
    """Squeezer gain parameter for pump pulse energy (pJ): ``r = g sqrt(E)``."""
    return g * np.sqrt(energy_pj)


def gain_curve_model(energy_pj, g: float, eta_overall: float):
    """Detected OPG photon number ``eta sinh^2(g sqrt(E))``."""
    return eta_overall * np.sinh(squeezer_gain_parameter(energy_pj, g)) ** 2


def fit_gain_curve(data: Iterable[Tuple[float, float]]) -> GainFitResult:
    """Fit ``(g, eta_overall)`` to ``(energy_pJ, detected_photons)`` pairs.

    Residuals are relative, ``(model - N) / N``, because the photon numbers
    span several decades.  The residual reported is their RMS.
    """
    arr = np.asarray(list(data), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise ValueError("need at least two (energy_pJ, detected_photons) pairs")
    energy, photons = arr[:, 0], arr[:, 1]
    if np.any(energy <= 0):
        raise ValueError("pump energies must be positive")
    if np.any(photons <= 0):
        raise ValueError("detected photon numbers must be positive")

    def eta_for(g):
        m = np.sinh(g * np.sqrt(energy)) ** 2 / photons
        return float(np.clip(np.sum(m) / np.sum(m * m), 0.0, 1.0))

    def residuals(x):
        return gain_curve_model(energy, x[0], x[1]) / photons - 1.0

    # seed from a 1-D scan with eta profiled out
    g_grid = np.linspace(0.02, 10.0 / math.sqrt(energy.max()), 400)
    g0 = min(g_grid, key=lambda g: float(np.sum(residuals((g, eta_for(g))) ** 2)))
    fit = optimize.least_squares(
        residuals,
        x0=(g0, max(eta_for(g0), 1e-12)),
        bounds=([0.0, 0.0], [np.inf, 1.0]),
        x_scale="jac",
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
    )
    g_hat, eta_hat = fit.x
    rel = float(np.sqrt(np.mean(residuals(fit.x) ** 2)))
    return GainFitResult(float(g_hat), float(eta_hat), rel)


def gain_from_antisqueezing(s_plus_db: float, eta: float) -> float:
    """Squeezer gain (dB) implied by measured anti-squeezing at efficiency ``eta``."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    if s_plus_db < 0:
        raise ValueError(f"anti-squeezing {s_plus_db} dB lies below the 0 dB floor")
    r = 0.5 * math.log((10.0 ** (s_plus_db / 10.0) - 1.0 + eta) / eta)
    return r_to_db(r)


def gain_from_photon_number(detected_photons: float, eta_overall: float, exact: bool = True) -> float:
    """Squeezer gain (dB) from a vacuum-seeded OPG photon number.

    ``exact`` inverts ``N = eta sinh^2 r``; otherwise the high-gain rule
    ``N ~ G / 4`` is used.
    """
    if detected_photons <= 0 or not 0 < eta_overall <= 1:
        raise ValueError("need a positive photon number and eta_overall in (0, 1]")
    n = detected_photons / eta_overall
    if exact:
        return r_to_db(math.asinh(math.sqrt(n)))
    return 10.0 * math.log10(4.0 * n)
