"""Frequency-resolved squeezing: phase-matched gain spectra, coupler spectra,
measured-squeezing spectra, bandwidths and transform-limited durations.

Each detuning bin ``Omega`` is treated as an independent degenerate squeezer
(signal/idler pair at ``+-Omega``); joint spectral structure is not modeled.
Gain parameters follow the low-gain phase-matching shape
``r(Omega) = r_peak |sinc(dk(Omega) L / 2)|``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy import interpolate, optimize

from .chain import ChainParams, SqueezingResult, simulate_chain
from .units import SPEED_OF_LIGHT

#: |x| at which sinc^2(x) = 1/2
SINC2_HALF_POWER_X = float(optimize.brentq(lambda x: (math.sin(x) / x) ** 2 - 0.5, 1.0, 2.0, xtol=1e-15))

HALF_POWER_DB = 10.0 * math.log10(2.0)


@dataclass(frozen=True)
class SpectralGrid:
    """Angular-frequency detunings around the degenerate wavelength."""

    center_wavelength: float
    offsets: np.ndarray

    def __post_init__(self):
        offsets = np.array(self.offsets, dtype=float).reshape(-1)
        if self.center_wavelength <= 0:
            raise ValueError("center_wavelength must be positive")
        if offsets.size < 1:
            raise ValueError("grid needs at least one bin")
        if np.any(np.diff(offsets) <= 0):
            raise ValueError("offsets must be strictly increasing")
        scale = max(float(np.max(np.abs(offsets))), 1.0)
        if np.max(np.abs(offsets + offsets[::-1])) > 1e-9 * scale:
            raise ValueError("offsets must be symmetric about zero")
        offsets.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def symmetric(cls, center_wavelength: float, span_hz: float, n_bins: int) -> "SpectralGrid":
        """Uniform grid of ``n_bins`` covering ``+-span_hz/2`` in ordinary frequency."""
        if n_bins < 1 or span_hz <= 0:
            raise ValueError("need n_bins >= 1 and a positive span")
        return cls(center_wavelength, 2 * np.pi * np.linspace(-span_hz / 2, span_hz / 2, n_bins))

    @property
    def n_bins(self) -> int:
        return self.offsets.size

    @property
    def center_frequency(self) -> float:
        return SPEED_OF_LIGHT / self.center_wavelength

    @property
    def frequencies(self) -> np.ndarray:
        return self.center_frequency + self.offsets / (2 * np.pi)

    @property
    def wavelengths(self) -> np.ndarray:
        return SPEED_OF_LIGHT / self.frequencies


@dataclass(frozen=True)
class DispersionSpec:
    """Residual mismatch and dispersion of one poled section (SI units)."""

    length: float
    delta_k0: float = 0.0
    beta2: float = 0.0
    beta4: float = 0.0

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")


@dataclass(frozen=True)
class CouplerTable:
    """Coupler transmission versus wavelength, monotone-cubic interpolated.

    Outside the tabulated range the end values are held constant.
    """

    wavelength_nm: tuple
    eta: tuple

    def __post_init__(self):
        wl = tuple(float(w) for w in self.wavelength_nm)
        eta = tuple(float(e) for e in self.eta)
        if len(wl) != len(eta) or not wl:
            raise ValueError("coupler table needs matching, nonempty wavelength and eta columns")
        if any(b <= a for a, b in zip(wl, wl[1:])):
            raise ValueError("coupler wavelengths must be strictly increasing")
        if any(not 0.0 <= e <= 1.0 for e in eta):
            raise ValueError("coupler efficiencies must lie in [0, 1]")
        object.__setattr__(self, "wavelength_nm", wl)
        object.__setattr__(self, "eta", eta)

    @classmethod
    def flat(cls, eta: float) -> "CouplerTable":
        return cls((2090.0,), (eta,))

    def __call__(self, wavelength_nm):
        wl = np.clip(np.asarray(wavelength_nm, dtype=float), self.wavelength_nm[0], self.wavelength_nm[-1])
        if len(self.eta) == 1:
            return np.full_like(wl, self.eta[0])
        if len(self.eta) == 2:
            return np.interp(wl, self.wavelength_nm, self.eta)
        return interpolate.PchipInterpolator(self.wavelength_nm, self.eta)(wl)


@dataclass(frozen=True)
class SpectralModelParams:
    r1_peak: float
    r2_peak: float
    squeezer: DispersionSpec
    measurement: DispersionSpec
    coupler: CouplerTable = field(default_factory=lambda: CouplerTable.flat(1.0))
    noise_floor: float = 0.0
    sigma_phase: float = 0.0
    eta_det: float = 1.0


@dataclass(frozen=True)
class Spectrum:
    """Per-bin chain results over a spectral grid."""

    grid: SpectralGrid
    r1: np.ndarray
    r2: np.ndarray
    eta_coupler: np.ndarray
    results: tuple

    @property
    def frequencies(self) -> np.ndarray:
        return self.grid.frequencies

    @property
    def wavelengths(self) -> np.ndarray:
        return self.grid.wavelengths

    @property
    def s_minus_db(self) -> np.ndarray:
        return np.array([res.s_minus_db for res in self.results])

    @property
    def s_plus_db(self) -> np.ndarray:
        return np.array([res.s_plus_db for res in self.results])

    @property
    def n_vac(self) -> np.ndarray:
        return np.array([res.n_vac for res in self.results])


@dataclass(frozen=True)
class Bandwidth:
    width_hz: float
    lower_hz: float
    upper_hz: float
    saturated: bool


@dataclass(frozen=True)
class PulseDuration:
    cycles: float
    duration_s: float
    method: str
    definition: str
    flagged: bool = False


def _offsets(grid_or_offsets: Union[SpectralGrid, Sequence[float], np.ndarray]) -> np.ndarray:
    if isinstance(grid_or_offsets, SpectralGrid):
        return grid_or_offsets.offsets
    return np.asarray(grid_or_offsets, dtype=float)


def phase_mismatch(d: DispersionSpec, omega_offset):
    """Residual wavevector mismatch (1/m) at angular detuning ``omega_offset``.

    For a degenerate signal/idler pair the odd dispersion orders cancel:
    ``dk = dk0 + beta2 W^2 + beta4 W^4 / 12``.
    """
    w = np.asarray(omega_offset, dtype=float)
    dk = d.delta_k0 + d.beta2 * w**2 + d.beta4 * w**4 / 12.0
    return float(dk) if dk.ndim == 0 else dk


def gain_profile(d: DispersionSpec, r_peak: float, grid) -> np.ndarray:
    """Per-bin gain parameter ``r_peak |sinc(dk L / 2)|``."""
    if r_peak < 0:
        raise ValueError(f"r_peak must be >= 0, got {r_peak}")
    x = phase_mismatch(d, _offsets(grid)) * d.length / 2.0
    # np.sinc is the normalized sin(pi x) / (pi x)
    return r_peak * np.abs(np.sinc(np.asarray(x) / np.pi))


def _chain_at(p: SpectralModelParams, r1: float, r2: float, eta_coupler: float) -> SqueezingResult:
    return simulate_chain(
        ChainParams(
            r1=float(r1),
            r2=float(r2),
            eta_coupler=float(eta_coupler),
            eta_det=p.eta_det,
            sigma_phase=p.sigma_phase,
            noise_floor=p.noise_floor,
        )
    )


def squeezing_spectrum(p: SpectralModelParams, grid: SpectralGrid) -> Spectrum:
    r1 = gain_profile(p.squeezer, p.r1_peak, grid)
    r2 = gain_profile(p.measurement, p.r2_peak, grid)
    eta = p.coupler(grid.wavelengths * 1e9)
    results = tuple(_chain_at(p, a, b, e) for a, b, e in zip(r1, r2, eta))
    return Spectrum(grid, r1, r2, eta, results)


def squeezing_at_wavelength(p: SpectralModelParams, center_wavelength: float, wavelength: float) -> SqueezingResult:
    """Single-bin evaluation at an arbitrary wavelength (meters)."""
    omega = 2 * np.pi * (SPEED_OF_LIGHT / wavelength - SPEED_OF_LIGHT / center_wavelength)
    r1 = gain_profile(p.squeezer, p.r1_peak, [omega])[0]
    r2 = gain_profile(p.measurement, p.r2_peak, [omega])[0]
    return _chain_at(p, r1, r2, p.coupler(wavelength * 1e9))


def bandwidth(frequency_hz, values, threshold_db: float = 3.0, *, in_db: bool = True) -> Bandwidth:
    """Full width of the contiguous band around the peak magnitude.

    The band is where the magnitude stays within ``threshold_db`` of its
    peak.  ``values`` are dB quantities by default (a squeezing spectrum is
    judged by ``|s_minus|``); pass ``in_db=False`` for linear power spectra,
    which are converted with ``10 log10``.  Edges are linearly interpolated;
    a band that runs into the grid edge is clipped there and flagged
    ``saturated``.
    """
    f = np.asarray(frequency_hz, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    if f.size == 0 or f.size != v.size:
        raise ValueError("need a nonempty spectrum matching its frequency axis")
    if threshold_db <= 0:
        raise ValueError("threshold_db must be positive")
    order = np.argsort(f)
    f, v = f[order], v[order]
    if not in_db:
        with np.errstate(divide="ignore"):
            v = 10.0 * np.log10(v)
    peak = int(np.nanargmax(v))
    level = v[peak] - threshold_db

    def edge(step):
        i = peak
        while 0 <= i + step < f.size:
            j = i + step
            if not v[j] >= level:
                # v[i] >= level > v[j]
                if not np.isfinite(v[j]):
                    return f[j], False
                frac = (v[i] - level) / (v[i] - v[j])
                return f[i] + frac * (f[j] - f[i]), False
            i = j
        return f[i], True

    lower, sat_lo = edge(-1)
    upper, sat_hi = edge(+1)
    return Bandwidth(upper - lower, lower, upper, sat_lo or sat_hi)


def linearized_squeezing(s_minus_db) -> np.ndarray:
    """Fraction of shot noise removed, ``1 - 10^(s/10)``, clipped at zero."""
    return np.clip(1.0 - 10.0 ** (np.asarray(s_minus_db, dtype=float) / 10.0), 0.0, None)


_TL_DEFINITION = (
    "intensity FWHM of the transform-limited pulse whose spectral amplitude is "
    "sqrt(spectrum), divided by the carrier period"
)


def temporal_cycles(frequency_hz, spectrum, center_wavelength: float, method: str = "gaussian_fit") -> PulseDuration:
    """Transform-limited duration of a spectrum, in optical cycles.

    ``spectrum`` is a linear, power-like spectral density (for a squeezing
    spectrum use :func:`linearized_squeezing`).  ``method`` selects a
    Gaussian fit (duration = ``2 ln2 / pi / FWHM_f``) or a zero-padded FFT of
    ``sqrt(spectrum)`` with the intensity FWHM read off numerically.
    """
    f = np.asarray(frequency_hz, dtype=float)
    s = np.clip(np.asarray(spectrum, dtype=float), 0.0, None)
    if s.size == 0 or not np.any(s > 0):
        raise ValueError("spectrum is empty or identically zero; duration undefined")
    period = center_wavelength / SPEED_OF_LIGHT
    if method == "gaussian_fit":
        duration, flagged = _gaussian_fit_duration(f, s)
    elif method == "transform_limit_numeric":
        duration, flagged = _numeric_duration(f, s)
    else:
        raise ValueError(f"unknown method {method!r}")
    return PulseDuration(duration / period, duration, method, _TL_DEFINITION, flagged)


def _gaussian_fit_duration(f, s):
    if np.count_nonzero(s > 0) < 3:
        window = 1.0 / np.min(np.diff(f)) if f.size > 1 else math.inf
        return window, True
    w = s / s.sum()
    mu = float(np.sum(w * f))
    sigma = float(np.sqrt(np.sum(w * (f - mu) ** 2)))

    def model(x, a, m, sd):
        return a * np.exp(-0.5 * ((x - m) / sd) ** 2)

    try:
        with warnings.catch_warnings():
            # an exact fit leaves the covariance undefined; only the parameters matter
            warnings.simplefilter("ignore", optimize.OptimizeWarning)
            (_, _, sd), _ = optimize.curve_fit(model, f, s, p0=(s.max(), mu, sigma), maxfev=20000)
    except RuntimeError:
        return 1.0 / np.min(np.diff(f)), True
    fwhm_f = 2.0 * math.sqrt(2.0 * math.log(2.0)) * abs(sd)
    return (2.0 * math.log(2.0) / math.pi) / fwhm_f, False


def _numeric_duration(f, s, oversample: int = 64):
    if f.size < 2:
        return math.inf, True
    df = float(np.min(np.diff(f)))
    if not np.allclose(np.diff(f), df, rtol=1e-6, atol=0):
        uniform = np.arange(f[0], f[-1] + 0.5 * df, df)
        s = np.interp(uniform, f, s)
        f = uniform
    n_fft = 1 << int(math.ceil(math.log2(oversample * f.size)))
    amp = np.zeros(n_fft)
    amp[: f.size] = np.sqrt(s)
    field_t = np.fft.fftshift(np.fft.ifft(amp))
    intensity = np.abs(field_t) ** 2
    dt = 1.0 / (n_fft * df)
    window = n_fft * dt
    peak = int(np.argmax(intensity))
    half = 0.5 * intensity[peak]

    def crossing(step):
        for k in range(n_fft // 2):
            i = (peak + step * k) % n_fft
            j = (peak + step * (k + 1)) % n_fft
            if intensity[j] < half:
                frac = (intensity[i] - half) / (intensity[i] - intensity[j])
                return (k + frac) * dt
        return None

    left, right = crossing(-1), crossing(+1)
    if left is None or right is None or left + right >= 0.5 * window:
        return window, True
    return left + right, False


# Calibration of free dispersion and coupler parameters against target numbers.


def beta2_for_half_power_width(length: float, width_hz: float) -> float:
    """GVD giving a sinc^2 gain spectrum of full half-power width ``width_hz``."""
    omega_half = 2 * np.pi * width_hz / 2.0
    return 2.0 * SINC2_HALF_POWER_X / (length * omega_half**2)


def calibrate_measurement_beta2(
    p: SpectralModelParams, grid: SpectralGrid, target_width_hz: float, threshold_db: float = 3.0
) -> float:
    """Measurement-section GVD that makes the measured squeezing bandwidth hit a target."""
    from dataclasses import replace

    def width(beta2):
        meas = replace(p.measurement, beta2=beta2)
        spec = squeezing_spectrum(replace(p, measurement=meas), grid)
        return bandwidth(grid.frequencies, spec.s_minus_db, threshold_db).width_hz - target_width_hz

    lo, hi = 1e-30, 1e-27
    if width(lo) < 0:
        raise ValueError("target bandwidth unreachable even with a dispersionless measurement section")
    while width(hi) > 0:
        hi *= 4.0
    return optimize.brentq(width, lo, hi, xtol=1e-34, rtol=1e-10)


def calibrate_coupler_table(
    p: SpectralModelParams, center_wavelength: float, wavelengths_nm: Sequence[float], targets_db: Sequence[float]
) -> CouplerTable:
    """Coupler efficiencies reproducing target measured squeezing at given wavelengths."""
    from dataclasses import replace

    etas = []
    for wl, target in zip(wavelengths_nm, targets_db):

        def miss(eta):
            q = replace(p, coupler=CouplerTable.flat(eta))
            return squeezing_at_wavelength(q, center_wavelength, wl * 1e-9).s_minus_db - target

        etas.append(optimize.brentq(miss, 0.0, 1.0, xtol=1e-13))
    return CouplerTable(tuple(wavelengths_nm), tuple(etas))
