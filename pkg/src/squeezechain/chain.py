"""Two-amplifier all-optical squeezing measurement chain.

A squeezer OPA (gain parameter ``r1``) prepares phase-squeezed vacuum, an
adiabatic coupler passes a fraction ``eta_coupler`` of it to the measurement
OPA (gain parameter ``r2``), whose output is read out as a mean photon number
after an off-chip efficiency ``eta_det`` and an additive detector floor.

The relative pump phase ``phi_pump2`` rotates the quadrature frame by
``phi_pump2 / 2`` ahead of the measurement OPA, so ``phi_pump2 = 0`` amplifies
the anti-squeezed quadrature and ``phi_pump2 = pi`` the squeezed one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from . import gaussian as gs
from .units import DB_PER_NEPER, loss_db_to_eta, r_to_db


class GainInsufficientWarning(UserWarning):
    """Measurement gain below squeezer gain; readout no longer resolves the state."""


class UnboundedToleranceWarning(UserWarning):
    """Detection-loss tolerance has no finite upper bound for these parameters."""


@dataclass(frozen=True)
class ChainParams:
    r1: float
    r2: float
    phi_pump2: float = 0.0
    eta_coupler: float = 1.0
    eta_det: float = 1.0
    pump_leak: float = 0.0  # only used by trace synthesis
    sigma_phase: float = 0.0
    noise_floor: float = 0.0

    def __post_init__(self):
        for name in ("r1", "r2", "phi_pump2", "eta_coupler", "eta_det", "pump_leak", "sigma_phase", "noise_floor"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        for name in ("r1", "r2", "sigma_phase", "noise_floor"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("eta_coupler", "eta_det", "pump_leak"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {getattr(self, name)}")


@dataclass(frozen=True)
class SqueezingResult:
    """Measured squeezing and the detector photon numbers it derives from."""

    s_minus_db: float
    s_plus_db: float
    n_minus: float
    n_plus: float
    n_vac: float

    @classmethod
    def from_photons(cls, n_minus: float, n_plus: float, n_vac: float) -> "SqueezingResult":
        if not n_vac > 0:
            raise ValueError(f"amplified vacuum level must be positive, got {n_vac}")
        return cls(_db(n_minus / n_vac), _db(n_plus / n_vac), n_minus, n_plus, n_vac)


def _db(ratio: float) -> float:
    if ratio < 0:
        raise ValueError(f"power ratio must be >= 0, got {ratio}")
    return -math.inf if ratio == 0 else 10.0 * math.log10(ratio)


def ideal_squeezing(r1: float, r2: float) -> tuple[float, float]:
    """Squeezing and anti-squeezing (dB) read out through a lossless chain.

    ``S_-/+ = 10 log10(sinh^2(r2 -/+ r1) / sinh^2(r2))``.  A measurement gain
    below the squeezer gain is allowed but raises a
    :class:`GainInsufficientWarning`.
    """
    if r2 == 0:
        raise ZeroDivisionError("r2 = 0: amplified vacuum sinh^2(r2) vanishes")
    if r2 < 0 or r1 < 0:
        raise ValueError(f"gain parameters must be >= 0, got r1={r1}, r2={r2}")
    if r1 > r2:
        warnings.warn(f"r1={r1} exceeds r2={r2}; measurement gain is insufficient", GainInsufficientWarning, stacklevel=2)
    vac = math.sinh(r2) ** 2
    return _db(math.sinh(r2 - r1) ** 2 / vac), _db(math.sinh(r2 + r1) ** 2 / vac)


def lossy_squeezing_limit(r: float, eta: float) -> tuple[float, float]:
    """Infinite-gain squeezing/anti-squeezing (dB) after transmission ``eta``."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    return (
        10.0 * math.log10((1.0 - eta) + eta * math.exp(-2.0 * r)),
        10.0 * math.log10((1.0 - eta) + eta * math.exp(2.0 * r)),
    )


def dephased_variance(v_sq: float, v_anti: float, sigma_phase: float) -> float:
    """Measured variance when the quadrature angle jitters with RMS ``sigma_phase``.

    Exact Gaussian average of ``v_sq cos^2(t) + v_anti sin^2(t)`` over
    ``t ~ N(0, sigma_phase^2)``.
    """
    if v_sq <= 0 or v_anti <= 0:
        raise ValueError("variances must be positive")
    if sigma_phase < 0:
        raise ValueError(f"sigma_phase must be >= 0, got {sigma_phase}")
    return v_sq + (v_anti - v_sq) * (1.0 - math.exp(-2.0 * sigma_phase**2)) / 2.0


def output_photons(p: ChainParams, phi_pump2: float | None = None, *, r1: float | None = None, r2: float | None = None) -> float:
    """Detected mean photon number for one pump-phase setting.

    ``phi_pump2``, ``r1`` and ``r2`` default to the values in ``p``; the
    keyword overrides let callers block the squeezer (``r1=0``) or modulate the
    measurement gain without rebuilding the parameter set.
    """
    phi = p.phi_pump2 if phi_pump2 is None else phi_pump2
    r1 = p.r1 if r1 is None else r1
    r2 = p.r2 if r2 is None else r2

    state = gs.vacuum(1)
    state = gs.squeeze(state, 0, r1)
    state = gs.loss_channel(state, 0, p.eta_coupler)
    state = gs.rotate(state, 0, phi / 2.0)
    state = gs.dephase(state, 0, p.sigma_phase)
    state = gs.squeeze(state, 0, r2)
    state = gs.loss_channel(state, 0, p.eta_det)
    return gs.mean_photon(state, 0) + p.noise_floor


def output_photons_array(p: ChainParams, phi_pump2, r2, *, r1: float | None = None) -> np.ndarray:
    """Vectorized :func:`output_photons` over arrays of pump phase and measurement gain.

    The state entering the measurement OPA is built with the Gaussian engine;
    rotation, dephasing, amplification and detection loss are then applied to
    its covariance in closed form for every (phi, r2) pair at once.
    """
    state = gs.vacuum(1)
    state = gs.squeeze(state, 0, p.r1 if r1 is None else r1)
    state = gs.loss_channel(state, 0, p.eta_coupler)
    (v_qq, v_qp), (_, v_pp) = state.cov

    phi, r2 = np.broadcast_arrays(np.asarray(phi_pump2, dtype=float), np.asarray(r2, dtype=float))
    theta = phi / 2.0
    c, s = np.cos(theta), np.sin(theta)
    w_qq = c * c * v_qq - 2 * c * s * v_qp + s * s * v_pp
    w_pp = s * s * v_qq + 2 * c * s * v_qp + c * c * v_pp
    if p.sigma_phase > 0:
        iso = 0.5 * (w_qq + w_pp)
        shrink = math.exp(-2.0 * p.sigma_phase**2)
        w_qq, w_pp = iso + shrink * (w_qq - iso), iso + shrink * (w_pp - iso)
    amplified = np.exp(2 * r2) * w_qq + np.exp(-2 * r2) * w_pp
    return p.eta_det * (amplified - 2.0) / 4.0 + p.noise_floor


def simulate_chain(p: ChainParams) -> SqueezingResult:
    """Full Gaussian simulation of the chain at both pump-phase extremes."""
    n_plus = output_photons(p, 0.0)
    n_minus = output_photons(p, math.pi)
    n_vac = output_photons(p, 0.0, r1=0.0)
    return SqueezingResult.from_photons(n_minus, n_plus, n_vac)


def required_measurement_gain(r1: float, tolerance_db: float) -> float:
    """Smallest measurement gain (dB) resolving the squeezing to ``tolerance_db``.

    On the branch ``r2 > r1`` the finite-gain squeezing
    ``20 log10(sinh(r2 - r1) / sinh(r2))`` increases strictly towards its
    infinite-gain value ``-8.6859 r1`` (its r2-derivative is
    ``coth(r2 - r1) - coth(r2) > 0``), so the deviation is monotone and the
    threshold crossing is unique.  The ``r2 < r1`` branch is excluded.
    """
    if r1 <= 0 or tolerance_db <= 0:
        raise ValueError("r1 and tolerance_db must be positive")
    limit = -DB_PER_NEPER * r1

    def excess(r2):
        s_minus = 20.0 * math.log10(math.sinh(r2 - r1) / math.sinh(r2))
        return (limit - s_minus) - tolerance_db

    lo = r1 * (1.0 + 1e-9)
    hi = r1 + 1.0
    while excess(hi) > 0:
        hi = r1 + 2.0 * (hi - r1)
    r2 = optimize.bisect(excess, lo, hi, xtol=1e-14, maxiter=400)
    return r_to_db(r2)


def detection_loss_tolerance(p: ChainParams, degradation_db: float, max_loss_db: float = 200.0) -> float:
    """Largest off-chip loss (dB) that shifts measured squeezing by <= ``degradation_db``.

    The reference is ``eta_det = 1``.  Without a detector floor the readout
    ratio is exactly loss-invariant; then, and whenever the shift never
    exceeds the threshold, ``inf`` is returned with an
    :class:`UnboundedToleranceWarning`.
    """
    if degradation_db <= 0:
        raise ValueError("degradation_db must be positive")
    if p.noise_floor == 0:
        warnings.warn(
            "noise_floor = 0: n_minus and n_vac scale identically with eta_det, tolerance is unbounded",
            UnboundedToleranceWarning,
            stacklevel=2,
        )
        return math.inf

    def s_minus_at(loss_db):
        return simulate_chain(replace(p, eta_det=loss_db_to_eta(loss_db))).s_minus_db

    reference = s_minus_at(0.0)

    def excess(loss_db):
        return abs(s_minus_at(loss_db) - reference) - degradation_db

    # coarse scan first, then refine inside the first bracketing interval
    step = 0.5
    lo = 0.0
    while lo < max_loss_db:
        hi = min(lo + step, max_loss_db)
        if excess(hi) > 0:
            return optimize.brentq(excess, lo, hi, xtol=1e-10)
        lo = hi
    warnings.warn(
        f"squeezing shift stays below {degradation_db} dB up to {max_loss_db} dB loss",
        UnboundedToleranceWarning,
        stacklevel=2,
    )
    return math.inf
