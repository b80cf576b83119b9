"""Gaussian states of n optical modes, described by first and second moments.

Conventions used throughout the package:

* quadratures are ordered ``(q1, p1, q2, p2, ..., qn, pn)``;
* the vacuum has unit variance in every quadrature (shot noise = 1), so that
  a single mode with covariance ``V`` and mean ``m`` holds
  ``<N> = (tr V + |m|^2 - 2) / 4`` photons on average;
* ``squeeze(r, phi=0)`` amplifies q by ``e^r`` and de-amplifies p by ``e^-r``;
* ``rotate(theta)`` turns the phase-space distribution counter-clockwise, so
  the variance along angle ``a`` afterwards equals the old variance along
  ``a - theta``;
* the beamsplitter is a real orthogonal mixer,
  ``a' = t a + s b``, ``b' = -s a + t b`` with ``t = sqrt(T)``,
  ``s = sqrt(1 - T)``; at ``T = 0`` the two modes swap with a sign flip on the
  second one.

All operations are pure: they return a new state and never touch their input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

SYMMETRY_RTOL = 1e-12
SYMPLECTIC_ATOL = 1e-10


@lru_cache(maxsize=None)
def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form for the interleaved (q, p) ordering."""
    return _frozen(np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]])))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance matrix of an n-mode Gaussian state."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.cov, dtype=float)
        if mean.size == 0 or mean.size % 2:
            raise ValueError(f"mean must have even, nonzero length, got {mean.size}")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValueError("state moments must be finite")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_RTOL * scale:
            raise ValueError("cov is not symmetric")
        object.__setattr__(self, "mean", _frozen(mean))
        object.__setattr__(self, "cov", _frozen(0.5 * (cov + cov.T)))

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def mode_moments(self, mode: int):
        """Return ``(mean, cov)`` of a single mode as a 2-vector and 2x2 block."""
        _check_mode(self, mode)
        sl = slice(2 * mode, 2 * mode + 2)
        return self.mean[sl].copy(), self.cov[sl, sl].copy()

    def uncertainty_min_eigenvalue(self) -> float:
        """Smallest eigenvalue of ``cov + i*Omega``; physical states give >= 0."""
        omega = symplectic_form(self.n_modes)
        return float(np.linalg.eigvalsh(self.cov + 1j * omega).min())

    def is_physical(self, atol: float = 1e-9) -> bool:
        return self.uncertainty_min_eigenvalue() >= -atol


def _state(mean: np.ndarray, cov: np.ndarray) -> GaussianState:
    """Build a state from moments produced by trusted ops, skipping validation."""
    state = object.__new__(GaussianState)
    object.__setattr__(state, "mean", _frozen(mean))
    object.__setattr__(state, "cov", _frozen(0.5 * (cov + cov.T)))
    return state


@dataclass(frozen=True)
class SymplecticTransform:
    """Affine phase-space map ``x -> S x + d`` with symplectic ``S``.

    The symplectic condition is checked to ``1e-10`` relative to
    ``max(1, |S|_F^2)`` so that strongly squeezing maps, whose entries reach
    ``e^r``, are not rejected for floating-point roundoff.
    """

    matrix: np.ndarray
    displacement: Optional[np.ndarray] = None

    def __post_init__(self):
        s = np.asarray(self.matrix, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2:
            raise ValueError(f"symplectic matrix must be square of even size, got {s.shape}")
        d = np.zeros(s.shape[0]) if self.displacement is None else np.asarray(self.displacement, dtype=float)
        if d.shape != (s.shape[0],):
            raise ValueError("displacement length does not match matrix size")
        scale = max(1.0, float(np.linalg.norm(s)) ** 2)
        if symplectic_defect(s) > SYMPLECTIC_ATOL * scale:
            raise ValueError("matrix is not symplectic")
        object.__setattr__(self, "matrix", _frozen(s))
        object.__setattr__(self, "displacement", _frozen(d))

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def then(self, other: "SymplecticTransform") -> "SymplecticTransform":
        """Composite map: apply ``self`` first, then ``other``."""
        if other.n_modes != self.n_modes:
            raise ValueError("cannot compose transforms on different mode counts")
        return SymplecticTransform(
            other.matrix @ self.matrix,
            other.matrix @ self.displacement + other.displacement,
        )

    def inverse(self) -> "SymplecticTransform":
        omega = symplectic_form(self.n_modes)
        s_inv = -omega @ self.matrix.T @ omega
        return SymplecticTransform(s_inv, -s_inv @ self.displacement)


def symplectic_defect(matrix: np.ndarray) -> float:
    """Frobenius norm of ``S Omega S^T - Omega``."""
    omega = symplectic_form(matrix.shape[0] // 2)
    return float(np.linalg.norm(matrix @ omega @ matrix.T - omega))


def identity_transform(n_modes: int) -> SymplecticTransform:
    return SymplecticTransform(np.eye(2 * n_modes))


def _check_mode(state_or_n, mode) -> None:
    n = state_or_n if isinstance(state_or_n, int) else state_or_n.n_modes
    if not isinstance(mode, (int, np.integer)) or isinstance(mode, bool):
        raise TypeError(f"mode index must be an integer, got {mode!r}")
    if not 0 <= mode < n:
        raise IndexError(f"mode {mode} out of range for {n}-mode state")


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    return value


def _check_unit_interval(name: str, value: float) -> float:
    value = _check_finite(name, value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def _rot2(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def _embed(n_modes: int, block: np.ndarray, modes: Sequence[int]) -> np.ndarray:
    """Place a (2k x 2k) block acting on ``modes`` into a 2n x 2n identity."""
    if n_modes == 1:
        return np.array(block, dtype=float)
    s = np.eye(2 * n_modes)
    idx = np.concatenate([[2 * m, 2 * m + 1] for m in modes])
    s[np.ix_(idx, idx)] = block
    return s


def squeeze_matrix(n_modes: int, mode: int, r: float, phi: float = 0.0) -> np.ndarray:
    _check_mode(n_modes, mode)
    r = _check_finite("r", r)
    phi = _check_finite("phi", phi)
    rot = _rot2(phi / 2)
    local = rot @ np.diag([math.exp(r), math.exp(-r)]) @ rot.T
    return _embed(n_modes, local, [mode])


def rotation_matrix(n_modes: int, mode: int, theta: float) -> np.ndarray:
    _check_mode(n_modes, mode)
    return _embed(n_modes, _rot2(_check_finite("theta", theta)), [mode])


def beamsplitter_matrix(n_modes: int, mode_a: int, mode_b: int, transmissivity: float) -> np.ndarray:
    _check_mode(n_modes, mode_a)
    _check_mode(n_modes, mode_b)
    if mode_a == mode_b:
        raise ValueError("beamsplitter needs two distinct modes")
    transmissivity = _check_unit_interval("transmissivity", transmissivity)
    t = math.sqrt(transmissivity)
    s = math.sqrt(1.0 - transmissivity)
    local = np.kron(np.array([[t, s], [-s, t]]), np.eye(2))
    return _embed(n_modes, local, [mode_a, mode_b])


def vacuum(n_modes: int) -> GaussianState:
    if not isinstance(n_modes, (int, np.integer)) or n_modes < 1:
        raise ValueError(f"n_modes must be a positive integer, got {n_modes!r}")
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes))


def apply(state: GaussianState, t: SymplecticTransform) -> GaussianState:
    """Push a state through an affine symplectic map."""
    if t.n_modes != state.n_modes:
        raise ValueError(f"transform acts on {t.n_modes} modes, state has {state.n_modes}")
    return _transform(state, t.matrix, t.displacement)


def _transform(state: GaussianState, s: np.ndarray, d: Optional[np.ndarray] = None) -> GaussianState:
    mean = s @ state.mean
    if d is not None:
        mean = mean + d
    return _state(mean, s @ state.cov @ s.T)


def squeeze(state: GaussianState, mode: int, r: float, phi: float = 0.0) -> GaussianState:
    """Single-mode squeezer; the anti-squeezed axis sits at angle ``phi / 2``."""
    return _transform(state, squeeze_matrix(state.n_modes, mode, r, phi))


def rotate(state: GaussianState, mode: int, theta: float) -> GaussianState:
    return _transform(state, rotation_matrix(state.n_modes, mode, theta))


def beamsplitter(state: GaussianState, mode_a: int, mode_b: int, transmissivity: float) -> GaussianState:
    return _transform(state, beamsplitter_matrix(state.n_modes, mode_a, mode_b, transmissivity))


def displace(state: GaussianState, mode: int, q: float, p: float) -> GaussianState:
    _check_mode(state, mode)
    d = np.zeros(2 * state.n_modes)
    d[2 * mode : 2 * mode + 2] = (_check_finite("q", q), _check_finite("p", p))
    return _transform(state, np.eye(2 * state.n_modes), d)


def loss_channel(state: GaussianState, mode: int, eta: float) -> GaussianState:
    """Pure-loss channel of transmission ``eta`` on one mode."""
    _check_mode(state, mode)
    eta = _check_unit_interval("eta", eta)
    k = np.ones(2 * state.n_modes)
    k[2 * mode : 2 * mode + 2] = math.sqrt(eta)
    cov = state.cov * np.outer(k, k)
    sl = slice(2 * mode, 2 * mode + 2)
    cov[sl, sl] += (1.0 - eta) * np.eye(2)
    return _state(state.mean * k, cov)


def dephase(state: GaussianState, mode: int, sigma: float) -> GaussianState:
    """Average a mode over a Gaussian random rotation of RMS angle ``sigma``.

    The result is the Gaussian state with the exact first and second moments of
    the phase-averaged mixture, so photon numbers and quadrature variances are
    exact.  The traceless part of the mode's second-moment block shrinks by
    ``exp(-2 sigma^2)``, first moments and cross-mode correlations by
    ``exp(-sigma^2 / 2)``.
    """
    _check_mode(state, mode)
    sigma = _check_finite("sigma", sigma)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return state
    c1 = math.exp(-0.5 * sigma**2)
    c2 = math.exp(-2.0 * sigma**2)
    sl = slice(2 * mode, 2 * mode + 2)

    mean = state.mean.copy()
    mean[sl] *= c1
    k = np.ones(2 * state.n_modes)
    k[sl] = c1
    cov = state.cov * np.outer(k, k)

    second = state.cov[sl, sl] + np.outer(state.mean[sl], state.mean[sl])
    iso = 0.5 * np.trace(second) * np.eye(2)
    cov[sl, sl] = iso + c2 * (second - iso) - np.outer(mean[sl], mean[sl])
    return _state(mean, cov)


def marginal(state: GaussianState, modes: Sequence[int]) -> GaussianState:
    """Marginal state of the listed modes (partial trace over the rest)."""
    modes = list(modes)
    for m in modes:
        _check_mode(state, m)
    idx = np.concatenate([[2 * m, 2 * m + 1] for m in modes])
    return _state(state.mean[idx], state.cov[np.ix_(idx, idx)])


def mean_photon(state: GaussianState, mode: int) -> float:
    m, v = state.mode_moments(mode)
    return float((np.trace(v) + m @ m - 2.0) / 4.0)


def total_mean_photon(state: GaussianState) -> float:
    return sum(mean_photon(state, k) for k in range(state.n_modes))


def quadrature_variance(state: GaussianState, mode: int, angle: float) -> float:
    """Variance of ``cos(angle) q + sin(angle) p`` on one mode."""
    _, v = state.mode_moments(mode)
    u = np.array([math.cos(angle), math.sin(angle)])
    return float(u @ v @ u)
