"""Auxiliary discrete-time channel models: AWGN, phase noise, phase+polarization noise.

These supply the densities and state-transition samplers used by the
information-rate estimators.  Phase states live unwrapped on the real line;
wrapping happens only inside exp(j theta), which leaves every observable
unchanged and keeps the transition density a plain Gaussian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

PAULI = np.array([
    [[1.0, 0.0], [0.0, -1.0]],
    [[0.0, 1.0], [1.0, 0.0]],
    [[0.0, -1.0j], [1.0j, 0.0]],
], dtype=np.complex128)


@dataclass(frozen=True)
class AwgnParams:
    """Memoryless model y = a e^{j theta} x + n."""

    a: float
    theta: float
    sigma_n2: float

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("gain must be >= 0")
        if self.sigma_n2 <= 0:
            raise ValueError("noise variance must be > 0")


@dataclass(frozen=True)
class PnParams:
    """Wiener phase-noise model: theta_k random walk with variance sigma_theta2."""

    a: float
    sigma_n2: float
    sigma_theta2: float

    def __post_init__(self):
        if self.sigma_n2 <= 0:
            raise ValueError("noise variance must be > 0")
        if self.sigma_theta2 < 0:
            raise ValueError("walk variance must be >= 0")


@dataclass(frozen=True)
class PpnParams:
    """Phase and polarization noise: adds an isotropic Jones-matrix random walk."""

    a: float
    sigma_n2: float
    sigma_theta2: float
    sigma_p2: float

    def __post_init__(self):
        if self.sigma_n2 <= 0:
            raise ValueError("noise variance must be > 0")
        if self.sigma_theta2 < 0 or self.sigma_p2 < 0:
            raise ValueError("walk variances must be >= 0")

    @property
    def pn(self) -> PnParams:
        return PnParams(self.a, self.sigma_n2, self.sigma_theta2)


@dataclass
class ParticleSet:
    """Weighted samples of the hidden state for the forward recursion."""

    theta: np.ndarray  # (P,)
    log_weights: np.ndarray  # (P,), normalized: logsumexp == 0
    jones: Optional[np.ndarray] = None  # (P, 2, 2) complex unitary, 2-pol only
    log_evidence: float = 0.0

    def __post_init__(self):
        if self.theta.ndim != 1 or self.log_weights.shape != self.theta.shape:
            raise ValueError("theta and log_weights must be matching 1-D arrays")
        if self.jones is not None:
            if self.jones.shape != (self.theta.shape[0], 2, 2):
                raise ValueError("jones must have shape (P, 2, 2)")
            err = np.max(np.abs(
                np.einsum("pij,pkj->pik", self.jones, self.jones.conj())
                - np.eye(2)[np.newaxis]))
            if err > 1e-10:
                raise ValueError(f"non-unitary particle Jones matrix (|J J^H - I| = {err:g})")

    @property
    def count(self) -> int:
        return self.theta.shape[0]

    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)


def awgn_loglik(x: np.ndarray, y: np.ndarray, params: AwgnParams) -> float:
    """Log of the factorized conditional density for the AWGN model.

    Accepts (K,) arrays for 1-pol or (pol, K) for multi-pol data; polarization
    components are summed with per-component noise variance sigma_n2.
    """
    x = np.atleast_2d(np.asarray(x))
    y = np.atleast_2d(np.asarray(y))
    if x.shape != y.shape:
        raise ValueError("x and y must have equal shapes")
    c = params.a * np.exp(1j * params.theta)
    resid = np.abs(y - c * x) ** 2
    k_total = resid.size
    return float(-k_total * math.log(math.pi * params.sigma_n2)
                 - np.sum(resid) / params.sigma_n2)


def cscg_output_logpdf(y: np.ndarray, sigma_y2: float) -> float:
    """Log density of i.i.d. CSCG outputs with per-component variance sigma_y2."""
    if sigma_y2 <= 0:
        raise ValueError("sigma_y2 must be > 0")
    y = np.asarray(y)
    return float(-y.size * math.log(math.pi * sigma_y2)
                 - np.sum(np.abs(y) ** 2) / sigma_y2)


def pn_sample_transition(theta_prev: np.ndarray, sigma_theta2: float,
                         rng: np.random.Generator) -> np.ndarray:
    """One random-walk step: add N(0, sigma_theta2) increments."""
    if sigma_theta2 == 0:
        return np.array(theta_prev, copy=True)
    return theta_prev + rng.normal(0.0, math.sqrt(sigma_theta2), np.shape(theta_prev))


def pn_transition_logpdf(theta: float, theta_prev: float, sigma_theta2: float) -> float:
    """Unwrapped Gaussian transition density of the phase walk."""
    if sigma_theta2 <= 0:
        raise ValueError("sigma_theta2 must be > 0 for a density evaluation")
    d = theta - theta_prev
    return -0.5 * math.log(2.0 * math.pi * sigma_theta2) - d * d / (2.0 * sigma_theta2)


def pn_emission_loglik(y_k: complex, x_k: complex, theta_k: float,
                       a: float, sigma_n2: float) -> float:
    if sigma_n2 <= 0:
        raise ValueError("sigma_n2 must be > 0")
    d = y_k - a * np.exp(1j * theta_k) * x_k
    return float(-math.log(math.pi * sigma_n2) - abs(d) ** 2 / sigma_n2)


def ppn_step(jones_prev: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Advance the Jones state: J_next = exp(j alpha . pauli) J_prev.

    Uses the closed form exp(jA) = cos(|alpha|) I + j sin(|alpha|)/|alpha| A,
    valid because A^2 = |alpha|^2 I for traceless A = alpha . pauli.
    """
    jones_prev = np.asarray(jones_prev, dtype=np.complex128)
    err = np.max(np.abs(jones_prev @ jones_prev.conj().T - np.eye(2)))
    if err > 1e-9:
        raise ValueError(f"jones_prev is not unitary (|J J^H - I| = {err:g})")
    a1, a2, a3 = float(alpha[0]), float(alpha[1]), float(alpha[2])
    r = math.sqrt(a1 * a1 + a2 * a2 + a3 * a3)
    if r == 0.0:
        return np.array(jones_prev, copy=True)
    mat = 1j * (a1 * PAULI[0] + a2 * PAULI[1] + a3 * PAULI[2])
    rot = math.cos(r) * np.eye(2) + (math.sin(r) / r) * mat
    return rot @ jones_prev


def ppn_emission_loglik(y_k: np.ndarray, x_k: np.ndarray, theta_k: float,
                        jones_k: np.ndarray, a: float, sigma_n2: float) -> float:
    if sigma_n2 <= 0:
        raise ValueError("sigma_n2 must be > 0")
    y_k = np.asarray(y_k).reshape(2)
    x_k = np.asarray(x_k).reshape(2)
    d = y_k - a * np.exp(1j * theta_k) * (np.asarray(jones_k) @ x_k)
    return float(-2.0 * math.log(math.pi * sigma_n2)
                 - np.sum(np.abs(d) ** 2) / sigma_n2)


def init_particles(count: int, pol_count: int, rng: np.random.Generator) -> ParticleSet:
    """Fresh particle set: theta uniform on [0, 2 pi), Jones at identity (2-pol).

    The simulated link induces no deterministic polarization rotation, so the
    identity is the natural starting point; the fitted walk variance provides
    the exploration around it.
    """
    theta = rng.uniform(0.0, 2.0 * math.pi, count)
    logw = np.full(count, -math.log(count))
    jones = None
    if pol_count == 2:
        jones = np.broadcast_to(np.eye(2, dtype=np.complex128), (count, 2, 2)).copy()
    return ParticleSet(theta=theta, log_weights=logw, jones=jones)
