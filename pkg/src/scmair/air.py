"""Achievable-information-rate estimation under mismatched decoding.

Implements the parameter-estimation step (noncentral chi-squared likelihood
for the gain/noise pair, AIR maximization for the walk variances), the
sequential-Monte-Carlo evidence computation for the hidden-Markov auxiliary
channels, and the spectral-efficiency aggregation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import ive

from . import _kernels
from .auxch import PAULI, AwgnParams, PnParams, PpnParams, cscg_output_logpdf
from .core import RunSeed

LN2 = math.log(2.0)

_CHUNK = 2048


@dataclass(frozen=True)
class AirEstimate:
    """AIR in bits per channel use per polarization, with its standard error."""

    value: float
    model: str  # "awgn" | "pn" | "pn-per-pol" | "ppn"
    stderr: float
    n_symbols: int
    particles: int = 0
    subcarrier: int = -1

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError("AIR estimate must be finite")


@dataclass(frozen=True)
class SeResult:
    """Spectral efficiency over the COI band: sum of subcarrier AIRs / (W*T)."""

    se: float  # bit/s/Hz (per polarization, matching the AIR convention)
    airs: tuple
    channel_spacing: float
    symbol_time: float
    stderr: float = 0.0


def _blocked_stderr(increments: np.ndarray, n_blocks: int = 50) -> float:
    """Standard error of the mean of a (possibly correlated) increment series.

    Blocking analysis: the variance of block means is evaluated at several
    block sizes and the largest estimate is kept, so that correlation on
    scales longer than any single block size (the nonlinear-interference
    coherence can span thousands of symbols) does not silently shrink the
    error bar.
    """
    k = increments.shape[0]
    best = 0.0
    for blocks_target in (n_blocks, 20, 8):
        nb = max(2, min(blocks_target, k // 20)) if k >= 40 else 2
        usable = (k // nb) * nb
        blocks = increments[:usable].reshape(nb, -1).mean(axis=1)
        best = max(best, float(np.std(blocks, ddof=1) / math.sqrt(nb)))
    return best


# ---------------------------------------------------------------------------
# Parameter estimation
# ---------------------------------------------------------------------------


def estimate_gain_noise(x: np.ndarray, y: np.ndarray):
    """ML fit of (a, sigma_n2) from the noncentral chi-squared law of ||y_k||^2.

    ``x`` and ``y`` are (pol, K) training arrays from the true channel.  The
    statistic uses moduli only, so it is blind to phase and polarization
    rotations; the gain is tied as a = sqrt((sigma_y2 - sigma_n2) / sigma_x2).
    """
    x = np.atleast_2d(np.asarray(x))
    y = np.atleast_2d(np.asarray(y))
    if x.shape != y.shape:
        raise ValueError("training arrays must have equal shapes")
    pol, k = x.shape
    sx = np.sum(np.abs(x) ** 2, axis=0)  # ||x_k||^2
    sy = np.sum(np.abs(y) ** 2, axis=0)
    sigma_x2 = float(np.mean(sx)) / pol
    sigma_y2 = float(np.mean(sy)) / pol
    if sigma_y2 <= 0 or sigma_x2 <= 0:
        raise ValueError("degenerate training data (zero power)")
    p = 0.0 if pol == 1 else 0.5
    order = 2 * p
    rx = np.sqrt(sx)
    ry = np.sqrt(sy)
    log_ratio = p * (np.log(sy) - np.log(sx))

    def negloglik(sn2: float) -> float:
        a2 = (sigma_y2 - sn2) / sigma_x2
        a = math.sqrt(max(a2, 0.0))
        z = 2.0 * a * rx * ry / sn2
        # log I_order(z) in a stable form
        log_bessel = np.log(ive(order, z)) + z
        ll = (-k * math.log(sn2)
              - np.sum(sy + a2 * sx) / sn2
              + np.sum(log_ratio) - k * p * math.log(max(a2, 1e-300))
              + np.sum(log_bessel))
        return -float(ll)

    lo = 1e-9 * sigma_y2
    hi = (1.0 - 1e-9) * sigma_y2
    res = minimize_scalar(negloglik, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12 * sigma_y2, "maxiter": 200})
    if not res.success:
        raise RuntimeError(f"gain/noise likelihood search failed: {res.message}")
    sn2 = float(res.x)
    a = math.sqrt(max(sigma_y2 - sn2, 0.0) / sigma_x2)
    return a, sn2


def fit_awgn_phase(x: np.ndarray, y: np.ndarray) -> float:
    """ML common phase rotation between matched sequences: arg sum y_k x_k^*."""
    return float(np.angle(np.sum(np.asarray(y) * np.conj(np.asarray(x)))))


def fit_awgn_moments(x: np.ndarray, y: np.ndarray) -> AwgnParams:
    """Moment fit of the memoryless model: c = E[x*y]/E|x|^2, sigma_n^2 = E|y-cx|^2.

    These are the AIR-maximizing parameters within the memoryless Gaussian
    model class.  Unlike the amplitude-only likelihood fit (which is blind to
    phase wander by construction), the residual variance here absorbs any
    untracked phase or polarization dynamics as noise.  Because both moments
    are quadratic forms of the blocks, the resulting AIR is invariant under
    unitary regrouping of the symbols — in particular, under a change of the
    subcarrier count for Gaussian symbols — provided the fit is pooled over
    everything that the regrouping mixes.
    """
    x = np.asarray(x).ravel()
    y = np.asarray(y).ravel()
    if x.shape != y.shape:
        raise ValueError("x and y must have equal shapes")
    ex2 = float(np.vdot(x, x).real)
    if ex2 <= 0:
        raise ValueError("degenerate training block: zero input energy")
    c = complex(np.vdot(x, y)) / ex2
    sn2 = float(np.mean(np.abs(y - c * x) ** 2))
    return AwgnParams(abs(c), float(np.angle(c)), sn2)


# ---------------------------------------------------------------------------
# AWGN-model AIR (closed form, no particles)
# ---------------------------------------------------------------------------


def air_awgn(x: np.ndarray, y: np.ndarray, params: AwgnParams,
             sigma_x2: float, subcarrier: int = -1,
             refit_phase: bool = True) -> AirEstimate:
    """AIR of the memoryless AWGN auxiliary model, per polarization.

    ``x``/``y`` may be (K,) or (pol, K); polarizations are treated
    independently and the result is reported per polarization.  With
    ``refit_phase`` the common phase is re-estimated by ML correlation per
    polarization; otherwise ``params.theta`` is used as given (required when
    the same parameters must apply across subcarriers).
    """
    x = np.atleast_2d(np.asarray(x))
    y = np.atleast_2d(np.asarray(y))
    if x.shape != y.shape:
        raise ValueError("x and y must have equal shapes")
    pol, k = x.shape
    sigma_y2 = params.a ** 2 * sigma_x2 + params.sigma_n2
    incs = []
    for q in range(pol):
        theta = fit_awgn_phase(x[q], y[q]) if refit_phase else params.theta
        c = params.a * np.exp(1j * theta)
        d2 = np.abs(y[q] - c * x[q]) ** 2
        ll = -math.log(math.pi * params.sigma_n2) - d2 / params.sigma_n2
        lq = -math.log(math.pi * sigma_y2) - np.abs(y[q]) ** 2 / sigma_y2
        incs.append((ll - lq) / LN2)
    incs = np.mean(incs, axis=0)  # per-pol average, bits/use/pol
    return AirEstimate(float(np.mean(incs)), "awgn", _blocked_stderr(incs),
                       n_symbols=k, subcarrier=subcarrier)


# ---------------------------------------------------------------------------
# Particle-filter AIR for the PN / PPN hidden-Markov models
# ---------------------------------------------------------------------------


@dataclass
class FilterTrace:
    """Per-symbol byproducts of the forward recursion."""

    evidence_increments: np.ndarray  # (K,) nats
    theta_mean: np.ndarray  # (K,)
    ess: np.ndarray  # (K,)
    jones_mean: Optional[np.ndarray] = None  # (K, 2, 2)


def _run_pn_filter(x: np.ndarray, y: np.ndarray, params: PnParams,
                   particles: int, rng: np.random.Generator,
                   ess_fraction: float = 0.5) -> FilterTrace:
    k = x.shape[0]
    theta = rng.uniform(0.0, 2.0 * math.pi, particles)
    logw = np.full(particles, -math.log(particles))
    evid = np.empty(k)
    theta_mean = np.empty(k)
    ess = np.empty(k)
    sd = math.sqrt(params.sigma_theta2)
    for start in range(0, k, _CHUNK):
        stop = min(start + _CHUNK, k)
        c = stop - start
        incr = (rng.normal(0.0, sd, (c, particles)) if sd > 0
                else np.zeros((c, particles)))
        u_res = rng.uniform(0.0, 1.0, c)
        _kernels.pn_chunk(x[start:stop], y[start:stop], incr, u_res,
                          params.a, params.sigma_n2, ess_fraction * particles,
                          theta, logw, evid[start:stop],
                          theta_mean[start:stop], ess[start:stop])
    if not np.all(np.isfinite(evid)):
        raise FloatingPointError("particle weight collapse: non-finite evidence")
    return FilterTrace(evid, theta_mean, ess)


def _run_ppn_filter(x: np.ndarray, y: np.ndarray, params: PpnParams,
                    particles: int, rng: np.random.Generator,
                    ess_fraction: float = 0.5) -> FilterTrace:
    k = x.shape[1]  # x, y are (2, K)
    theta = rng.uniform(0.0, 2.0 * math.pi, particles)
    jones = np.broadcast_to(np.eye(2, dtype=np.complex128),
                            (particles, 2, 2)).copy()
    logw = np.full(particles, -math.log(particles))
    evid = np.empty(k)
    theta_mean = np.empty(k)
    ess = np.empty(k)
    jones_mean = np.empty((k, 2, 2), dtype=np.complex128)
    sd_t = math.sqrt(params.sigma_theta2)
    sd_p = math.sqrt(params.sigma_p2)
    xt = np.ascontiguousarray(x.T)
    yt = np.ascontiguousarray(y.T)
    for start in range(0, k, _CHUNK):
        stop = min(start + _CHUNK, k)
        c = stop - start
        incr = (rng.normal(0.0, sd_t, (c, particles)) if sd_t > 0
                else np.zeros((c, particles)))
        alpha = (rng.normal(0.0, sd_p, (c, particles, 3)) if sd_p > 0
                 else np.zeros((c, particles, 3)))
        u_res = rng.uniform(0.0, 1.0, c)
        _kernels.ppn_chunk(xt[start:stop], yt[start:stop], incr, alpha, u_res,
                           params.a, params.sigma_n2, ess_fraction * particles,
                           theta, jones, logw, evid[start:stop],
                           theta_mean[start:stop], jones_mean[start:stop],
                           ess[start:stop])
    if not np.all(np.isfinite(evid)):
        raise FloatingPointError("particle weight collapse: non-finite evidence")
    return FilterTrace(evid, theta_mean, ess, jones_mean)


def _warn_if_degenerate(ess: np.ndarray, particles: int):
    frac = np.mean(ess < 0.1 * particles)
    if frac > 0.5:
        warnings.warn(
            f"effective sample size below 0.1*P for {frac:.0%} of steps; "
            "consider increasing the particle count", RuntimeWarning)


def air_particle(x: np.ndarray, y: np.ndarray,
                 params: Union[PnParams, PpnParams], particles: int,
                 rng: np.random.Generator, sigma_x2: float,
                 subcarrier: int = -1) -> AirEstimate:
    """Sequential-Monte-Carlo AIR estimate for the PN (1-pol) or PPN (2-pol) model.

    Reported per polarization: the joint 2-pol PPN evidence is divided by two.
    """
    if particles < 2:
        raise ValueError("need at least 2 particles")
    if isinstance(params, PpnParams):
        x = np.asarray(x)
        y = np.asarray(y)
        if x.ndim != 2 or x.shape[0] != 2:
            raise ValueError("PPN model requires (2, K) dual-polarization data")
        trace = _run_ppn_filter(x, y, params, particles, rng)
        sigma_y2 = params.a ** 2 * sigma_x2 + params.sigma_n2
        lq = (-2.0 * math.log(math.pi * sigma_y2)
              - np.sum(np.abs(y) ** 2, axis=0) / sigma_y2)
        incs = (trace.evidence_increments - lq) / LN2 / 2.0  # bits/use/pol
        model = "ppn"
    else:
        x = np.asarray(x).reshape(-1)
        y = np.asarray(y).reshape(-1)
        trace = _run_pn_filter(x, y, params, particles, rng)
        sigma_y2 = params.a ** 2 * sigma_x2 + params.sigma_n2
        lq = -math.log(math.pi * sigma_y2) - np.abs(y) ** 2 / sigma_y2
        incs = (trace.evidence_increments - lq) / LN2
        model = "pn"
    _warn_if_degenerate(trace.ess, particles)
    return AirEstimate(float(np.mean(incs)), model, _blocked_stderr(incs),
                       n_symbols=incs.shape[0], particles=particles,
                       subcarrier=subcarrier)


def air_pn_per_pol(x: np.ndarray, y: np.ndarray, params: PnParams,
                   particles: int, rng: np.random.Generator,
                   sigma_x2: float, subcarrier: int = -1) -> AirEstimate:
    """PN model applied independently to each polarization; mean over pols."""
    x = np.atleast_2d(np.asarray(x))
    y = np.atleast_2d(np.asarray(y))
    ests = [air_particle(x[q], y[q], params, particles, rng, sigma_x2)
            for q in range(x.shape[0])]
    value = float(np.mean([e.value for e in ests]))
    stderr = float(np.sqrt(np.sum([e.stderr ** 2 for e in ests])) / len(ests))
    return AirEstimate(value, "pn-per-pol", stderr, n_symbols=ests[0].n_symbols,
                       particles=particles, subcarrier=subcarrier)


# ---------------------------------------------------------------------------
# Walk-variance estimation by AIR maximization
# ---------------------------------------------------------------------------

_LOG10_BOUNDS = (-8.0, 0.0)


def estimate_walk_variances(x: np.ndarray, y: np.ndarray, a: float,
                            sigma_n2: float, model: str, particles: int,
                            seed: RunSeed, sigma_x2: float,
                            rounds: int = 2) -> Union[PnParams, PpnParams]:
    """Fit sigma_theta2 (and sigma_p2 for PPN) by maximizing the particle AIR.

    A bounded 1-D search per parameter on a log10 scale, with common random
    numbers across evaluations so the objective is smooth; PPN alternates the
    two parameters (coordinate ascent).
    """
    if model not in ("pn", "pn-per-pol", "ppn"):
        raise ValueError(f"unknown model {model!r}")

    def air_value(st2: float, sp2: float) -> float:
        rng = seed.generator("walk-variance-search")
        if model == "ppn":
            p = PpnParams(a, sigma_n2, st2, sp2)
            est = air_particle(x, y, p, particles, rng, sigma_x2)
        elif model == "pn-per-pol":
            p = PnParams(a, sigma_n2, st2)
            est = air_pn_per_pol(x, y, p, particles, rng, sigma_x2)
        else:
            p = PnParams(a, sigma_n2, st2)
            est = air_particle(x, y, p, particles, rng, sigma_x2)
        if not np.isfinite(est.value):
            raise FloatingPointError("non-finite AIR during variance search")
        return est.value

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if model in ("pn", "pn-per-pol"):
            res = minimize_scalar(lambda e: -air_value(10.0 ** e, 0.0),
                                  bounds=_LOG10_BOUNDS, method="bounded",
                                  options={"xatol": 0.05, "maxiter": 30})
            return PnParams(a, sigma_n2, 10.0 ** float(res.x))
        st2, sp2 = 1e-4, 1e-5  # starting guesses inside the search box
        for _ in range(rounds):
            res = minimize_scalar(lambda e: -air_value(10.0 ** e, sp2),
                                  bounds=_LOG10_BOUNDS, method="bounded",
                                  options={"xatol": 0.05, "maxiter": 25})
            st2 = 10.0 ** float(res.x)
            res = minimize_scalar(lambda e: -air_value(st2, 10.0 ** e),
                                  bounds=_LOG10_BOUNDS, method="bounded",
                                  options={"xatol": 0.05, "maxiter": 25})
            sp2 = 10.0 ** float(res.x)
        return PpnParams(a, sigma_n2, st2, sp2)


# ---------------------------------------------------------------------------
# Spectral efficiency and state-track export
# ---------------------------------------------------------------------------


def spectral_efficiency(airs, channel_spacing: float, symbol_time: float) -> SeResult:
    """SE = sum of per-subcarrier AIRs / (W*T); equals the mean AIR when WT = N."""
    airs = tuple(airs)
    if not airs:
        raise ValueError("at least one AIR estimate is required")
    wt = channel_spacing * symbol_time
    se = float(sum(e.value for e in airs) / wt)
    # subcarrier AIR estimates share one channel realization, so the dominant
    # fluctuation (the nonlinear-interference draw) is common to all of them;
    # combine with the fully-correlated bound rather than the independent one
    stderr = float(sum(e.stderr for e in airs) / wt)
    return SeResult(se, airs, channel_spacing, symbol_time, stderr)


@dataclass(frozen=True)
class StateTrack:
    """Posterior-mean state trajectory extracted from the forward recursion."""

    theta_mean: np.ndarray  # (K,)
    theta_autocov: np.ndarray  # (K//2,), lag 0 equals var(theta_mean)
    stokes_rotation: Optional[np.ndarray]  # (K, 3, 3): images of S1, S2, S3
    ess: np.ndarray


def _autocovariance(x: np.ndarray, max_lag: int) -> np.ndarray:
    xd = x - np.mean(x)
    n = xd.shape[0]
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(xd, nfft)
    ac = np.fft.irfft(spec * np.conj(spec))[:max_lag] / n
    return np.real(ac)


def _stokes_rotation_from_jones(jones: np.ndarray) -> np.ndarray:
    """Mueller rotation R_ij = Re tr(pauli_i J pauli_j J^H) / 2 for each step."""
    jh = np.conj(np.swapaxes(jones, -1, -2))
    out = np.empty(jones.shape[:-2] + (3, 3))
    for i in range(3):
        for j in range(3):
            m = PAULI[i] @ jones @ PAULI[j] @ jh
            out[..., i, j] = 0.5 * np.real(np.trace(m, axis1=-2, axis2=-1))
    return out


def export_state_track(x: np.ndarray, y: np.ndarray,
                       params: Union[PnParams, PpnParams], particles: int,
                       rng: np.random.Generator) -> StateTrack:
    """Run the forward recursion and emit per-symbol posterior means of the state."""
    if isinstance(params, PpnParams):
        trace = _run_ppn_filter(np.asarray(x), np.asarray(y), params,
                                particles, rng)
        stokes = _stokes_rotation_from_jones(trace.jones_mean)
    else:
        trace = _run_pn_filter(np.asarray(x).reshape(-1),
                               np.asarray(y).reshape(-1), params, particles, rng)
        stokes = None
    k = trace.theta_mean.shape[0]
    autocov = _autocovariance(trace.theta_mean, max(1, k // 2))
    return StateTrack(trace.theta_mean, autocov, stokes, trace.ess)
