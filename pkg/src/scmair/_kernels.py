"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen at import time: numba is used when available unless the
environment variable ``SCMAIR_DISABLE_NUMBA`` is set to a non-empty value.
Both paths implement the same contracts; ``benchmarks/bench_kernels.py``
compares them.
"""

from __future__ import annotations

import math
import os

import numpy as np

_DISABLED = bool(os.environ.get("SCMAIR_DISABLE_NUMBA", ""))
try:
    if _DISABLED:
        raise ImportError
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:
    NUMBA_ENABLED = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(f):
            return f

        return deco


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"


# ---------------------------------------------------------------------------
# Kerr nonlinear phase rotation (SSFM inner step)
# ---------------------------------------------------------------------------


def _kerr_rotate_np(samples: np.ndarray, factor: float) -> None:
    """In-place u *= exp(-j * factor * ||u||^2), common rotation across pols."""
    phi = factor * np.sum(np.abs(samples) ** 2, axis=0)
    samples *= np.exp(-1j * phi)[np.newaxis, :]


@njit(cache=True)
def _kerr_rotate_nb(samples, factor):
    pol, n = samples.shape
    for i in range(n):
        p = 0.0
        for q in range(pol):
            v = samples[q, i]
            p += v.real * v.real + v.imag * v.imag
        rot = np.exp(-1j * factor * p)
        for q in range(pol):
            samples[q, i] = samples[q, i] * rot


def kerr_rotate(samples: np.ndarray, factor: float) -> None:
    if NUMBA_ENABLED:
        _kerr_rotate_nb(samples, factor)
    else:
        _kerr_rotate_np(samples, factor)


# ---------------------------------------------------------------------------
# Phase-noise particle filter, forward recursion over one chunk of symbols
# ---------------------------------------------------------------------------
#
# State: particle phases ``theta`` (unwrapped) and normalized log weights
# ``logw`` (logsumexp == 0).  Per symbol: propagate with the pre-drawn
# Gaussian increments, reweight with the emission likelihood, accumulate the
# evidence increment, and systematically resample when the effective sample
# size drops below ``ess_threshold`` particles.


def _systematic_indices_np(w: np.ndarray, u: float) -> np.ndarray:
    p = w.shape[0]
    positions = (np.arange(p) + u) / p
    return np.searchsorted(np.cumsum(w), positions).clip(max=p - 1)


def _pn_chunk_np(x, y, incr, u_res, a, sn2, ess_threshold, theta, logw,
                 evid, theta_mean, ess_out):
    p = theta.shape[0]
    const = -math.log(math.pi * sn2)
    for k in range(x.shape[0]):
        theta += incr[k]
        d = y[k] - a * np.exp(1j * theta) * x[k]
        lw = logw + (const - (d.real * d.real + d.imag * d.imag) / sn2)
        m = lw.max()
        inc = m + math.log(np.sum(np.exp(lw - m)))
        logw[:] = lw - inc
        evid[k] = inc
        w = np.exp(logw)
        theta_mean[k] = float(np.dot(w, theta))
        ess = 1.0 / float(np.dot(w, w))
        ess_out[k] = ess
        if ess < ess_threshold:
            idx = _systematic_indices_np(w, u_res[k])
            theta[:] = theta[idx]
            logw[:] = -math.log(p)


@njit(cache=True)
def _pn_chunk_nb(x, y, incr, u_res, a, sn2, ess_threshold, theta, logw,
                 evid, theta_mean, ess_out):
    p = theta.shape[0]
    const = -math.log(math.pi * sn2)
    lw = np.empty(p)
    w = np.empty(p)
    scratch = np.empty(p)
    for k in range(x.shape[0]):
        xk = x[k]
        yk = y[k]
        m = -1e300
        for i in range(p):
            theta[i] += incr[k, i]
            rot = a * np.exp(1j * theta[i])
            d = yk - rot * xk
            lw[i] = logw[i] + const - (d.real * d.real + d.imag * d.imag) / sn2
            if lw[i] > m:
                m = lw[i]
        s = 0.0
        for i in range(p):
            s += math.exp(lw[i] - m)
        inc = m + math.log(s)
        evid[k] = inc
        tm = 0.0
        wsq = 0.0
        for i in range(p):
            logw[i] = lw[i] - inc
            w[i] = math.exp(logw[i])
            tm += w[i] * theta[i]
            wsq += w[i] * w[i]
        theta_mean[k] = tm
        ess = 1.0 / wsq
        ess_out[k] = ess
        if ess < ess_threshold:
            # systematic resampling
            c = 0.0
            j = 0
            u0 = u_res[k]
            for i in range(p):
                c += w[i]
                while j < p and (j + u0) / p <= c:
                    scratch[j] = theta[i]
                    j += 1
            while j < p:  # guard against rounding at the tail
                scratch[j] = theta[p - 1]
                j += 1
            for i in range(p):
                theta[i] = scratch[i]
                logw[i] = -math.log(p)


def pn_chunk(x, y, incr, u_res, a, sn2, ess_threshold, theta, logw,
             evid, theta_mean, ess_out):
    fn = _pn_chunk_nb if NUMBA_ENABLED else _pn_chunk_np
    fn(x, y, incr, u_res, a, sn2, ess_threshold, theta, logw, evid,
       theta_mean, ess_out)


# ---------------------------------------------------------------------------
# Phase-and-polarization particle filter (2-pol, joint state theta_k, J_k)
# ---------------------------------------------------------------------------


def _rotation_from_alpha(a1, a2, a3):
    """Closed-form exp(j alpha . pauli) as a 2x2 complex matrix (numpy path)."""
    r = np.sqrt(a1 * a1 + a2 * a2 + a3 * a3)
    out = np.empty(a1.shape + (2, 2), dtype=np.complex128)
    small = r < 1e-30
    s = np.where(small, 1.0, np.sin(np.where(small, 1.0, r)) / np.where(small, 1.0, r))
    c = np.cos(r)
    out[..., 0, 0] = c + 1j * s * a1
    out[..., 0, 1] = s * (a3 + 1j * a2)
    out[..., 1, 0] = s * (-a3 + 1j * a2)
    out[..., 1, 1] = c - 1j * s * a1
    return out


def _ppn_chunk_np(x, y, incr, alpha, u_res, a, sn2, ess_threshold, theta,
                  jones, logw, evid, theta_mean, jones_mean, ess_out):
    p = theta.shape[0]
    const = -2.0 * math.log(math.pi * sn2)
    for k in range(x.shape[0]):
        theta += incr[k]
        rot = _rotation_from_alpha(alpha[k, :, 0], alpha[k, :, 1], alpha[k, :, 2])
        jones[:] = rot @ jones
        jx = jones @ x[k]
        d = y[k][np.newaxis, :] - (a * np.exp(1j * theta))[:, np.newaxis] * jx
        lw = logw + (const - np.sum(d.real**2 + d.imag**2, axis=1) / sn2)
        m = lw.max()
        inc = m + math.log(np.sum(np.exp(lw - m)))
        logw[:] = lw - inc
        evid[k] = inc
        w = np.exp(logw)
        theta_mean[k] = float(np.dot(w, theta))
        jones_mean[k] = np.tensordot(w, jones, axes=(0, 0))
        ess = 1.0 / float(np.dot(w, w))
        ess_out[k] = ess
        if ess < ess_threshold:
            idx = _systematic_indices_np(w, u_res[k])
            theta[:] = theta[idx]
            jones[:] = jones[idx]
            logw[:] = -math.log(p)


@njit(cache=True)
def _ppn_chunk_nb(x, y, incr, alpha, u_res, a, sn2, ess_threshold, theta,
                  jones, logw, evid, theta_mean, jones_mean, ess_out):
    p = theta.shape[0]
    const = -2.0 * math.log(math.pi * sn2)
    lw = np.empty(p)
    w = np.empty(p)
    sc_t = np.empty(p)
    sc_j = np.empty((p, 2, 2), dtype=np.complex128)
    for k in range(x.shape[0]):
        x0 = x[k, 0]
        x1 = x[k, 1]
        y0 = y[k, 0]
        y1 = y[k, 1]
        m = -1e300
        for i in range(p):
            theta[i] += incr[k, i]
            a1 = alpha[k, i, 0]
            a2 = alpha[k, i, 1]
            a3 = alpha[k, i, 2]
            r = math.sqrt(a1 * a1 + a2 * a2 + a3 * a3)
            if r < 1e-30:
                c = 1.0
                s = 1.0
            else:
                c = math.cos(r)
                s = math.sin(r) / r
            r00 = c + 1j * s * a1
            r01 = s * (a3 + 1j * a2)
            r10 = s * (-a3 + 1j * a2)
            r11 = c - 1j * s * a1
            j00 = r00 * jones[i, 0, 0] + r01 * jones[i, 1, 0]
            j01 = r00 * jones[i, 0, 1] + r01 * jones[i, 1, 1]
            j10 = r10 * jones[i, 0, 0] + r11 * jones[i, 1, 0]
            j11 = r10 * jones[i, 0, 1] + r11 * jones[i, 1, 1]
            jones[i, 0, 0] = j00
            jones[i, 0, 1] = j01
            jones[i, 1, 0] = j10
            jones[i, 1, 1] = j11
            g = a * np.exp(1j * theta[i])
            d0 = y0 - g * (j00 * x0 + j01 * x1)
            d1 = y1 - g * (j10 * x0 + j11 * x1)
            nrm = d0.real * d0.real + d0.imag * d0.imag + d1.real * d1.real + d1.imag * d1.imag
            lw[i] = logw[i] + const - nrm / sn2
            if lw[i] > m:
                m = lw[i]
        s_ = 0.0
        for i in range(p):
            s_ += math.exp(lw[i] - m)
        inc = m + math.log(s_)
        evid[k] = inc
        tm = 0.0
        wsq = 0.0
        jm00 = 0.0 + 0.0j
        jm01 = 0.0 + 0.0j
        jm10 = 0.0 + 0.0j
        jm11 = 0.0 + 0.0j
        for i in range(p):
            logw[i] = lw[i] - inc
            w[i] = math.exp(logw[i])
            tm += w[i] * theta[i]
            wsq += w[i] * w[i]
            jm00 += w[i] * jones[i, 0, 0]
            jm01 += w[i] * jones[i, 0, 1]
            jm10 += w[i] * jones[i, 1, 0]
            jm11 += w[i] * jones[i, 1, 1]
        theta_mean[k] = tm
        jones_mean[k, 0, 0] = jm00
        jones_mean[k, 0, 1] = jm01
        jones_mean[k, 1, 0] = jm10
        jones_mean[k, 1, 1] = jm11
        ess = 1.0 / wsq
        ess_out[k] = ess
        if ess < ess_threshold:
            c = 0.0
            j = 0
            u0 = u_res[k]
            for i in range(p):
                c += w[i]
                while j < p and (j + u0) / p <= c:
                    sc_t[j] = theta[i]
                    sc_j[j, 0, 0] = jones[i, 0, 0]
                    sc_j[j, 0, 1] = jones[i, 0, 1]
                    sc_j[j, 1, 0] = jones[i, 1, 0]
                    sc_j[j, 1, 1] = jones[i, 1, 1]
                    j += 1
            while j < p:
                sc_t[j] = theta[p - 1]
                sc_j[j] = jones[p - 1]
                j += 1
            for i in range(p):
                theta[i] = sc_t[i]
                jones[i] = sc_j[i]
                logw[i] = -math.log(p)


def ppn_chunk(x, y, incr, alpha, u_res, a, sn2, ess_threshold, theta, jones,
              logw, evid, theta_mean, jones_mean, ess_out):
    fn = _ppn_chunk_nb if NUMBA_ENABLED else _ppn_chunk_np
    fn(x, y, incr, alpha, u_res, a, sn2, ess_threshold, theta, jones, logw,
       evid, theta_mean, jones_mean, ess_out)
