"""Independent reference implementations used only by the test suite.

Everything here is deliberately written with different algorithms than the
package (closed forms, dense grids, direct sums) so agreement is meaningful.
"""

from __future__ import annotations

import math

import numpy as np


def dispersed_gaussian(t: np.ndarray, z_m: float, t0_s: float,
                       beta2_s2_m: float, peak_amplitude: float = 1.0) -> np.ndarray:
    """Closed-form evolution of a Gaussian pulse under pure group-velocity dispersion.

    Initial condition A exp(-t^2 / (2 T0^2)); the dispersed pulse is
    A T0 / sqrt(T0^2 + j b2 z) * exp(-t^2 / (2 (T0^2 + j b2 z))).
    """
    q = t0_s * t0_s + 1j * beta2_s2_m * z_m
    return peak_amplitude * t0_s / np.sqrt(q) * np.exp(-t * t / (2.0 * q))


def spm_reference(u0: np.ndarray, gamma_w_m: float, l_eff_m: float) -> np.ndarray:
    """Self-phase-modulation-only solution: u0 * exp(-j gamma ||u0||^2 L_eff)."""
    power = np.sum(np.abs(u0) ** 2, axis=0, keepdims=True)
    return u0 * np.exp(-1j * gamma_w_m * power * l_eff_m)


def effective_length_m(alpha_inv_m: float, length_m: float) -> float:
    if alpha_inv_m == 0.0:
        return length_m
    return (1.0 - math.exp(-alpha_inv_m * length_m)) / alpha_inv_m


def grid_forward_phase_noise(x: np.ndarray, y: np.ndarray, a: float,
                             sigma_n2: float, sigma_theta2: float,
                             n_bins: int = 2048) -> np.ndarray:
    """Forward algorithm on a quantized phase grid for the Wiener-phase channel.

    Returns per-symbol log-evidence increments log p(y_k | y_{<k}, x).  The
    transition is a wrapped Gaussian applied by circular convolution (FFT);
    the phase prior is uniform.
    """
    x = np.asarray(x).reshape(-1)
    y = np.asarray(y).reshape(-1)
    k = x.shape[0]
    grid = 2.0 * np.pi * np.arange(n_bins) / n_bins
    rot = np.exp(1j * grid)

    # wrapped-Gaussian transition kernel on the grid (sum over enough wraps)
    d = (np.arange(n_bins) + n_bins // 2) % n_bins - n_bins // 2
    d = d * (2.0 * np.pi / n_bins)
    kern = np.zeros(n_bins)
    if sigma_theta2 > 0:
        n_wrap = max(1, int(np.ceil(4.0 * math.sqrt(sigma_theta2) / (2 * np.pi))) + 1)
        for w in range(-n_wrap, n_wrap + 1):
            kern += np.exp(-((d + 2 * np.pi * w) ** 2) / (2.0 * sigma_theta2))
        kern /= kern.sum()
    else:
        kern[0] = 1.0
    # kern is indexed by signed offset in FFT order already (see d above)
    kern_f = np.fft.fft(kern)
    prob = np.full(n_bins, 1.0 / n_bins)
    incs = np.empty(k)
    for i in range(k):
        if i > 0 and sigma_theta2 > 0:
            prob = np.real(np.fft.ifft(np.fft.fft(prob) * kern_f))
            prob = np.clip(prob, 0.0, None)
            prob /= prob.sum()
        resid = np.abs(y[i] - a * rot * x[i]) ** 2
        like = np.exp(-(resid - resid.min()) / sigma_n2) / (math.pi * sigma_n2)
        joint = prob * like
        s = joint.sum()
        incs[i] = math.log(s) - resid.min() / sigma_n2
        prob = joint / s
    return incs


def grid_air_phase_noise(x, y, a, sigma_n2, sigma_theta2, sigma_x2,
                         n_bins: int = 2048) -> float:
    """Mismatched-decoding AIR (bits/use) from the grid forward algorithm."""
    incs = grid_forward_phase_noise(x, y, a, sigma_n2, sigma_theta2, n_bins)
    sigma_y2 = a * a * sigma_x2 + sigma_n2
    lq = -np.log(math.pi * sigma_y2) - np.abs(np.asarray(y).reshape(-1)) ** 2 / sigma_y2
    return float(np.mean(incs - lq) / math.log(2.0))


def direct_scm_waveform(symbols: np.ndarray, subcarrier_spacing: float,
                        symbol_time: float, sample_rate: float) -> np.ndarray:
    """Direct time-domain synthesis of a subcarrier-multiplexed block.

    Uses the periodic (cyclic) sinc pulse -- the Dirichlet kernel with K
    spectral lines -- evaluated by an explicit double sum.  O(N K n): tiny
    inputs only.
    """
    pol, n_sc, k = symbols.shape
    duration = k * symbol_time
    n = int(round(sample_rate * duration))
    t = np.arange(n) / sample_rate
    out = np.zeros((pol, n), dtype=np.complex128)
    freqs = (np.arange(1, n_sc + 1) - (n_sc + 1) / 2.0) * subcarrier_spacing
    # periodic sinc: sum of K complex exponentials spaced 1/duration, centered
    q = np.arange(k) - (k // 2)
    for i in range(n_sc):
        carrier = np.exp(2j * np.pi * freqs[i] * t)
        for kk in range(k):
            tau = t - kk * symbol_time
            pulse = np.mean(np.exp(2j * np.pi * np.outer(q / duration, tau)), axis=0)
            out += symbols[:, i, kk][:, np.newaxis] * (pulse * carrier)[np.newaxis, :]
    return out
