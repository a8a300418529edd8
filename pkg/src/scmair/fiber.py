"""Split-step Fourier propagation of the NLSE/Manakov equation with ASE noise.

The engine works on the normalized envelope: the deterministic power profile
a(z) multiplies the Kerr term instead of scaling the field, and amplifier
noise is injected in the normalized domain.  Symmetric (Strang) splitting is
used, with adjacent linear half-steps merged; the step plan is a deterministic
function of the link, the control settings, and a quantized peak-power
reference, so that digital backpropagation can reuse the exact same grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.fft import fft, ifft

from ._kernels import kerr_rotate
from .core import LinkSpec, SampledField

LN10_OVER_10 = math.log(10.0) / 10.0


@dataclass(frozen=True)
class SsfmControl:
    """Step-size policy for the symmetric split-step scheme."""

    max_step_km: float = 0.1
    max_nl_phase_rad: float = 1e-3  # cap on gamma * a * max||u||^2 * dz per step
    convergence_tolerance: float = 1e-6

    def __post_init__(self):
        if self.max_step_km <= 0 or self.max_nl_phase_rad <= 0:
            raise ValueError("max_step_km and max_nl_phase_rad must be > 0")


@dataclass(frozen=True)
class AseModel:
    """Amplifier-noise model: distributed (IDA) or lumped (LA) injection."""

    mode: str = "auto"  # "auto" | "distributed" | "lumped" | "off"

    def resolved_mode(self, link: LinkSpec) -> str:
        if self.mode != "auto":
            return self.mode
        return "distributed" if link.amplification == "ida" else "lumped"


ASE_OFF = AseModel(mode="off")


@dataclass(frozen=True)
class _Segment:
    beta2: float  # s^2/m
    gamma: float  # 1/(W m)
    alpha: float  # 1/m
    length_m: float
    entry_power_factor: float  # a(z) at segment entry (launch offset for DCF)
    distributed_noise_psd_per_m: float  # W/Hz per pol per meter, 0 if none
    lumped_noise_psd: float  # W/Hz per pol added after the segment, 0 if none


def _build_segments(link: LinkSpec, ase_mode: str) -> List[_Segment]:
    hv = link.photon_energy_j
    alpha = link.alpha_inv_m
    segs: List[_Segment] = []
    span_m = link.span_length_km * 1e3
    for _ in range(link.span_count):
        if link.amplification == "ida":
            psd_m = link.eta * hv * alpha if ase_mode == "distributed" else 0.0
            segs.append(_Segment(link.beta2_s2_m, link.gamma_w_m, 0.0, span_m,
                                 1.0, psd_m, 0.0))
        elif link.dcf is None:
            gain = math.exp(alpha * span_m)
            lump = link.eta * hv * (gain - 1.0) if ase_mode == "lumped" else 0.0
            segs.append(_Segment(link.beta2_s2_m, link.gamma_w_m, alpha, span_m,
                                 1.0, 0.0, lump))
        else:
            dcf = link.dcf
            off = 10.0 ** (-dcf.launch_offset_db / 10.0)
            a_dcf = dcf.attenuation_db_km * LN10_OVER_10 * 1e-3
            dcf_m = dcf.length_km * 1e3
            # amplifier at the DCF input: restores fiber loss down to the
            # launch offset; its ASE is referred to a(z) = off at its output
            g1 = math.exp(alpha * span_m) * off
            lump1 = dcf.amp_eta * hv * (g1 - 1.0) / off if ase_mode == "lumped" else 0.0
            segs.append(_Segment(link.beta2_s2_m, link.gamma_w_m, alpha, span_m,
                                 1.0, 0.0, lump1))
            # amplifier at the DCF output restores full launch power
            g2 = math.exp(a_dcf * dcf_m) / off
            lump2 = link.eta * hv * (g2 - 1.0) if ase_mode == "lumped" else 0.0
            segs.append(_Segment(dcf.beta2_ps2_km * 1e-27, dcf.gamma_w_km * 1e-3,
                                 a_dcf, dcf_m, off, 0.0, lump2))
    return segs


def _segment_steps(seg: _Segment, ctrl: SsfmControl, ref_power_w: float) -> int:
    dz_cap = ctrl.max_step_km * 1e3
    nl_rate = seg.gamma * seg.entry_power_factor * ref_power_w
    if nl_rate > 0:
        dz_cap = min(dz_cap, ctrl.max_nl_phase_rad / nl_rate)
    return max(1, int(math.ceil(seg.length_m / dz_cap)))


def _quantized_ref_power(field: SampledField) -> float:
    peak = float(np.max(np.sum(np.abs(field.samples) ** 2, axis=0)))
    if peak <= 0:
        return 0.0
    return 2.0 ** math.ceil(math.log2(peak))


def _avg_profile(seg: _Segment, z0: float, dz: float) -> float:
    """Step-averaged a(z) over [z0, z0+dz] within the segment."""
    if seg.alpha == 0.0:
        return seg.entry_power_factor
    a = seg.alpha
    return seg.entry_power_factor * (math.exp(-a * z0) - math.exp(-a * (z0 + dz))) / (a * dz)


def add_ase(field: SampledField, psd_w_hz: float, rng: np.random.Generator) -> SampledField:
    """Add circular complex Gaussian noise of the given per-pol PSD."""
    if psd_w_hz < 0:
        raise ValueError("PSD must be >= 0")
    if psd_w_hz == 0:
        return field
    var = psd_w_hz * field.sample_rate
    shape = field.samples.shape
    scale = math.sqrt(var / 2.0)
    noise = rng.normal(0.0, scale, shape) + 1j * rng.normal(0.0, scale, shape)
    return field.with_samples(field.samples + noise)


def _ase_samples(shape, psd_w_hz: float, sample_rate: float,
                 rng: np.random.Generator) -> np.ndarray:
    scale = math.sqrt(psd_w_hz * sample_rate / 2.0)
    return rng.normal(0.0, scale, shape) + 1j * rng.normal(0.0, scale, shape)


def ssfm_propagate(
    field: SampledField,
    link: LinkSpec,
    ctrl: SsfmControl,
    ase: AseModel = ASE_OFF,
    rng: Optional[np.random.Generator] = None,
    reverse: bool = False,
    ref_power_w: Optional[float] = None,
) -> SampledField:
    """Propagate the normalized envelope through the link.

    ``reverse=True`` runs the link backwards with negated beta2/gamma and the
    spatial profile reversed (the digital-backpropagation configuration);
    noise is never injected in reverse mode.
    """
    mode = ase.resolved_mode(link)
    if mode not in ("off", "distributed", "lumped"):
        raise ValueError(f"unknown ASE mode {ase.mode!r}")
    if mode != "off" and rng is None:
        raise ValueError("ASE injection requires an RNG")
    if reverse:
        mode = "off"

    u = np.array(field.samples, dtype=np.complex128)
    n = u.shape[1]
    fs = field.sample_rate
    omega = 2.0 * np.pi * np.fft.fftfreq(n, d=1.0 / fs)
    omega2 = omega * omega

    if ref_power_w is None:
        ref_power_w = _quantized_ref_power(field)

    segments = _build_segments(link, mode)
    if reverse:
        segments = segments[::-1]

    spec = fft(u, axis=-1)
    acc = 0.0  # accumulated beta2 * length awaiting a single dispersion apply

    def apply_linear():
        nonlocal acc, spec
        if acc != 0.0:
            spec *= np.exp(-0.5j * acc * omega2)[np.newaxis, :]
            acc = 0.0

    for seg in segments:
        beta2 = -seg.beta2 if reverse else seg.beta2
        gamma = -seg.gamma if reverse else seg.gamma
        nsteps = _segment_steps(seg, ctrl, ref_power_w)
        dz = seg.length_m / nsteps
        for i in range(nsteps):
            # position within the forward-oriented segment
            z0 = (seg.length_m - (i + 1) * dz) if reverse else i * dz
            abar = _avg_profile(seg, z0, dz)
            acc += beta2 * 0.5 * dz
            if gamma != 0.0 or seg.distributed_noise_psd_per_m > 0.0:
                apply_linear()
                u = ifft(spec, axis=-1)
                if gamma != 0.0:
                    kerr_rotate(u, gamma * abar * dz)
                if seg.distributed_noise_psd_per_m > 0.0:
                    u += _ase_samples(u.shape, seg.distributed_noise_psd_per_m * dz, fs, rng)
                spec = fft(u, axis=-1)
            acc += beta2 * 0.5 * dz
        if seg.lumped_noise_psd > 0.0:
            apply_linear()
            u = ifft(spec, axis=-1)
            u += _ase_samples(u.shape, seg.lumped_noise_psd, fs, rng)
            spec = fft(u, axis=-1)

    apply_linear()
    u = ifft(spec, axis=-1)
    if not np.all(np.isfinite(u)):
        raise FloatingPointError("SSFM produced non-finite samples (step blow-up)")
    return field.with_samples(u)


@dataclass(frozen=True)
class ConvergenceReport:
    deviation: float
    tolerance: float
    passed: bool
    steps_coarse: SsfmControl
    steps_fine: SsfmControl


def convergence_self_check(field: SampledField, link: LinkSpec,
                           ctrl: SsfmControl) -> ConvergenceReport:
    """Re-propagate with halved step controls and report the relative L2 deviation."""
    fine = SsfmControl(
        max_step_km=ctrl.max_step_km / 2.0,
        max_nl_phase_rad=ctrl.max_nl_phase_rad / 2.0,
        convergence_tolerance=ctrl.convergence_tolerance,
    )
    out_c = ssfm_propagate(field, link, ctrl)
    out_f = ssfm_propagate(field, link, fine)
    num = np.linalg.norm(out_c.samples - out_f.samples)
    den = np.linalg.norm(out_f.samples)
    dev = float(num / den) if den > 0 else 0.0
    return ConvergenceReport(dev, ctrl.convergence_tolerance,
                             dev < ctrl.convergence_tolerance, ctrl, fine)
