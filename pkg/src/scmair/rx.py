"""Receiver front end: brick-wall demultiplexing, single-channel DBP, matched filters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import fft, ifft

from .core import LinkSpec, SampledField, SymbolGrid
from .fiber import ASE_OFF, SsfmControl, ssfm_propagate


@dataclass(frozen=True)
class DemuxSpec:
    """Brick-wall channel selector: index m picks the band centered at m*W."""

    channel_index: int
    bandwidth: float  # Hz
    channel_spacing: float  # W, Hz

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be > 0")
        if self.bandwidth > self.channel_spacing + 1e-6:
            raise ValueError("demux bandwidth must not exceed the channel spacing")

    @property
    def center_offset(self) -> float:
        return self.channel_index * self.channel_spacing


def demux(field: SampledField, spec: DemuxSpec, decimate: bool = True) -> SampledField:
    """Select one WDM channel with an ideal rectangular filter at zero offset.

    With ``decimate`` the output grid is reduced to twice the selected band
    (the smallest cyclic grid with integer bandwidth*duration bins).
    """
    dur = field.duration
    n = field.n_samples
    half = spec.bandwidth / 2.0
    if abs(spec.center_offset) + half > field.sample_rate / 2.0:
        raise ValueError("demux band exceeds the sampled spectrum")
    n_keep = int(round(spec.bandwidth * dur))
    off_bins = spec.center_offset * dur
    if abs(off_bins - round(off_bins)) > 1e-6:
        raise ValueError("channel offset is not commensurate with the cyclic grid")
    off_bins = int(round(off_bins))

    n_out = 2 * n_keep if decimate else n
    if n_out > n:
        n_out = n
    spec_full = fft(field.samples, axis=-1)
    out_spec = np.zeros((field.pol_count, n_out), dtype=np.complex128)
    # signed bin range [-n_keep/2, n_keep/2) around the channel center
    j = np.arange(-(n_keep // 2), -(n_keep // 2) + n_keep)
    out_spec[:, j % n_out] = spec_full[:, (j + off_bins) % n]
    samples = ifft(out_spec, axis=-1) * (n_out / n)
    return SampledField(samples, n_out / dur, bandwidth=spec.bandwidth)


def dbp(field: SampledField, link: LinkSpec, ctrl: SsfmControl,
        ref_power_w=None) -> SampledField:
    """Digital backpropagation: reversed link, negated beta2/gamma, no noise."""
    return ssfm_propagate(field, link, ctrl, ASE_OFF, reverse=True,
                          ref_power_w=ref_power_w)


def matched_filter_bank(field: SampledField, n_subcarriers: int,
                        symbol_time: float) -> SymbolGrid:
    """Project the backpropagated waveform onto the subcarrier matched filters.

    Equivalent to convolving with p*(-t) exp(-j 2 pi f_n t) and sampling at
    kT, normalized so a clean modulate -> filter round trip is the identity.
    Implemented as brick-wall selection of each subcarrier's K frequency bins
    followed by a K-point inverse FFT.
    """
    dur = field.duration
    k = dur / symbol_time
    if abs(k - round(k)) > 1e-6:
        raise ValueError("field duration is not an integer number of symbol times")
    k = int(round(k))
    n = field.n_samples
    if n_subcarriers * k > n:
        raise ValueError("sampling grid too small for the requested subcarrier bank")
    spec_full = fft(field.samples, axis=-1)
    sc = np.arange(1, n_subcarriers + 1)
    offsets = (sc - (n_subcarriers + 1) / 2.0) * k
    rounded = np.rint(offsets).astype(np.int64)
    if not np.allclose(offsets, rounded):
        raise ValueError("subcarrier centers do not fall on the cyclic frequency grid")
    dft_freqs = np.fft.fftfreq(k, d=1.0 / k).astype(np.int64)
    symbols = np.empty((field.pol_count, n_subcarriers, k), dtype=np.complex128)
    for i, off in enumerate(rounded):
        bins = (off + dft_freqs) % n
        symbols[:, i, :] = ifft(spec_full[:, bins] * (k / n), axis=-1)
    f_spacing = 1.0 / symbol_time
    return SymbolGrid(symbols, f_spacing, symbol_time)
