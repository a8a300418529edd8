"""Transmitter: CSCG symbol grids, subcarrier-multiplexed waveforms, WDM aggregation.

All synthesis is done in the frequency domain on the cyclic K-symbol block,
which realizes sinc pulses (rectangular per-subcarrier spectra) exactly and
makes the matched-filter round trip an identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import fft, ifft

from .core import SampledField, SymbolGrid


@dataclass(frozen=True)
class TxConfig:
    """WDM transmitter configuration.

    ``launch_power_w`` is the mean power per polarization of each WDM channel;
    the aggregate sample rate is oversampling * channel_count * channel_spacing.
    """

    channel_count: int
    channel_spacing: float  # W, Hz
    subcarriers: int  # N
    symbols_per_subcarrier: int  # K
    launch_power_w: float
    pol_count: int = 1
    oversampling: int = 2

    def __post_init__(self):
        if self.channel_count < 1 or self.channel_count % 2 == 0:
            raise ValueError("channel_count must be odd and >= 1")
        if self.subcarriers < 1 or self.symbols_per_subcarrier < 1:
            raise ValueError("subcarriers and symbols_per_subcarrier must be >= 1")
        if self.subcarriers % 2 == 0 and self.symbols_per_subcarrier % 2 != 0:
            # f_n * K * T must be an integer for the cyclic frequency grid
            raise ValueError("even subcarrier counts require an even symbol count")
        if self.launch_power_w <= 0:
            raise ValueError("launch_power_w must be > 0")
        if self.oversampling < 2:
            raise ValueError("oversampling must be >= 2 (Nyquist for the aggregate)")

    @property
    def subcarrier_spacing(self) -> float:
        """F = W/N; this artifact fixes F*T = 1 (no guard bands)."""
        return self.channel_spacing / self.subcarriers

    @property
    def symbol_time(self) -> float:
        return 1.0 / self.subcarrier_spacing

    @property
    def sample_rate(self) -> float:
        return self.oversampling * self.channel_count * self.channel_spacing

    @property
    def symbol_variance_w(self) -> float:
        """Per-symbol variance sigma_x^2 giving the configured per-pol launch power."""
        return self.launch_power_w / self.subcarriers


def draw_cscg_symbols(
    n_symbols: int,
    n_subcarriers: int,
    pol_count: int,
    symbol_variance: float,
    rng: np.random.Generator,
    subcarrier_spacing: float = 1.0,
    symbol_time: float = 1.0,
) -> SymbolGrid:
    """Draw i.i.d. circularly-symmetric complex Gaussian symbols.

    Each entry has total variance ``symbol_variance`` per polarization
    component, independent across subcarriers, symbols, and polarizations.
    """
    if symbol_variance <= 0:
        raise ValueError("symbol_variance must be > 0")
    shape = (pol_count, n_subcarriers, n_symbols)
    scale = np.sqrt(symbol_variance / 2.0)
    sym = rng.normal(0.0, scale, shape) + 1j * rng.normal(0.0, scale, shape)
    return SymbolGrid(sym, subcarrier_spacing, symbol_time)


def _subcarrier_bin_offsets(n_subcarriers: int, n_symbols: int) -> np.ndarray:
    """Frequency-bin offset of each subcarrier center on the K*T cyclic grid.

    f_n = [n - (N+1)/2] F maps to f_n * K * T = (n - (N+1)/2) K bins, which is
    an integer for odd N, and for even N whenever K is even.
    """
    n = np.arange(1, n_subcarriers + 1)
    offsets = (n - (n_subcarriers + 1) / 2.0) * n_symbols
    rounded = np.rint(offsets).astype(np.int64)
    if not np.allclose(offsets, rounded):
        raise ValueError("subcarrier centers do not fall on the cyclic frequency grid")
    return rounded


def scm_modulate(grid: SymbolGrid, cfg: TxConfig) -> SampledField:
    """Build the subcarrier-multiplexed waveform of one WDM channel at baseband.

    The waveform equals sum_n sum_k x_{n,k} p(t - kT) exp(j 2 pi f_n t) on the
    cyclic grid, with p(t) = sinc(t/T) realized as a width-F rectangular
    spectrum per subcarrier.
    """
    if grid.n_subcarriers != cfg.subcarriers or grid.n_symbols != cfg.symbols_per_subcarrier:
        raise ValueError("symbol grid dimensions do not match the transmitter config")
    if grid.pol_count != cfg.pol_count:
        raise ValueError("polarization count mismatch")
    n_sc, k = cfg.subcarriers, cfg.symbols_per_subcarrier
    duration = k * cfg.symbol_time
    n_tot = int(round(cfg.sample_rate * duration))
    spectrum = np.zeros((grid.pol_count, n_tot), dtype=np.complex128)
    offsets = _subcarrier_bin_offsets(n_sc, k)
    dft_freqs = np.fft.fftfreq(k, d=1.0 / k).astype(np.int64)  # DFT bin -> signed bin
    for i, off in enumerate(offsets):
        bins = (off + dft_freqs) % n_tot
        spectrum[:, bins] += fft(grid.symbols[:, i, :], axis=-1)
    samples = ifft(spectrum, axis=-1) * (n_tot / k)
    return SampledField(samples, cfg.sample_rate, bandwidth=n_sc * cfg.subcarrier_spacing)


def wdm_multiplex(channels: list, channel_spacing: float) -> SampledField:
    """Sum per-channel waveforms shifted to offsets m*W, m = -M..M (COI at 0)."""
    count = len(channels)
    if count % 2 == 0:
        raise ValueError("channel count must be odd (a central COI is required)")
    ref = channels[0]
    for ch in channels[1:]:
        if ch.sample_rate != ref.sample_rate or ch.n_samples != ref.n_samples:
            raise ValueError("all channels must share the same sampling grid")
        if ch.pol_count != ref.pol_count:
            raise ValueError("all channels must share the polarization count")
    m_max = count // 2
    occupied = (count - 1) * channel_spacing + ref.bandwidth
    if occupied >= ref.sample_rate:
        raise ValueError(
            f"aggregate band {occupied:g} Hz does not fit inside sample_rate "
            f"{ref.sample_rate:g} Hz"
        )
    n_tot = ref.n_samples
    shift_bins = channel_spacing * ref.duration
    if abs(shift_bins - round(shift_bins)) > 1e-6:
        raise ValueError("channel spacing is not commensurate with the cyclic grid")
    shift_bins = int(round(shift_bins))
    total = np.zeros((ref.pol_count, n_tot), dtype=np.complex128)
    for m, ch in zip(range(-m_max, m_max + 1), channels):
        if m == 0:
            total += ch.samples
        else:
            total += ifft(np.roll(fft(ch.samples, axis=-1), m * shift_bins, axis=-1), axis=-1)
    return SampledField(total, ref.sample_rate, bandwidth=occupied)
