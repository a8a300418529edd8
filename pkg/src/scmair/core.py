"""Shared domain types, unit conversions, constants, and the seeded-RNG contract."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

# Physical constants
H_PLANCK = 6.62607015e-34  # J*s
DEFAULT_CENTER_FREQUENCY_HZ = 193.41e12  # 1550 nm C-band convention

LN10_OVER_10 = np.log(10.0) / 10.0


def dbm_to_watts(p_dbm: float) -> float:
    """Convert a power level in dBm to watts."""
    if not np.isfinite(p_dbm):
        raise ValueError(f"power must be finite, got {p_dbm} dBm")
    return 10.0 ** (p_dbm / 10.0) * 1e-3


def watts_to_dbm(p_w: float) -> float:
    """Convert a power in watts to dBm."""
    if p_w <= 0:
        raise ValueError(f"power must be positive, got {p_w} W")
    return 10.0 * np.log10(p_w * 1e3)


def db_per_km_to_inv_m(alpha_db_km: float) -> float:
    """Field-power attenuation coefficient: dB/km -> 1/m."""
    return alpha_db_km * LN10_OVER_10 * 1e-3


@dataclass(frozen=True)
class DcfSpec:
    """Per-span dispersion-compensating fiber inserted after each transmission span."""

    length_km: float
    attenuation_db_km: float = 0.57
    beta2_ps2_km: float = 127.5
    gamma_w_km: float = 6.5
    launch_offset_db: float = 4.0  # DCF launch power below transmission fiber
    amp_eta: float = 1.6


@dataclass(frozen=True)
class LinkSpec:
    """Span layout, power profile, and fiber/amplifier parameters of the link."""

    amplification: str  # "ida" | "la"
    span_length_km: float
    span_count: int
    attenuation_db_km: float = 0.2
    beta2_ps2_km: float = -21.7
    gamma_w_km: float = 1.27
    eta: float = 1.0
    dcf: Optional[DcfSpec] = None
    center_frequency_hz: float = DEFAULT_CENTER_FREQUENCY_HZ

    def __post_init__(self):
        if self.amplification not in ("ida", "la"):
            raise ValueError(f"unknown amplification scheme {self.amplification!r}")
        if self.span_length_km <= 0:
            raise ValueError("span_length_km must be > 0")
        if self.span_count < 1:
            raise ValueError("span_count must be >= 1")
        if self.dcf is not None:
            if self.amplification != "la":
                raise ValueError("dispersion management requires lumped amplification")
            residual = (
                self.beta2_ps2_km * self.span_length_km
                + self.dcf.beta2_ps2_km * self.dcf.length_km
            )
            scale = abs(self.beta2_ps2_km * self.span_length_km)
            if abs(residual) > 1e-9 * scale:
                raise ValueError(
                    "DCF must cancel span dispersion exactly; residual "
                    f"{residual:g} ps^2 per span"
                )

    @property
    def total_length_km(self) -> float:
        return self.span_length_km * self.span_count

    @property
    def alpha_inv_m(self) -> float:
        return db_per_km_to_inv_m(self.attenuation_db_km)

    @property
    def beta2_s2_m(self) -> float:
        return self.beta2_ps2_km * 1e-27

    @property
    def gamma_w_m(self) -> float:
        return self.gamma_w_km * 1e-3

    @property
    def photon_energy_j(self) -> float:
        return H_PLANCK * self.center_frequency_hz

    def with_dcf_matched(self, **dcf_kwargs) -> "LinkSpec":
        """Attach a DCF whose length exactly cancels the span dispersion."""
        beta2_dcf = dcf_kwargs.pop("beta2_ps2_km", DcfSpec.beta2_ps2_km)
        length = -self.beta2_ps2_km * self.span_length_km / beta2_dcf
        dcf = DcfSpec(length_km=length, beta2_ps2_km=beta2_dcf, **dcf_kwargs)
        return replace(self, dcf=dcf)


def power_profile(link: LinkSpec, z_km: float) -> float:
    """Normalized power profile a(z) at position z along the link, in km.

    IDA keeps a(z) = 1 everywhere; LA decays as exp(-alpha (z mod L_s)) within
    each span, restored to 1 at every amplifier output (right-continuous).
    DM links additionally cover the per-span DCF segment with its own
    attenuation and launch offset.
    """
    dcf_len = link.dcf.length_km if link.dcf is not None else 0.0
    period = link.span_length_km + dcf_len
    if z_km < 0 or z_km > period * link.span_count + 1e-9:
        raise ValueError(f"z = {z_km} km outside the link")
    if link.amplification == "ida":
        return 1.0
    zs = z_km % period
    if z_km > 0 and zs == 0.0:
        zs = 0.0  # amplifier output of the previous span
    if zs < link.span_length_km or link.dcf is None:
        return float(np.exp(-link.attenuation_db_km * LN10_OVER_10 * zs))
    zd = zs - link.span_length_km
    offset = 10.0 ** (-link.dcf.launch_offset_db / 10.0)
    return float(offset * np.exp(-link.dcf.attenuation_db_km * LN10_OVER_10 * zd))


@dataclass(frozen=True)
class SampledField:
    """Complex baseband waveform on a uniform, cyclic time grid.

    ``samples`` has shape (pol_count, n); the grid is one period of a cyclic
    signal, so all spectral manipulation is FFT-exact.  ``bandwidth`` is the
    declared occupied bandwidth of the content and must fit inside the
    simulation rate.
    """

    samples: np.ndarray
    sample_rate: float
    bandwidth: float
    center_freq_offset: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        if s.ndim == 1:
            s = s[np.newaxis, :]
        if s.ndim != 2 or s.shape[0] not in (1, 2) or s.shape[1] < 1:
            raise ValueError(f"samples must be (pol, n) with pol in {{1,2}}, got {s.shape}")
        if self.sample_rate <= self.bandwidth:
            raise ValueError(
                f"sample_rate {self.sample_rate:g} Hz must exceed the occupied "
                f"bandwidth {self.bandwidth:g} Hz"
            )
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def pol_count(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    def power_per_pol(self) -> np.ndarray:
        """Mean power of each polarization component, in W."""
        return np.mean(np.abs(self.samples) ** 2, axis=1)

    def with_samples(self, samples: np.ndarray) -> "SampledField":
        return replace(self, samples=samples)


@dataclass(frozen=True)
class SymbolGrid:
    """N x K x pol complex symbols on an orthogonal subcarrier/symbol grid."""

    symbols: np.ndarray  # shape (pol, N, K)
    subcarrier_spacing: float  # F, Hz
    symbol_time: float  # T, s

    def __post_init__(self):
        s = np.asarray(self.symbols, dtype=np.complex128)
        if s.ndim != 3 or s.shape[0] not in (1, 2) or s.shape[1] < 1 or s.shape[2] < 1:
            raise ValueError(f"symbols must be (pol, N, K), got {s.shape}")
        ft = self.subcarrier_spacing * self.symbol_time
        if ft > 1.0 + 1e-12:
            raise ValueError(f"F*T = {ft:g} violates the orthogonality bound F*T <= 1")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "symbols", s)

    @property
    def pol_count(self) -> int:
        return self.symbols.shape[0]

    @property
    def n_subcarriers(self) -> int:
        return self.symbols.shape[1]

    @property
    def n_symbols(self) -> int:
        return self.symbols.shape[2]


def _label_entropy(label: str) -> int:
    return int.from_bytes(hashlib.sha256(label.encode()).digest()[:8], "little")


@dataclass(frozen=True)
class RunSeed:
    """Master seed with derived, order-independent named streams.

    Streams use the counter-based Philox generator, so every (seed, label)
    pair yields an identical sequence regardless of execution order.
    """

    master: int
    labels: tuple = ("symbols", "ase", "particles", "estimation")

    def generator(self, label: str) -> np.random.Generator:
        ss = np.random.SeedSequence([self.master & 0xFFFFFFFFFFFFFFFF, _label_entropy(label)])
        return np.random.Generator(np.random.Philox(ss))

    def child(self, label: str) -> "RunSeed":
        """Derive a new RunSeed for an independent unit of work (e.g. a sweep point)."""
        mixed = _label_entropy(f"{self.master}:{label}")
        return RunSeed(master=mixed)
