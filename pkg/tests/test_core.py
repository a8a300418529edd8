import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from scmair.core import (
    DcfSpec,
    LinkSpec,
    RunSeed,
    SampledField,
    SymbolGrid,
    db_per_km_to_inv_m,
    dbm_to_watts,
    power_profile,
    watts_to_dbm,
)


class TestUnits:
    def test_dbm_reference_points(self):
        assert dbm_to_watts(0.0) == pytest.approx(1e-3)
        assert dbm_to_watts(30.0) == pytest.approx(1.0)
        assert dbm_to_watts(-7.0) == pytest.approx(1.9952623e-4, rel=1e-6)

    @given(st.floats(min_value=-60, max_value=60))
    def test_dbm_round_trip(self, p_dbm):
        assert watts_to_dbm(dbm_to_watts(p_dbm)) == pytest.approx(p_dbm, abs=1e-9)

    def test_attenuation_conversion(self):
        # 0.2 dB/km corresponds to ~4.605e-5 1/m power attenuation
        alpha = db_per_km_to_inv_m(0.2)
        assert alpha == pytest.approx(0.2 * math.log(10) / 10 * 1e-3)
        # one span of 100 km at 0.2 dB/km loses exactly 20 dB
        assert math.exp(-alpha * 100e3) == pytest.approx(10 ** (-2.0))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            dbm_to_watts(float("nan"))
        with pytest.raises(ValueError):
            watts_to_dbm(0.0)


class TestLinkSpec:
    def test_derived_quantities(self):
        link = LinkSpec("ida", span_length_km=100.0, span_count=10)
        assert link.total_length_km == 1000.0
        assert link.beta2_s2_m == pytest.approx(-21.7e-27)
        assert link.gamma_w_m == pytest.approx(1.27e-3)
        # photon energy at the default center frequency
        assert link.photon_energy_j == pytest.approx(6.62607015e-34 * 193.41e12)

    def test_rejects_bad_schemes(self):
        with pytest.raises(ValueError):
            LinkSpec("edfa", 100.0, 10)
        with pytest.raises(ValueError):
            LinkSpec("ida", -1.0, 10)
        with pytest.raises(ValueError):
            LinkSpec("ida", 100.0, 0)

    def test_dcf_requires_lumped_amplification(self):
        dcf = DcfSpec(length_km=60.0 * 21.7 / 127.5)
        with pytest.raises(ValueError):
            LinkSpec("ida", 60.0, 10, dcf=dcf)

    def test_dcf_must_cancel_dispersion(self):
        with pytest.raises(ValueError, match="cancel"):
            LinkSpec("la", 60.0, 10, dcf=DcfSpec(length_km=10.0))

    def test_with_dcf_matched(self):
        link = LinkSpec("la", 60.0, 10).with_dcf_matched()
        residual = (link.beta2_ps2_km * link.span_length_km
                    + link.dcf.beta2_ps2_km * link.dcf.length_km)
        assert residual == pytest.approx(0.0, abs=1e-12)
        assert link.dcf.length_km == pytest.approx(60.0 * 21.7 / 127.5)


class TestPowerProfile:
    def test_ida_flat(self):
        link = LinkSpec("ida", 100.0, 10)
        for z in (0.0, 37.5, 500.0, 1000.0):
            assert power_profile(link, z) == 1.0

    def test_la_sawtooth(self):
        link = LinkSpec("la", 100.0, 10)
        assert power_profile(link, 0.0) == 1.0
        assert power_profile(link, 100.0) == 1.0  # amplifier output
        assert power_profile(link, 50.0) == pytest.approx(10 ** (-0.2 * 50 / 10))
        # just before the amplifier: 20 dB down
        assert power_profile(link, 99.999999) == pytest.approx(1e-2, rel=1e-4)

    def test_la_periodicity(self):
        link = LinkSpec("la", 80.0, 5)
        for z in (10.0, 45.0, 79.0):
            assert power_profile(link, z) == pytest.approx(power_profile(link, z + 160.0))

    def test_dm_dcf_launch_offset(self):
        link = LinkSpec("la", 60.0, 10).with_dcf_matched()
        # entering the DCF: 4 dB below full launch power
        p = power_profile(link, 60.0 + 1e-9)
        assert p == pytest.approx(10 ** (-0.4), rel=1e-6)

    def test_outside_link_raises(self):
        link = LinkSpec("ida", 100.0, 2)
        with pytest.raises(ValueError):
            power_profile(link, 201.0)


class TestSampledField:
    def test_shape_normalization_and_immutability(self, rng):
        u = rng.normal(size=64) + 1j * rng.normal(size=64)
        f = SampledField(u, 100e9, bandwidth=50e9)
        assert f.samples.shape == (1, 64)
        assert f.pol_count == 1
        with pytest.raises(ValueError):
            f.samples[0, 0] = 0.0

    def test_rejects_undersampling(self, rng):
        u = rng.normal(size=(2, 32)) + 0j
        with pytest.raises(ValueError):
            SampledField(u, 40e9, bandwidth=50e9)

    def test_duration_and_power(self, rng):
        u = np.full((2, 1000), 3.0 + 4.0j)
        f = SampledField(u, 1e9, bandwidth=1e8)
        assert f.duration == pytest.approx(1e-6)
        assert np.allclose(f.power_per_pol(), 25.0)


class TestSymbolGrid:
    def test_orthogonality_bound(self, rng):
        s = rng.normal(size=(1, 2, 8)) + 0j
        SymbolGrid(s, subcarrier_spacing=1e9, symbol_time=1e-9)  # F*T = 1 ok
        with pytest.raises(ValueError):
            SymbolGrid(s, subcarrier_spacing=1.1e9, symbol_time=1e-9)

    def test_shape_validation(self, rng):
        with pytest.raises(ValueError):
            SymbolGrid(np.zeros((3, 2, 8), dtype=complex), 1e9, 1e-9)


class TestRunSeed:
    def test_streams_reproducible(self):
        a = RunSeed(7).generator("symbols").normal(size=8)
        b = RunSeed(7).generator("symbols").normal(size=8)
        assert np.array_equal(a, b)

    def test_streams_independent(self):
        a = RunSeed(7).generator("symbols").normal(size=8)
        b = RunSeed(7).generator("ase").normal(size=8)
        assert not np.allclose(a, b)

    def test_order_independence(self):
        s = RunSeed(7)
        first = s.generator("x").normal(size=4)
        s.generator("y").normal(size=100)  # interleaved use of another stream
        again = RunSeed(7).generator("x").normal(size=4)
        assert np.array_equal(first, again)

    def test_child_seeds_distinct_and_deterministic(self):
        s = RunSeed(3)
        c1 = s.child("point-a")
        c2 = s.child("point-b")
        assert c1.master != c2.master
        assert c1.master == RunSeed(3).child("point-a").master
        assert c1.master != RunSeed(4).child("point-a").master
