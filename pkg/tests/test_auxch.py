import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from scmair.auxch import (
    PAULI,
    AwgnParams,
    ParticleSet,
    PnParams,
    PpnParams,
    awgn_loglik,
    cscg_output_logpdf,
    init_particles,
    pn_emission_loglik,
    pn_sample_transition,
    pn_transition_logpdf,
    ppn_emission_loglik,
    ppn_step,
)


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            AwgnParams(a=-1.0, theta=0.0, sigma_n2=1.0)
        with pytest.raises(ValueError):
            PnParams(1.0, 0.0, 1e-4)
        with pytest.raises(ValueError):
            PpnParams(1.0, 1.0, -1e-4, 1e-5)

    def test_ppn_projects_to_pn(self):
        p = PpnParams(0.9, 0.1, 1e-4, 1e-5)
        assert p.pn == PnParams(0.9, 0.1, 1e-4)


class TestDensities:
    def test_awgn_loglik_matches_direct_formula(self, rng):
        x = rng.normal(size=16) + 1j * rng.normal(size=16)
        y = rng.normal(size=16) + 1j * rng.normal(size=16)
        p = AwgnParams(0.8, 0.3, 0.5)
        direct = sum(
            -math.log(math.pi * 0.5)
            - abs(y[i] - 0.8 * np.exp(0.3j) * x[i]) ** 2 / 0.5
            for i in range(16))
        assert awgn_loglik(x, y, p) == pytest.approx(direct)

    def test_cscg_logpdf_normalization(self):
        # numerically integrate the density over the complex plane
        g = np.linspace(-6, 6, 400)
        re, im = np.meshgrid(g, g)
        z = re + 1j * im
        pdf = np.exp([cscg_output_logpdf(np.array([v]), 1.3) for v in z.ravel()])
        total = pdf.sum() * (g[1] - g[0]) ** 2
        assert total == pytest.approx(1.0, abs=1e-3)

    def test_pn_transition_density_normalizes(self):
        s2 = 0.04
        th = np.linspace(-3, 3, 2001)
        pdf = np.exp([pn_transition_logpdf(t, 0.0, s2) for t in th])
        assert np.trapezoid(pdf, th) == pytest.approx(1.0, abs=1e-6)

    def test_pn_emission_consistent_with_awgn(self):
        x, y, th = 1.0 + 0.5j, 0.3 - 0.2j, 0.7
        a, sn2 = 0.9, 0.2
        assert pn_emission_loglik(y, x, th, a, sn2) == pytest.approx(
            awgn_loglik(np.array([x]), np.array([y]), AwgnParams(a, th, sn2)))

    def test_ppn_emission_identity_jones_reduces_to_awgn(self):
        x = np.array([1.0 + 0.2j, -0.3 + 0.4j])
        y = np.array([0.9 + 0.1j, -0.2 + 0.5j])
        got = ppn_emission_loglik(y, x, 0.3, np.eye(2), 0.95, 0.1)
        ref = awgn_loglik(x[:, None].T, y[:, None].T, AwgnParams(0.95, 0.3, 0.1))
        # both factorize over the two components with the common phase
        direct = sum(
            -math.log(math.pi * 0.1)
            - abs(y[i] - 0.95 * np.exp(0.3j) * x[i]) ** 2 / 0.1
            for i in range(2))
        assert got == pytest.approx(direct)
        assert ref == pytest.approx(direct)


class TestTransitions:
    def test_pn_walk_statistics(self, rng):
        th0 = np.zeros(200000)
        th1 = pn_sample_transition(th0, 0.01, rng)
        assert np.var(th1) == pytest.approx(0.01, rel=0.02)
        assert abs(np.mean(th1)) < 1e-3

    def test_pn_zero_variance_is_identity_copy(self, rng):
        th0 = np.arange(5.0)
        th1 = pn_sample_transition(th0, 0.0, rng)
        assert np.array_equal(th0, th1)
        assert th1 is not th0

    @given(st.lists(st.floats(-0.5, 0.5), min_size=3, max_size=3))
    @settings(max_examples=50, deadline=None)
    def test_ppn_step_unitary(self, alpha):
        j1 = ppn_step(np.eye(2, dtype=complex), np.array(alpha))
        err = np.max(np.abs(j1 @ j1.conj().T - np.eye(2)))
        assert err < 1e-12

    def test_ppn_step_matches_matrix_exponential(self, rng):
        alpha = rng.normal(0, 0.3, 3)
        a_mat = sum(alpha[i] * PAULI[i] for i in range(3))
        ref = expm(1j * a_mat)
        got = ppn_step(np.eye(2, dtype=complex), alpha)
        assert np.max(np.abs(got - ref)) < 1e-12

    def test_ppn_step_composes(self, rng):
        a1 = rng.normal(0, 0.1, 3)
        a2 = rng.normal(0, 0.1, 3)
        j1 = ppn_step(np.eye(2, dtype=complex), a1)
        j2 = ppn_step(j1, a2)
        ref = expm(1j * sum(a2[i] * PAULI[i] for i in range(3))) @ j1
        assert np.max(np.abs(j2 - ref)) < 1e-12

    def test_ppn_step_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            ppn_step(2.0 * np.eye(2), np.zeros(3))

    def test_zero_alpha_is_identity(self):
        j = ppn_step(np.eye(2, dtype=complex), np.zeros(3))
        assert np.array_equal(j, np.eye(2))


class TestParticles:
    def test_init_particles_uniform_phase_identity_jones(self, rng):
        ps = init_particles(4096, 2, rng)
        assert ps.count == 4096
        assert np.all((ps.theta >= 0) & (ps.theta < 2 * np.pi))
        # weights start uniform and normalized
        assert np.exp(ps.log_weights).sum() == pytest.approx(1.0)
        assert np.allclose(ps.jones, np.eye(2))

    def test_one_pol_has_no_jones(self, rng):
        assert init_particles(16, 1, rng).jones is None

    def test_non_unitary_jones_rejected(self, rng):
        theta = np.zeros(4)
        logw = np.full(4, -math.log(4))
        bad = np.tile(1.5 * np.eye(2, dtype=complex), (4, 1, 1))
        with pytest.raises(ValueError):
            ParticleSet(theta=theta, log_weights=logw, jones=bad)
