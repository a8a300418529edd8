"""Parity tests: the numba kernels and the pure-numpy fallbacks must agree."""

import math

import numpy as np
import pytest

from scmair import _kernels
from scmair._kernels import (
    _kerr_rotate_nb,
    _kerr_rotate_np,
    _pn_chunk_nb,
    _pn_chunk_np,
    _ppn_chunk_nb,
    _ppn_chunk_np,
    backend_name,
)

needs_numba = pytest.mark.skipif(not _kernels.NUMBA_ENABLED,
                                 reason="numba backend not active")


def test_backend_name_is_consistent():
    assert backend_name() in ("numba", "numpy")
    assert (backend_name() == "numba") == _kernels.NUMBA_ENABLED


class TestKerrRotate:
    def test_numpy_path_closed_form(self, rng):
        u = rng.normal(size=(2, 64)) + 1j * rng.normal(size=(2, 64))
        ref = u * np.exp(-1j * 0.3 * np.sum(np.abs(u) ** 2, axis=0))
        got = u.copy()
        _kerr_rotate_np(got, 0.3)
        assert np.max(np.abs(got - ref)) < 1e-14

    @needs_numba
    def test_backends_agree(self, rng):
        u = rng.normal(size=(2, 257)) + 1j * rng.normal(size=(2, 257))
        a = u.copy()
        b = u.copy()
        _kerr_rotate_np(a, 1.7)
        _kerr_rotate_nb(b, 1.7)
        assert np.max(np.abs(a - b)) < 1e-13 * np.max(np.abs(a))

    def test_preserves_power(self, rng):
        u = rng.normal(size=(1, 128)) + 1j * rng.normal(size=(1, 128))
        before = np.abs(u) ** 2
        _kernels.kerr_rotate(u, 2.1)
        assert np.allclose(np.abs(u) ** 2, before)


def _pn_inputs(rng, k=300, p=64, sigma_theta=0.05):
    x = rng.normal(size=k) + 1j * rng.normal(size=k)
    y = 0.9 * x + 0.2 * (rng.normal(size=k) + 1j * rng.normal(size=k))
    incr = rng.normal(0, sigma_theta, (k, p))
    u_res = rng.uniform(size=k)
    return x, y, incr, u_res


def _pn_state(p=64):
    theta = np.linspace(0, 2 * np.pi, p, endpoint=False)
    logw = np.full(p, -math.log(p))
    return theta, logw


class TestPnChunkParity:
    @needs_numba
    def test_full_trajectory_agreement(self, rng):
        k, p = 300, 64
        x, y, incr, u_res = _pn_inputs(rng, k, p)
        out = {}
        for name, fn in (("np", _pn_chunk_np), ("nb", _pn_chunk_nb)):
            theta, logw = _pn_state(p)
            evid = np.empty(k)
            tm = np.empty(k)
            ess = np.empty(k)
            fn(x, y, incr, u_res, 0.9, 0.08, p / 2.0, theta, logw, evid, tm, ess)
            out[name] = (theta.copy(), logw.copy(), evid, tm, ess)
        for a, b in zip(out["np"], out["nb"]):
            assert np.allclose(a, b, rtol=1e-9, atol=1e-9)

    def test_weights_stay_normalized(self, rng):
        k, p = 100, 32
        x, y, incr, u_res = _pn_inputs(rng, k, p)
        theta, logw = _pn_state(p)
        evid = np.empty(k)
        tm = np.empty(k)
        ess = np.empty(k)
        _pn_chunk_np(x, y, incr, u_res, 0.9, 0.1, p / 2.0, theta, logw,
                     evid, tm, ess)
        assert np.exp(logw).sum() == pytest.approx(1.0, abs=1e-10)
        assert np.all(ess >= 1.0) and np.all(ess <= p + 1e-9)

    def test_known_static_phase_evidence(self):
        # sigma_theta = 0 and a single particle at the true phase: evidence
        # increments equal the AWGN log-likelihood exactly
        k = 50
        rng = np.random.default_rng(0)
        x = rng.normal(size=k) + 1j * rng.normal(size=k)
        true_theta = 0.8
        y = np.exp(1j * true_theta) * x
        theta = np.array([true_theta, true_theta])
        logw = np.full(2, -math.log(2))
        evid = np.empty(k)
        tm = np.empty(k)
        ess = np.empty(k)
        _pn_chunk_np(x, y, np.zeros((k, 2)), np.zeros(k), 1.0, 0.3, 0.0,
                     theta, logw, evid, tm, ess)
        ref = -math.log(math.pi * 0.3)  # zero residual at the true phase
        assert np.allclose(evid, ref)
        assert np.allclose(tm, true_theta)


class TestPpnChunkParity:
    @needs_numba
    def test_full_trajectory_agreement(self, rng):
        k, p = 200, 48
        x = rng.normal(size=(k, 2)) + 1j * rng.normal(size=(k, 2))
        y = 0.95 * x + 0.2 * (rng.normal(size=(k, 2)) + 1j * rng.normal(size=(k, 2)))
        incr = rng.normal(0, 0.03, (k, p))
        alpha = rng.normal(0, 0.01, (k, p, 3))
        u_res = rng.uniform(size=k)
        out = {}
        for name, fn in (("np", _ppn_chunk_np), ("nb", _ppn_chunk_nb)):
            theta = np.linspace(0, 2 * np.pi, p, endpoint=False)
            jones = np.broadcast_to(np.eye(2, dtype=complex), (p, 2, 2)).copy()
            logw = np.full(p, -math.log(p))
            evid = np.empty(k)
            tm = np.empty(k)
            jm = np.empty((k, 2, 2), dtype=complex)
            ess = np.empty(k)
            fn(x, y, incr, alpha, u_res, 0.95, 0.08, p / 2.0, theta, jones,
               logw, evid, tm, jm, ess)
            out[name] = (theta.copy(), jones.copy(), evid, tm, jm, ess)
        for a, b in zip(out["np"], out["nb"]):
            assert np.allclose(a, b, rtol=1e-9, atol=1e-9)

    def test_jones_particles_stay_unitary(self, rng):
        k, p = 150, 32
        x = rng.normal(size=(k, 2)) + 1j * rng.normal(size=(k, 2))
        y = x.copy()
        incr = np.zeros((k, p))
        alpha = rng.normal(0, 0.05, (k, p, 3))
        theta = np.zeros(p)
        jones = np.broadcast_to(np.eye(2, dtype=complex), (p, 2, 2)).copy()
        logw = np.full(p, -math.log(p))
        evid = np.empty(k)
        tm = np.empty(k)
        jm = np.empty((k, 2, 2), dtype=complex)
        ess = np.empty(k)
        _ppn_chunk_np(x, y, incr, alpha, rng.uniform(size=k), 1.0, 0.1,
                      p / 2.0, theta, jones, logw, evid, tm, jm, ess)
        err = np.max(np.abs(np.einsum("pij,pkj->pik", jones, jones.conj())
                            - np.eye(2)))
        assert err < 1e-10
