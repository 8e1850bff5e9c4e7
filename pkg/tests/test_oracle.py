import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from gueflow.oracle import (
    N_MAX,
    WeightParams,
    build_basis,
    cache_key,
    cached_coefficients,
    hole_radius,
    kernel_trace,
    load_coefficients,
    log_derivs,
    log_E,
    log_E_from_coefficients,
    oracle_report,
    quadrature_grid,
    report_json,
    save_coefficients,
)
from gueflow.predictor import log_prefactor

SQ2PI = math.sqrt(2 * math.pi)


class TestWeightParams:
    @pytest.mark.parametrize("args", [(0.1, 0.0, 0), (-0.1, 0.0, 3), (0.0, 0.5, 3)])
    def test_rejects(self, args):
        with pytest.raises(ValueError):
            WeightParams(*args)

    def test_log_derivs_needs_z(self):
        with pytest.raises(ValueError):
            log_derivs(WeightParams(0.0, 0.0, 3))


class TestGaussian:
    def test_recurrence(self):
        b = build_basis(WeightParams(0.0, 0.0, 12))
        assert np.max(np.abs(b.alpha)) < 1e-13
        assert b.beta[0] == pytest.approx(SQ2PI, rel=1e-14)
        assert np.allclose(b.beta[1:], np.arange(1, 12), rtol=1e-12)
        ref = np.array([SQ2PI * math.factorial(j) for j in range(12)])
        assert np.allclose(b.h, ref, rtol=1e-12)

    def test_small_N(self):
        assert log_E(WeightParams(0.0, 0.0, 1)) == pytest.approx(math.log(SQ2PI), abs=1e-14)
        mu = [integrate.quad(lambda x, k=k: x**k * math.exp(-x * x / 2), -np.inf, np.inf)[0] for k in range(3)]
        det = mu[0] * mu[2] - mu[1] ** 2
        assert det == pytest.approx(2 * math.pi, rel=1e-12)
        assert log_E(WeightParams(0.0, 0.0, 2)) == pytest.approx(math.log(det), abs=1e-12)

    def test_baseline(self):
        for N in range(1, 21):
            assert abs(log_E(WeightParams(0.0, 0.0, N)) - log_prefactor(N)) < 1e-8

    def test_baseline_to_cap(self):
        for N in (30, 40, N_MAX):
            assert abs(log_E(WeightParams(0.0, 0.0, N)) - log_prefactor(N)) < 1e-8


def _hankel_log_det(z, t, N):
    """log det of the moment matrix, moments by adaptive quadrature; small N only."""

    def w(x):
        return math.exp(-z * z / (2 * x * x) + t / x - x * x / 2) if x != 0 else 0.0

    mu = []
    for k in range(2 * N - 1):
        a = integrate.quad(lambda x: x**k * w(x), -30, 0, points=[-z], limit=400, epsabs=0, epsrel=1e-13)[0]
        b = integrate.quad(lambda x: x**k * w(x), 0, 30, points=[z], limit=400, epsabs=0, epsrel=1e-13)[0]
        mu.append(a + b)
    H = np.array([[mu[i + j] for j in range(N)] for i in range(N)])
    sign, ld = np.linalg.slogdet(H)
    assert sign > 0
    return ld


class TestSingularWeight:
    @pytest.mark.parametrize("z,t,N", [(0.3, 0.0, 3), (0.5, 0.4, 4), (0.2, -0.3, 2)])
    def test_against_moment_determinant(self, z, t, N):
        assert log_E(WeightParams(z, t, N)) == pytest.approx(_hankel_log_det(z, t, N), abs=1e-8)

    def test_evenness_in_t(self):
        a = build_basis(WeightParams(0.2, 0.3, 6))
        b = build_basis(WeightParams(0.2, -0.3, 6))
        assert abs(a.log_h.sum() - b.log_h.sum()) < 1e-10
        assert np.allclose(a.alpha, -b.alpha, atol=1e-13)
        assert np.allclose(a.log_h, b.log_h, atol=1e-12)
        assert np.max(np.abs(a.alpha)) > 1e-3

    @settings(max_examples=20)
    @given(st.floats(0.05, 1.0), st.floats(-1.0, 1.0), st.integers(1, 30))
    def test_positive_norms(self, z, t, N):
        b = build_basis(WeightParams(z, t, N))
        assert np.all(b.beta > 0) and np.all(np.isfinite(b.log_h))

    def test_gram_residual(self):
        p = WeightParams(0.3, 0.2, 10)
        b = build_basis(p)
        x = b.nodes
        pis = [np.ones_like(x), x - b.alpha[0]]
        for j in range(1, p.N - 1):
            pis.append((x - b.alpha[j]) * pis[j] - b.beta[j] * pis[j - 1])
        G = np.array([[np.sum(b.measure * pi * pk) for pk in pis] for pi in pis])
        d = np.sqrt(np.diag(G))
        off = G / np.outer(d, d) - np.eye(p.N)
        assert np.max(np.abs(off)) < 1e-12
        assert np.allclose(np.diag(G), b.h, rtol=1e-12)

    def test_kernel_trace(self):
        for N in (1, 9, 25):
            b = build_basis(WeightParams(math.sqrt(0.5 / N), 0.4 / math.sqrt(N), N))
            assert abs(kernel_trace(b) - N) < 1e-10

    def test_hole_radius(self):
        for z, t in ((0.1, 0.0), (0.2, 0.5), (0.05, -0.3)):
            d0 = hole_radius(z, t)
            lw = WeightParams(z, t, 1).log_weight(np.array([d0, -d0]))
            assert np.max(lw) <= -700 + 1e-9
            assert -700 <= np.max(WeightParams(z, t, 1).log_weight(np.linspace(d0, 1, 4000)))
        assert hole_radius(0.1, 0.0) == pytest.approx(0.1 / math.sqrt(1400))

    def test_grid_shape(self):
        p = WeightParams(0.1, 0.2, 16)
        x, w, d0, L = quadrature_grid(p)
        assert L == pytest.approx(max(8.0, 3 * math.sqrt(32)))
        assert np.array_equal(x, -x[::-1]) and np.array_equal(w, w[::-1])
        assert x.min() >= -L and np.min(np.abs(x)) > d0 and np.all(w > 0)
        assert len(quadrature_grid(p, 1)[0]) == 2 * len(x)


class TestDerivatives:
    def test_zero_t(self):
        assert log_derivs(WeightParams(0.2, 0.0, 7))[0] == 0.0

    @pytest.mark.parametrize("N,z,t", [(9, math.sqrt(0.5 / 9), 0.4 / 3), (4, 0.3, -0.2), (20, 0.15, 0.1)])
    def test_finite_differences(self, N, z, t):
        h = 1e-4
        dt, dz = log_derivs(WeightParams(z, t, N))
        fdt = (log_E(WeightParams(z, t + h, N)) - log_E(WeightParams(z, t - h, N))) / (2 * h)
        fdz = (log_E(WeightParams(z + h, t, N)) - log_E(WeightParams(z - h, t, N))) / (2 * h)
        assert abs(dt - fdt) <= 1e-6 * max(1, abs(fdt))
        assert abs(dz - fdz) <= 1e-6 * max(1, abs(fdz))


class TestReport:
    def test_refinement_stability(self):
        for N in (4, 25, N_MAX):
            r = oracle_report(WeightParams(math.sqrt(0.5 / N), 0.4 / math.sqrt(N), N))
            assert r.est_error < 1e-9
            assert r.refinement_level == 1

    def test_json(self):
        r = oracle_report(WeightParams(0.2, 0.1, 5))
        d = json.loads(report_json(r))
        assert d["N"] == 5 and d["log_E"] == r.log_E and d["dlogE_dz"] == r.dlogE_dz

    def test_no_derivs_at_zero_z(self):
        r = oracle_report(WeightParams(0.0, 0.0, 5))
        assert r.dlogE_dt is None and r.dlogE_dz is None


class TestCache:
    def test_round_trip(self, tmp_path):
        p = WeightParams(0.25, -0.1, 12)
        b = build_basis(p)
        path = tmp_path / "c.txt"
        save_coefficients(path, b)
        a, bb = load_coefficients(path)
        assert np.array_equal(a, b.alpha) and np.array_equal(bb, b.beta)
        assert len(path.read_text().splitlines()) == 12
        assert log_E_from_coefficients(bb) == pytest.approx(log_E(p, b), abs=1e-12)

    def test_cached_coefficients(self, tmp_path):
        p = WeightParams(0.25, -0.1, 6)
        a1, b1 = cached_coefficients(tmp_path, p)
        f = tmp_path / f"{cache_key(p, 0)}.txt"
        assert f.exists()
        f.write_text(f.read_text())  # second call reads the file
        a2, b2 = cached_coefficients(tmp_path, p)
        assert np.array_equal(a1, a2) and np.array_equal(b1, b2)

    def test_key(self):
        assert cache_key(WeightParams(0.1, 0.0, 3), 1) == "N3_z0.10000000000000001_t0_r1"
