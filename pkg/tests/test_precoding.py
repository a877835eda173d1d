import numpy as np
import pytest
from hypothesis import given, strategies as st

from risrank.errors import DegenerateInputError
from risrank.evaluation import capacity
from risrank.precoding import (
    PrecoderSet,
    assemble_covariance,
    eigen_waterfill_covariance,
    mmse_precoder,
    mrt_precoder,
    precoders,
    upa_covariance,
    water_level,
    waterfill,
)

from conftest import crandn


def orthogonal_rows(rng, K, M, norm=2.0):
    Q, _ = np.linalg.qr(crandn(rng, M, M))
    return norm * Q[:K].copy()


def angle(a, b):
    c = abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b))
    return float(np.arccos(min(1.0, c)))


def bisection_waterfill(g, Pt, sigma2):
    g = np.asarray(g, float)
    floors = np.where(g > 0, sigma2 / np.where(g > 0, g, 1), np.inf)
    lo, hi = 0.0, Pt + floors[np.isfinite(floors)].max()
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        if np.sum(np.maximum(mu - floors, 0)) > Pt:
            hi = mu
        else:
            lo = mu
    return np.maximum(0.5 * (lo + hi) - floors, 0)


class TestMrt:
    def test_unit_row(self):
        H = np.array([[1, 0, 0, 0], [0, 1, 1, 0]], dtype=complex)
        np.testing.assert_allclose(mrt_precoder(H, 0), [1, 0, 0, 0])

    def test_conjugation(self):
        H = np.array([[1, 1j]])
        np.testing.assert_allclose(mrt_precoder(H, 0), np.array([1, -1j]) / np.sqrt(2))

    def test_matched_gain(self, rng):
        H = crandn(rng, 3, 4)
        for k in range(3):
            v = mrt_precoder(H, k)
            assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
            z = H[k] @ v
            assert z.real == pytest.approx(np.linalg.norm(H[k]), rel=1e-12)
            assert abs(z.imag) < 1e-12

    def test_zero_row(self):
        with pytest.raises(DegenerateInputError):
            mrt_precoder(np.zeros((2, 3)), 1)


class TestMmse:
    def test_orthogonal_rows_equal_mrt(self, rng):
        H = orthogonal_rows(rng, 3, 4)
        for k in range(3):
            assert angle(mmse_precoder(H, k, 2.0), mrt_precoder(H, k)) < 1e-7

    def test_zero_forcing_limit(self, rng):
        H = crandn(rng, 4, 4)
        assert np.linalg.cond(H) < 100
        Hp = np.linalg.pinv(H)
        for k in range(4):
            assert angle(mmse_precoder(H, k, 1e12), Hp[:, k]) < 1e-4

    def test_single_user_is_mrt(self, rng):
        H = crandn(rng, 1, 5)
        for gamma in (1e-3, 1.0, 1e3):
            assert angle(mmse_precoder(H, 0, gamma), mrt_precoder(H, 0)) < 1e-7

    def test_unit_norm(self, rng):
        H = crandn(rng, 3, 4)
        assert np.linalg.norm(mmse_precoder(H, 1, 3.0)) == pytest.approx(1.0, abs=1e-12)

    def test_continuity(self, rng):
        H = crandn(rng, 3, 4)
        for gamma in (0.1, 1.0, 10.0):
            assert angle(mmse_precoder(H, 0, gamma), mmse_precoder(H, 0, gamma * (1 + 1e-9))) < 1e-6

    def test_bad_gamma(self, rng):
        with pytest.raises(ValueError):
            mmse_precoder(crandn(rng, 2, 2), 0, 0.0)

    def test_zero_power_user_gets_mrt_direction(self, rng):
        H = crandn(rng, 3, 4)
        V = precoders(H, "MMSE-WF", np.array([1.0, 0.0, 2.0]), 1.0)
        np.testing.assert_allclose(V[:, 1], mrt_precoder(H, 1), rtol=0, atol=1e-15)


class TestWaterfill:
    def test_equal_gains(self):
        np.testing.assert_allclose(waterfill([2.0, 2.0, 2.0], 10.0, 1.0), [10 / 3] * 3)

    def test_weak_user_off(self):
        p = waterfill([1.0, 1e9], 0.5, 1.0)
        ref = bisection_waterfill([1.0, 1e9], 0.5, 1.0)
        np.testing.assert_allclose(p, ref, atol=1e-9)
        assert p[0] == 0.0
        assert p[1] == pytest.approx(0.5)

    def test_bisection_oracle(self, rng):
        for _ in range(50):
            g = rng.exponential(size=5) * rng.choice([0.01, 1, 100])
            Pt = rng.uniform(0.1, 20)
            np.testing.assert_allclose(waterfill(g, Pt, 1.0), bisection_waterfill(g, Pt, 1.0), atol=1e-9 * Pt)

    def test_zero_gain_gets_nothing(self):
        p = waterfill([0.0, 1.0, 2.0], 5.0, 1.0)
        assert p[0] == 0.0
        assert p.sum() == pytest.approx(5.0, rel=1e-12)

    def test_all_zero(self):
        with pytest.raises(DegenerateInputError):
            waterfill([0.0, 0.0], 1.0, 1.0)

    @given(
        st.lists(st.floats(1e-4, 1e4), min_size=1, max_size=8),
        st.floats(1e-2, 1e3),
        st.floats(1e-2, 10),
    )
    def test_kkt(self, gains, Pt, sigma2):
        g = np.array(gains)
        p = waterfill(g, Pt, sigma2)
        assert abs(p.sum() - Pt) <= 1e-10 * Pt
        mu = water_level(g, p, sigma2)
        active = p > 0
        assert np.all(np.abs(p[active] + sigma2 / g[active] - mu) <= 1e-10 * max(mu, 1.0))
        assert np.all(mu <= sigma2 / g[~active] * (1 + 1e-12))

    @given(st.lists(st.floats(1e-3, 1e3), min_size=2, max_size=6), st.randoms())
    def test_permutation(self, gains, rnd):
        g = np.array(gains)
        perm = list(range(g.size))
        rnd.shuffle(perm)
        np.testing.assert_allclose(waterfill(g[perm], 7.0, 1.0), waterfill(g, 7.0, 1.0)[perm], rtol=1e-12, atol=1e-14)


class TestCovariance:
    def test_single_user(self):
        e1 = np.eye(3)[:, :1].astype(complex)
        cov = assemble_covariance(PrecoderSet(e1, np.array([10.0]), 1.0))
        np.testing.assert_allclose(cov.Rx, np.diag([10.0, 0, 0]))

    def test_orthonormal_equal_powers(self, rng):
        V = orthogonal_rows(rng, 3, 4, norm=1.0).conj().T
        cov = assemble_covariance(PrecoderSet(V, np.full(3, 2.0), 1.0))
        w = np.sort(np.linalg.eigvalsh(cov.Rx))[::-1]
        np.testing.assert_allclose(w, [2, 2, 2, 0], atol=1e-12)

    def test_trace(self, rng):
        V = crandn(rng, 4, 3)
        V /= np.linalg.norm(V, axis=0)
        p = rng.uniform(0, 5, 3)
        cov = assemble_covariance(PrecoderSet(V, p, 1.0))
        assert cov.trace == pytest.approx(p.sum(), rel=1e-12)
        assert np.linalg.norm(cov.Rx - cov.Rx.conj().T) <= 1e-12 * np.linalg.norm(cov.Rx)
        assert np.linalg.eigvalsh(cov.Rx).min() >= -1e-12 * np.linalg.eigvalsh(cov.Rx).max()

    def test_upa(self, rng):
        cov = upa_covariance(4, 10.0)
        np.testing.assert_allclose(cov.Rx, np.eye(4) * 2.5)
        assert cov.trace == 10.0
        H = crandn(rng, 3, 4)
        lam = np.linalg.eigvalsh(H @ H.conj().T)
        assert capacity(H, cov, 1.0) == pytest.approx(np.sum(np.log2(1 + 2.5 * lam)), rel=1e-12)

    def test_eigen_wf_single_user(self, rng):
        H = crandn(rng, 1, 4)
        cov = eigen_waterfill_covariance(H, 10.0, 1.0)
        np.testing.assert_allclose(cov.Rx, 10.0 * np.outer(H[0].conj(), H[0]) / np.linalg.norm(H) ** 2, atol=1e-12)

    def test_eigen_wf_equal_singular_values(self, rng):
        H = orthogonal_rows(rng, 3, 4)
        w = np.sort(np.linalg.eigvalsh(eigen_waterfill_covariance(H, 9.0, 1.0).Rx))[::-1]
        np.testing.assert_allclose(w, [3, 3, 3, 0], atol=1e-12)

    def test_eigen_wf_beats_upa(self, rng):
        for _ in range(30):
            H = crandn(rng, 3, 4)
            Pt = rng.uniform(0.1, 100)
            wf = eigen_waterfill_covariance(H, Pt, 1.0)
            assert wf.trace == pytest.approx(Pt, rel=1e-10)
            assert capacity(H, wf, 1.0) >= capacity(H, upa_covariance(4, Pt), 1.0) - 1e-12

    def test_eigen_wf_zero_channel(self):
        with pytest.raises(DegenerateInputError):
            eigen_waterfill_covariance(np.zeros((2, 3)), 1.0, 1.0)
