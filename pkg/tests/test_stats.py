import numpy as np
import pytest

from lincfg.errors import DataError, FormatError
from lincfg.stats import (DataMatrix, GaussianStats, estimate_gaussian_stats,
                          load_data_csv, load_data_matrix, load_stats,
                          pool_stats, save_data_matrix, save_stats,
                          spectral_from_covariance, stats_to_bytes)


def toy_cov():
    s = 1.0 / np.sqrt(2.0)
    U = np.array([[s, s], [s, -s]])
    return (U * np.array([10.0, 3.0])) @ U.T, U


class TestDataMatrix:
    def test_shape_properties(self):
        dm = DataMatrix(np.ones((4, 3)))
        assert (dm.n, dm.d) == (4, 3)

    def test_rejects_empty(self):
        with pytest.raises((DataError, Exception)):
            DataMatrix(np.empty((0, 2)))

    def test_rejects_nonfinite(self):
        bad = np.ones((3, 2))
        bad[1, 1] = np.nan
        with pytest.raises(DataError):
            DataMatrix(bad)

    def test_values_read_only(self):
        dm = DataMatrix(np.ones((2, 2)))
        with pytest.raises(ValueError):
            dm.values[0, 0] = 7.0


class TestEstimate:
    def test_zero_variance_repeated_point(self):
        p = np.array([1.5, -2.0, 0.25])
        stats = estimate_gaussian_stats(DataMatrix(np.tile(p, (7, 1))))
        np.testing.assert_allclose(stats.mean, p)
        np.testing.assert_allclose(stats.eigvals, 0.0, atol=1e-14)

    def test_single_point_well_defined(self):
        stats = estimate_gaussian_stats(DataMatrix(np.array([[2.0, 3.0]])))
        np.testing.assert_allclose(stats.mean, [2.0, 3.0])
        np.testing.assert_allclose(stats.eigvals, 0.0)

    def test_two_point_hand_computation(self):
        # {(1,0), (-1,0)}: mu = 0, population cov = diag(1, 0)
        stats = estimate_gaussian_stats(DataMatrix(np.array([[1.0, 0.0], [-1.0, 0.0]])))
        np.testing.assert_allclose(stats.mean, 0.0, atol=1e-15)
        np.testing.assert_allclose(stats.eigvals, [1.0, 0.0], atol=1e-15)
        assert abs(abs(stats.eigvecs[0, 0]) - 1.0) < 1e-12

    def test_population_normalization(self):
        # 1/n, not 1/(n-1): two points at +-1 give variance exactly 1
        x = np.array([[1.0], [-1.0]])
        stats = estimate_gaussian_stats(DataMatrix(x))
        assert stats.eigvals[0] == pytest.approx(1.0, abs=1e-15)

    def test_toy_monte_carlo_recovery(self):
        cov, U = toy_cov()
        rng = np.random.default_rng(42)
        draws = rng.multivariate_normal(np.zeros(2), cov, size=10_000)
        stats = estimate_gaussian_stats(DataMatrix(draws))
        np.testing.assert_allclose(stats.eigvals, [10.0, 3.0], rtol=0.10)
        for i in range(2):
            cosang = abs(stats.eigvecs[:, i] @ U[:, i])
            assert np.degrees(np.arccos(min(cosang, 1.0))) < 5.0

    def test_reconstruction_matches_direct_covariance(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            n, d = int(rng.integers(2, 40)), int(rng.integers(1, 8))
            x = rng.standard_normal((n, d)) * rng.uniform(0.1, 5.0)
            stats = estimate_gaussian_stats(DataMatrix(x))
            mu = x.mean(axis=0)
            direct = (x - mu).T @ (x - mu) / n
            tol = 1e-8 * max(1.0, float(np.max(np.abs(direct))))
            np.testing.assert_allclose(stats.covariance(), direct, atol=tol)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((50, 4))
        a = estimate_gaussian_stats(DataMatrix(x))
        b = estimate_gaussian_stats(DataMatrix(x[rng.permutation(50)]))
        np.testing.assert_allclose(a.mean, b.mean, atol=1e-12)
        np.testing.assert_allclose(a.eigvals, b.eigvals, atol=1e-12)
        np.testing.assert_allclose(a.eigvecs, b.eigvecs, atol=1e-8)

    def test_rank_property(self):
        rng = np.random.default_rng(3)
        d, k = 6, 3
        basis = np.linalg.qr(rng.standard_normal((d, k)))[0]
        offset = rng.standard_normal(d)
        x = offset + rng.standard_normal((200, k)) @ basis.T
        stats = estimate_gaussian_stats(DataMatrix(x))
        thresh = 1e-8 * stats.eigvals[0]
        assert int(np.sum(stats.eigvals > thresh)) == k

    def test_sign_convention(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((100, 3))
        stats = estimate_gaussian_stats(DataMatrix(x))
        for col in stats.eigvecs.T:
            assert col[np.argmax(np.abs(col))] > 0


class TestGaussianStatsInvariants:
    def test_rejects_non_orthonormal(self):
        with pytest.raises(DataError):
            GaussianStats(mean=np.zeros(2), eigvecs=np.ones((2, 2)),
                          eigvals=np.array([1.0, 0.5]))

    def test_rejects_ascending_eigvals(self):
        with pytest.raises(DataError):
            GaussianStats(mean=np.zeros(2), eigvecs=np.eye(2),
                          eigvals=np.array([0.5, 1.0]))

    def test_rejects_negative_eigvals(self):
        with pytest.raises(DataError):
            GaussianStats(mean=np.zeros(2), eigvecs=np.eye(2),
                          eigvals=np.array([1.0, -0.1]))

    def test_spectral_from_covariance_clamps_roundoff(self):
        # slightly indefinite matrix from round-off must clamp, not raise
        cov = np.array([[1.0, 1.0], [1.0, 1.0 - 1e-15]])
        stats = spectral_from_covariance(np.zeros(2), cov)
        assert np.all(stats.eigvals >= 0)


class TestStatsFileFormat:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((30, 4))
        stats = estimate_gaussian_stats(DataMatrix(x))
        path = tmp_path / "a.stats"
        save_stats(stats, path)
        loaded = load_stats(path)
        assert loaded.mean.tobytes() == stats.mean.tobytes()
        assert loaded.eigvals.tobytes() == stats.eigvals.tobytes()
        assert loaded.eigvecs.tobytes() == stats.eigvecs.tobytes()
        save_stats(loaded, tmp_path / "b.stats")
        assert (tmp_path / "a.stats").read_bytes() == (tmp_path / "b.stats").read_bytes()

    def test_byte_layout_d2(self, tmp_path):
        stats = estimate_gaussian_stats(DataMatrix(np.eye(2)))
        raw = stats_to_bytes(stats)
        # magic(5) + version(1) + u32 d(4) + (2 + 2 + 4) float64
        assert len(raw) == 5 + 1 + 4 + 8 * (2 + 2 + 4)
        assert raw[:5] == b"LCFG1"
        assert raw[5] == 1

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "bad.stats"
        path.write_bytes(b"XXXXX" + bytes(69))
        with pytest.raises(FormatError, match="magic"):
            load_stats(path)

    def test_truncated_names_offset(self, tmp_path):
        stats = estimate_gaussian_stats(DataMatrix(np.eye(2)))
        raw = stats_to_bytes(stats)
        path = tmp_path / "trunc.stats"
        path.write_bytes(raw[:20])
        with pytest.raises(FormatError, match="offset"):
            load_stats(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        stats = estimate_gaussian_stats(DataMatrix(np.eye(2)))
        path = tmp_path / "extra.stats"
        path.write_bytes(stats_to_bytes(stats) + b"\x00")
        with pytest.raises(FormatError):
            load_stats(path)


class TestDataFiles:
    def test_binary_round_trip(self, tmp_path):
        rng = np.random.default_rng(6)
        dm = DataMatrix(rng.standard_normal((12, 3)))
        path = tmp_path / "d.bin"
        save_data_matrix(dm, path)
        back = load_data_matrix(path)
        assert back.values.tobytes() == dm.values.tobytes()

    def test_binary_bad_magic(self, tmp_path):
        path = tmp_path / "d.bin"
        path.write_bytes(b"NOPE!" + bytes(16))
        with pytest.raises(FormatError, match="magic"):
            load_data_matrix(path)

    def test_csv_reader(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1.0,2.0\n3.0,4.0\n")
        dm = load_data_csv(path)
        np.testing.assert_allclose(dm.values, [[1.0, 2.0], [3.0, 4.0]])

    def test_csv_malformed(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,two\n")
        with pytest.raises(FormatError):
            load_data_csv(path)


def test_pool_stats_moment_matching():
    a = GaussianStats(mean=np.array([1.0, 0.0]), eigvecs=np.eye(2),
                      eigvals=np.array([2.0, 1.0]))
    b = GaussianStats(mean=np.array([-1.0, 0.0]), eigvecs=np.eye(2),
                      eigvals=np.array([2.0, 1.0]))
    pooled = pool_stats([a, b])
    np.testing.assert_allclose(pooled.mean, [0.0, 0.0], atol=1e-15)
    # mixture covariance: within-cov + between-means spread diag(1, 0)
    np.testing.assert_allclose(pooled.covariance(), np.diag([3.0, 1.0]), atol=1e-12)
