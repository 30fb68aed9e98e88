import itertools

import numpy as np
import pytest

from mlgc.errors import NumericError, ParameterError
from mlgc.graph import laplacian, ratio_cut_value
from mlgc.models import Laplacian, Partition, WeightMatrix
from mlgc.schemas import Config
from mlgc.spectral import choose_k, cluster_with_spectrum, eigh, embed, kmeans, relabel, spectral_cluster


def _same_partition(p, labels):
    return np.array_equal(p.assign, relabel(np.asarray(labels)))


def _best_bipartition(w):
    n = w.n
    best, best_value = None, np.inf
    for bits in itertools.product((0, 1), repeat=n - 1):
        if not any(bits):
            continue
        p = Partition(k=2, assign=(0,) + bits)
        value = ratio_cut_value(w, p)
        if value < best_value:
            best, best_value = p, value
    return best, best_value


def _set_partitions(n, k):
    """Every assignment of n vertices to exactly k non-empty groups, labelled by first appearance."""

    def _grow(prefix, used):
        if len(prefix) == n:
            if used == k:
                yield tuple(prefix)
            return
        if k - used > n - len(prefix):
            return
        for g in range(min(used + 1, k)):
            yield from _grow(prefix + [g], max(used, g + 1))

    return _grow([0], 1) if n else iter(())


class TestEigh:
    def test_random_symmetric(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            a = rng.standard_normal((8, 8))
            a = a + a.T
            values, q = eigh(a)

            norm = np.linalg.norm(a)
            assert np.linalg.norm(a - q @ np.diag(values) @ q.T) <= 1e-9 * norm
            assert np.linalg.norm(q.T @ q - np.eye(8)) <= 1e-9
            assert np.all(np.diff(values) >= 0)
            np.testing.assert_allclose(values, np.linalg.eigvalsh(a), atol=1e-9 * norm)

    def test_zero_matrix(self):
        values, _ = eigh(np.zeros((3, 3)))
        np.testing.assert_array_equal(values, [0.0, 0.0, 0.0])

    def test_two_by_two(self):
        values, q = eigh(Laplacian(np.array([[1.0, -1.0], [-1.0, 1.0]])))
        np.testing.assert_allclose(values, [0.0, 2.0], atol=1e-12)
        np.testing.assert_allclose(q[:, 0], np.array([1.0, 1.0]) / np.sqrt(2), atol=1e-12)
        np.testing.assert_allclose(q[:, 1], np.array([1.0, -1.0]) / np.sqrt(2), atol=1e-12)

    def test_sign_convention(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((5, 5))
        _, q = eigh(a + a.T)
        for col in q.T:
            first = col[np.flatnonzero(np.abs(col) > 1e-10)[0]]
            assert first > 0

    def test_non_finite(self):
        with pytest.raises(NumericError):
            eigh(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    def test_not_square(self):
        with pytest.raises(ParameterError):
            eigh(np.zeros((2, 3)))

    def test_forty_vertex_laplacian(self, random_weights):
        lap = laplacian(random_weights(40, np.random.default_rng(11)))
        values, q = eigh(lap)
        a = lap.entries
        norm = np.linalg.norm(a)
        np.testing.assert_allclose(values, np.linalg.eigvalsh(a), atol=1e-9 * norm)
        assert np.linalg.norm(a - q @ np.diag(values) @ q.T) <= 1e-9 * norm
        assert np.linalg.norm(q.T @ q - np.eye(40)) <= 1e-9
        assert abs(values[0]) <= 1e-9 * norm


class TestEmbed:
    def test_constant_vector_on_connected_graph(self, random_weights):
        rng = np.random.default_rng(2)
        lap = laplacian(random_weights(6, rng))
        emb = embed(lap, 1)
        np.testing.assert_allclose(emb.rows[:, 0], 1 / np.sqrt(6), atol=1e-8)

    def test_components_give_piecewise_constant_rows(self):
        w = np.zeros((6, 6))
        w[:3, :3] = 1.0
        w[3:, 3:] = 0.5
        np.fill_diagonal(w, 0.0)
        emb = embed(laplacian(WeightMatrix(w)), 2)
        np.testing.assert_allclose(emb.rows[:3], np.tile(emb.rows[0], (3, 1)), atol=1e-8)
        np.testing.assert_allclose(emb.rows[3:], np.tile(emb.rows[3], (3, 1)), atol=1e-8)
        assert np.linalg.norm(emb.rows[0] - emb.rows[3]) > 0.1

    def test_full_basis_orthogonal(self, random_weights):
        rng = np.random.default_rng(3)
        emb = embed(laplacian(random_weights(7, rng)), 7)
        assert np.linalg.norm(emb.rows.T @ emb.rows - np.eye(7)) <= 1e-8

    @pytest.mark.parametrize("k", [0, 5])
    def test_k_out_of_range(self, k):
        with pytest.raises(ParameterError):
            embed(Laplacian(np.zeros((4, 4))), k)


class TestKMeans:
    def test_single_group(self):
        p = kmeans(np.random.default_rng(0).standard_normal((10, 2)), 1, seed=0)
        assert p.k == 1 and not np.any(p.assign)

    def test_separated_clouds(self):
        rng = np.random.default_rng(4)
        points = np.vstack([rng.normal(0.0, 0.01, (8, 2)), rng.normal(1.0, 0.01, (12, 2))])
        labels = [0] * 8 + [1] * 12
        for seed in range(20):
            assert _same_partition(kmeans(points, 2, seed=seed), labels)

    def test_one_point_per_group(self):
        points = np.arange(12, dtype=float).reshape(6, 2)
        p = kmeans(points, 6, seed=1)
        assert sorted(p.assign.tolist()) == list(range(6))

    def test_labels_by_first_appearance(self):
        points = np.array([[5.0], [5.1], [0.0], [0.1]])
        assert kmeans(points, 2, seed=3).assign.tolist() == [0, 0, 1, 1]

    def test_deterministic(self):
        points = np.random.default_rng(5).standard_normal((30, 3))
        assert np.array_equal(kmeans(points, 4, seed=9).assign, kmeans(points, 4, seed=9).assign)

    def test_too_many_groups(self):
        with pytest.raises(ParameterError):
            kmeans(np.zeros((2, 1)), 3, seed=0)


class TestChooseK:
    def test_largest_gap(self):
        assert choose_k([0.0, 0.01, 2.0, 2.1], 4) == 2

    def test_two_components(self):
        assert choose_k([0.0, 0.0, 3.0, 3.0, 3.0, 3.0], 10) == 2

    def test_equal_eigenvalues(self):
        assert choose_k([1.0, 1.0, 1.0, 1.0], 4) == 1

    def test_capped_by_k_max(self):
        assert choose_k([0.0, 0.0, 0.0, 5.0], 2) == 1


class TestSpectralCluster:
    def test_disjoint_cliques(self):
        w = np.zeros((7, 7))
        w[:3, :3] = 1.0
        w[3:, 3:] = 1.0
        np.fill_diagonal(w, 0.0)
        p = spectral_cluster(laplacian(WeightMatrix(w)), Config())
        assert _same_partition(p, [0, 0, 0, 1, 1, 1, 1])

    def test_single_vertex(self):
        p = spectral_cluster(Laplacian(np.zeros((1, 1))), Config())
        assert p.k == 1 and p.assign.tolist() == [0]

    def test_planted_three_blocks(self, planted_weights):
        recovered = chosen = 0
        for seed in range(20):
            w, labels = planted_weights([10, 10, 10], 0.9, 0.05, np.random.default_rng(seed))
            p, values = cluster_with_spectrum(laplacian(w), Config(rng_seed=seed))
            recovered += _same_partition(p, labels)
            chosen += choose_k(values, 10) == 3
        assert recovered >= 19
        assert chosen >= 18

    def test_planted_two_blocks_match_brute_force(self, planted_weights):
        rng = np.random.default_rng(6)
        hits = 0
        for trial in range(30):
            half = int(rng.choice([3, 4, 5]))
            w, _ = planted_weights([half, half], 0.9, 0.05, rng)
            best, best_value = _best_bipartition(w)
            p = spectral_cluster(laplacian(w), Config(rng_seed=trial))
            hits += p.k == 2 and _same_partition(p, best.assign)
        assert hits >= 28

    def test_relaxation_bound(self, random_weights):
        rng = np.random.default_rng(7)
        for _ in range(12):
            n = int(rng.integers(3, 9))
            w = random_weights(n, rng)
            values, _ = eigh(laplacian(w))
            for k in range(1, min(4, n) + 1):
                best_value = min(
                    ratio_cut_value(w, Partition(k=k, assign=assign)) for assign in _set_partitions(n, k)
                )
                assert values[:k].sum() <= 2 * best_value + 1e-9

    def test_bipartition_enumeration_agrees(self, random_weights):
        rng = np.random.default_rng(10)
        w = random_weights(6, rng)
        _, best_value = _best_bipartition(w)
        enumerated = min(ratio_cut_value(w, Partition(k=2, assign=a)) for a in _set_partitions(6, 2))
        assert enumerated == pytest.approx(best_value)
        assert sum(1 for _ in _set_partitions(6, 3)) == 90

    def test_permutation_equivariance(self, planted_weights):
        rng = np.random.default_rng(8)
        w, _ = planted_weights([6, 6, 6], 0.9, 0.05, rng)
        perm = rng.permutation(18)
        permuted = WeightMatrix(w.entries[np.ix_(perm, perm)])

        base = spectral_cluster(laplacian(w), Config())
        moved = spectral_cluster(laplacian(permuted), Config())
        assert _same_partition(moved, base.assign[perm])

    def test_deterministic(self, random_weights):
        lap = laplacian(random_weights(12, np.random.default_rng(9)))
        a = spectral_cluster(lap, Config(rng_seed=4))
        b = spectral_cluster(lap, Config(rng_seed=4))
        assert a.k == b.k
        assert np.array_equal(a.assign, b.assign)
