import math

import numpy as np
import pytest

from lel.finite_prob import (
    Channel,
    EnumerationCapError,
    JointPmf,
    Pmf,
    SequenceDist,
    all_sequences,
    entropy,
    index_to_sequence,
    joint_from,
    mutual_information,
    product_extension,
    reverse_channel,
    sequence_to_index,
    total_variation,
)


def h2(p):
    """Closed-form binary entropy, the independent oracle for these tests."""
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def random_pmf(rng, size):
    v = rng.random(size) + 1e-3
    return Pmf(v / v.sum())


def random_joint(rng, nx, ny):
    v = rng.random((nx, ny)) + 1e-3
    return JointPmf(v / v.sum())


class TestValidation:
    def test_pmf_rejects_negative(self):
        with pytest.raises(ValueError):
            Pmf([1.2, -0.2])

    def test_pmf_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            Pmf([0.5, 0.6])

    def test_pmf_is_immutable(self):
        p = Pmf([0.5, 0.5])
        with pytest.raises(ValueError):
            p.probs[0] = 0.9

    def test_channel_rejects_nonstochastic_row(self):
        with pytest.raises(ValueError):
            Channel([[0.5, 0.5], [0.9, 0.2]])

    def test_joint_rejects_bad_total(self):
        with pytest.raises(ValueError):
            JointPmf([[0.5, 0.5], [0.5, 0.5]])

    def test_sequence_dist_length_checked(self):
        with pytest.raises(ValueError):
            SequenceDist(alphabet_size=2, n=2, probs=[0.5, 0.5])

    def test_sequence_dist_loose_tolerance(self):
        probs = np.full(8, 0.125)
        probs[0] += 5e-10  # within the 1e-9 sequence-space tolerance
        SequenceDist(alphabet_size=2, n=3, probs=probs)
        with pytest.raises(ValueError):
            SequenceDist(alphabet_size=2, n=3, probs=probs + 1e-8)


class TestEntropy:
    def test_uniform_binary(self):
        assert entropy(Pmf([0.5, 0.5])) == 1.0

    def test_point_mass(self):
        assert entropy(Pmf([0.0, 1.0, 0.0])) == 0.0

    def test_bernoulli_011_closed_form(self):
        assert entropy(Pmf([0.89, 0.11])) == pytest.approx(h2(0.11), abs=1e-12)
        assert entropy(Pmf([0.89, 0.11])) == pytest.approx(0.49991, abs=1e-5)


class TestMutualInformation:
    def test_product_joint_is_zero(self):
        j = joint_from(Pmf([0.3, 0.7]), Channel([[0.2, 0.8], [0.2, 0.8]]))
        assert mutual_information(j) == pytest.approx(0.0, abs=1e-12)

    def test_identity_channel_uniform(self):
        j = joint_from(Pmf([0.5, 0.5]), Channel(np.eye(2)))
        assert mutual_information(j) == pytest.approx(1.0, abs=1e-12)

    def test_bsc_011_closed_form(self):
        j = joint_from(Pmf([0.5, 0.5]), Channel([[0.89, 0.11], [0.11, 0.89]]))
        assert mutual_information(j) == pytest.approx(1 - h2(0.11), abs=1e-12)
        assert mutual_information(j) == pytest.approx(0.50009, abs=1e-5)

    def test_nonnegative_on_random_joints(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            j = random_joint(rng, int(rng.integers(2, 5)), int(rng.integers(2, 5)))
            assert mutual_information(j) >= -1e-12


class TestTotalVariation:
    def test_identical(self):
        p = Pmf([0.25, 0.75])
        assert total_variation(p, p) == 0.0

    def test_disjoint_supports(self):
        assert total_variation(Pmf([1.0, 0.0]), Pmf([0.0, 1.0])) == 1.0

    def test_half_l1_by_hand(self):
        assert total_variation(Pmf([0.5, 0.5]), Pmf([0.25, 0.75])) == 0.25

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            total_variation(Pmf([0.5, 0.5]), Pmf([0.2, 0.3, 0.5]))
        with pytest.raises(ValueError):
            total_variation(Pmf([0.5, 0.5]), product_extension(Pmf([0.5, 0.5]), 1))

    def test_symmetry_triangle_permutation(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            size = int(rng.integers(2, 7))
            p, q, r = (random_pmf(rng, size) for _ in range(3))
            assert total_variation(p, q) == total_variation(q, p)
            assert (
                total_variation(p, r)
                <= total_variation(p, q) + total_variation(q, r) + 1e-15
            )
            perm = rng.permutation(size)
            assert total_variation(
                Pmf(p.probs[perm]), Pmf(q.probs[perm])
            ) == pytest.approx(total_variation(p, q), abs=1e-15)

    def test_bounds(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            p, q = (random_pmf(rng, 4) for _ in range(2))
            assert 0.0 <= total_variation(p, q) <= 1.0


class TestJointFrom:
    def test_point_mass_identity(self):
        j = joint_from(Pmf([1.0, 0.0]), Channel(np.eye(2)))
        assert np.array_equal(j.probs, [[1.0, 0.0], [0.0, 0.0]])

    def test_uniform_bsc_011(self):
        j = joint_from(Pmf([0.5, 0.5]), Channel([[0.89, 0.11], [0.11, 0.89]]))
        assert np.allclose(j.probs, [[0.445, 0.055], [0.055, 0.445]], atol=1e-15)

    def test_constant_output_channel_rank_one(self):
        j = joint_from(Pmf([0.3, 0.7]), Channel([[0.0, 1.0], [0.0, 1.0]]))
        assert np.allclose(j.marginal_y().probs, [0.0, 1.0])
        assert np.linalg.matrix_rank(j.probs) == 1

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            joint_from(Pmf([0.2, 0.3, 0.5]), Channel(np.eye(2)))

    def test_marginalization_recovers_input(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            nx, ny = int(rng.integers(2, 5)), int(rng.integers(2, 5))
            p = random_pmf(rng, nx)
            rows = np.stack([random_pmf(rng, ny).probs for _ in range(nx)])
            j = joint_from(p, Channel(rows))
            assert np.abs(j.marginal_x().probs - p.probs).max() < 1e-12


class TestReverseChannel:
    def test_symmetric_joint_bayes_by_hand(self):
        j = JointPmf([[0.445, 0.055], [0.055, 0.445]])
        py, ch = reverse_channel(j)
        assert np.allclose(py.probs, [0.5, 0.5], atol=1e-15)
        assert np.allclose(ch.rows, [[0.89, 0.11], [0.11, 0.89]], atol=1e-15)
        assert ch.degenerate_rows == ()

    def test_product_joint_rows_equal_marginal(self):
        px = Pmf([0.3, 0.7])
        j = joint_from(px, Channel([[0.4, 0.6], [0.4, 0.6]]))
        _, ch = reverse_channel(j)
        assert np.allclose(ch.rows, np.tile(px.probs, (2, 1)), atol=1e-12)

    def test_deterministic_identity(self):
        j = JointPmf(np.eye(2) * 0.5)
        py, ch = reverse_channel(j)
        assert np.allclose(ch.rows, np.eye(2))

    def test_zero_probability_output_flagged_uniform(self):
        j = JointPmf([[0.5, 0.0, 0.1], [0.3, 0.0, 0.1]])
        py, ch = reverse_channel(j)
        assert ch.degenerate_rows == (1,)
        assert np.allclose(ch.rows[1], [0.5, 0.5])

    def test_round_trip_reconstruction(self):
        rng = np.random.default_rng(31)
        for _ in range(30):
            j = random_joint(rng, int(rng.integers(2, 5)), int(rng.integers(2, 5)))
            py, ch = reverse_channel(j)
            rebuilt = joint_from(py, ch)  # (y, x) orientation
            assert np.abs(rebuilt.probs.T - j.probs).max() < 1e-12


class TestProductExtension:
    def test_n_one_is_identity(self):
        p = Pmf([0.2, 0.3, 0.5])
        ext = product_extension(p, 1)
        assert np.array_equal(ext.probs, p.probs)

    def test_uniform_cube(self):
        ext = product_extension(Pmf([0.5, 0.5]), 3)
        assert np.array_equal(ext.probs, np.full(8, 0.125))

    def test_bernoulli_02_lexicographic(self):
        ext = product_extension(Pmf([0.8, 0.2]), 2)
        assert np.allclose(ext.probs, [0.64, 0.16, 0.16, 0.04], atol=1e-15)

    def test_cap_enforced(self, monkeypatch):
        monkeypatch.setenv("LEL_ENUM_CAP", "16")
        with pytest.raises(EnumerationCapError) as err:
            product_extension(Pmf([0.5, 0.5]), 5)
        assert "n=5" in str(err.value) and "alphabet=2" in str(err.value)

    def test_coordinate_sum_recursion(self):
        rng = np.random.default_rng(41)
        for _ in range(10):
            size = int(rng.integers(2, 4))
            n = int(rng.integers(2, 5))
            p = random_pmf(rng, size)
            ext = product_extension(p, n).probs.reshape((size,) * n)
            smaller = product_extension(p, n - 1).probs
            for axis in range(n):
                for value in range(size):
                    slice_probs = np.take(ext, value, axis=axis).reshape(-1)
                    assert np.abs(slice_probs - p.probs[value] * smaller).max() < 1e-15


class TestSequenceIndexing:
    def test_round_trip(self):
        rng = np.random.default_rng(51)
        for _ in range(20):
            size = int(rng.integers(2, 5))
            n = int(rng.integers(1, 6))
            seq = rng.integers(0, size, n)
            idx = sequence_to_index(seq, size)
            assert np.array_equal(index_to_sequence(idx, size, n), seq)

    def test_lexicographic_order(self):
        seqs = all_sequences(3, 2)
        assert np.array_equal(seqs[0], [0, 0])
        assert np.array_equal(seqs[1], [0, 1])
        assert np.array_equal(seqs[3], [1, 0])
        for i, seq in enumerate(seqs):
            assert sequence_to_index(seq, 3) == i
