import numpy as np
import pytest

from ccot.core import SortPermutation, sort_with_permutation
from ccot.errors import InputError
from ccot.jumps import (
    JumpList,
    Partition,
    coarsen,
    detect,
    detect_partition,
    jump_cost,
    partition_from_jumps,
    suspicious_cells,
)


def staircase(sizes, rng, noise=0.0, step=1.0):
    levels = np.repeat(np.arange(len(sizes)) * step, sizes)
    return levels + rng.uniform(-noise, noise, size=levels.size)


class TestJumpCost:
    def test_constant(self):
        np.testing.assert_array_equal(jump_cost([2.0] * 5), np.zeros(5))

    def test_single_step(self):
        np.testing.assert_array_equal(jump_cost([0, 0, 1, 1]), [0, 1, 1, 0])

    def test_growing_steps(self):
        np.testing.assert_array_equal(jump_cost([0, 1, 3, 6]), [1, 3, 5, 3])

    def test_too_short(self):
        with pytest.raises(InputError):
            jump_cost([0, 1])


class TestCoarsen:
    def test_even(self):
        np.testing.assert_array_equal(coarsen([0, 0, 1, 1]), [0, 1])
        np.testing.assert_array_equal(coarsen([1, 3, 5, 7]), [2, 6])

    def test_odd_tail_is_carried(self):
        np.testing.assert_array_equal(coarsen([1, 2, 3]), [1.5, 3])


class TestSuspiciousCells:
    def test_plateau_counts_once_at_left(self):
        assert suspicious_cells(np.array([0.0, 1.0, 1.0, 0.0])) == [1]

    def test_boundary_maximum(self):
        assert suspicious_cells(np.array([3.0, 1.0, 2.0, 0.5])) == [0, 2]

    def test_flat_vector_has_none(self):
        assert suspicious_cells(np.zeros(6)) == []


class TestDetect:
    def test_single_exact_step(self):
        rng = np.random.default_rng(0)
        v = rng.permutation(np.r_[np.zeros(8), np.ones(8)])
        jl = detect(v)
        assert jl.positions == (8,)
        assert jl.g == 2

    def test_constant(self):
        jl = detect(np.full(10, 3.5))
        assert jl.positions == ()
        assert jl.g == 1

    def test_near_constant_is_constant(self):
        v = 1.0 + np.array([0, 1e-15, 0, 2e-15, 0, 0])
        assert detect(v).g == 1

    def test_too_short(self):
        with pytest.raises(InputError):
            detect([0.0, 1.0, 2.0])

    def test_exact_staircase_confirms_every_scale(self):
        v = np.repeat([0.0, 1.0, 2.0], 16)
        jl = detect(v)
        assert jl.positions == (16, 32)
        assert all(s >= 3 for s in jl.scales_confirmed)

    def test_noisy_three_level_staircase(self):
        rng = np.random.default_rng(42)
        hits = 0
        for _ in range(100):
            v = rng.permutation(staircase([16, 16, 16], rng, noise=0.01))
            hits += detect(v).g == 3
        assert hits >= 95

    @pytest.mark.parametrize("levels", [2, 3, 4, 5])
    def test_staircases_of_64(self, levels):
        rng = np.random.default_rng(100 + levels)
        sizes = [len(chunk) for chunk in np.array_split(np.arange(64), levels)]
        hits = 0
        for _ in range(100):
            v = staircase(sizes, rng, noise=0.01)
            hits += detect(v).g == levels
        assert hits >= 95

    def test_small_step_next_to_large_one(self):
        jl = detect(np.repeat([0.0, 1.0, 100.0], 16))
        assert jl.positions == (16, 32)
        assert jl.g == 3

    @pytest.mark.parametrize("low", [1e-6, 1e-3, 1.0, 10.0])
    def test_unequal_steps(self, low):
        rng = np.random.default_rng(3)
        v = rng.permutation(np.repeat([0.0, low, low + 100.0], 16))
        assert detect(v).positions == (16, 32)

    def test_five_exact_levels(self):
        sizes = [len(chunk) for chunk in np.array_split(np.arange(64), 5)]
        jl = detect(np.repeat(np.arange(5.0), sizes))
        assert jl.positions == (13, 26, 39, 52)

    def test_steps_below_noise_floor_are_ignored(self):
        v = np.repeat([0.0, 1e-14, 1.0], 16)
        assert detect(v).positions == (32,)

    def test_invariances(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            k = int(rng.integers(4, 40))
            v = rng.integers(0, 6, size=k).astype(float)
            base = detect(v).positions
            shift = float(rng.integers(-50, 50))
            scale = 2.0 ** int(rng.integers(-4, 5))
            assert detect(v + shift).positions == base
            assert detect(scale * v).positions == base
            assert detect(rng.permutation(v)).positions == base


class TestJumpList:
    def test_positions_must_increase(self):
        with pytest.raises(InputError):
            JumpList((3, 2), (1, 1), 6)

    def test_positions_in_range(self):
        with pytest.raises(InputError):
            JumpList((0,), (1,), 4)
        with pytest.raises(InputError):
            JumpList((4,), (1,), 4)

    def test_g(self):
        assert JumpList((2, 5), (1, 1), 8).g == 3


class TestPartition:
    def test_every_label_used(self):
        with pytest.raises(InputError):
            Partition(np.array([1, 1, 3]), 3)

    def test_labels_in_range(self):
        with pytest.raises(InputError):
            Partition(np.array([0, 1]), 1)

    def test_sizes(self):
        np.testing.assert_array_equal(Partition(np.array([2, 1, 2, 2]), 2).sizes(), [1, 3])


class TestPartitionFromJumps:
    def test_no_jumps(self):
        p = partition_from_jumps(SortPermutation(np.arange(5)), JumpList((), (), 5))
        np.testing.assert_array_equal(p.labels, [1] * 5)
        assert p.g == 1

    def test_identity(self):
        p = partition_from_jumps(SortPermutation(np.arange(4)), JumpList((2,), (1,), 4))
        np.testing.assert_array_equal(p.labels, [1, 1, 2, 2])

    def test_reversed(self):
        p = partition_from_jumps(SortPermutation(np.array([3, 2, 1, 0])), JumpList((2,), (1,), 4))
        np.testing.assert_array_equal(p.labels, [2, 2, 1, 1])

    def test_rank_monotone_with_g_clusters(self):
        rng = np.random.default_rng(1)
        v = rng.permutation(staircase([16, 16, 16, 16], rng))
        part, jl, _ = detect_partition(v)
        assert part.g == jl.g == 4
        assert np.all(part.sizes() > 0)
        _, perm = sort_with_permutation(v)
        assert np.all(np.diff(part.labels[perm.order]) >= 0)

    def test_invalid_positions(self):
        with pytest.raises(InputError):
            partition_from_jumps(SortPermutation(np.arange(3)), JumpList((5,), (1,), 0))
