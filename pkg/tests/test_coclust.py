import logging
import time

import numpy as np
import pytest

from ccot.coclust import (
    CcotConfig,
    KernelConfig,
    auto_sigma,
    ccot,
    ccot_gw,
    gaussian_kernel_matrix,
    majority_vote,
    select_lambda,
)
from ccot.core import DataMatrix, pairwise_sq_dist
from ccot.errors import CoverageError, DegenerateKernelError, InputError
from ccot.gromov import GWConfig
from ccot.jumps import Partition, detect_partition
from ccot.simulate import LbmConfig, cce, error_rate, generate_lbm, load_preset
from ccot.sinkhorn import SinkhornConfig, solve
from ccot.strategies import STRATEGIES, get_strategy


def two_block_matrix():
    # row blocks x column blocks with values [[0, 1], [3, 10]], 4x4 each
    return DataMatrix(np.kron(np.array([[0.0, 1.0], [3.0, 10.0]]), np.ones((4, 4))))


def small_lbm(seed=1):
    return generate_lbm(LbmConfig(n=40, d=20, g=2, m=2, separation="well", seed=seed))


class TestMajorityVote:
    def test_per_index_mode(self):
        parts = [Partition(np.array(x)) for x in ([1, 1, 2, 2], [1, 1, 2, 2], [1, 2, 2, 2])]
        np.testing.assert_array_equal(majority_vote(parts, 4).labels, [1, 1, 2, 2])

    def test_only_modal_count_votes(self):
        parts = [
            Partition(np.array([1, 1, 2, 2])),
            Partition(np.array([1, 2, 3, 3])),
            Partition(np.array([1, 1, 1, 2])),
        ]
        np.testing.assert_array_equal(majority_vote(parts, 4).labels, [1, 1, 1, 2])

    def test_count_tie_goes_to_fewer_clusters(self):
        parts = [Partition(np.array([1, 2, 3])), Partition(np.array([1, 1, 2]))]
        vote = majority_vote(parts, 3)
        assert vote.g == 2
        np.testing.assert_array_equal(vote.labels, [1, 1, 2])

    def test_subsamples(self):
        samples = [
            (np.array([0, 1]), Partition(np.array([1, 2]))),
            (np.array([1, 2]), Partition(np.array([2, 1]))),
            (np.array([2, 3]), Partition(np.array([1, 2]))),
        ]
        np.testing.assert_array_equal(majority_vote(samples, 4).labels, [1, 2, 1, 2])

    def test_label_tie_goes_to_smaller_label_and_compacts(self, caplog):
        samples = [
            (np.array([0, 1]), Partition(np.array([1, 2]))),
            (np.array([0, 1]), Partition(np.array([2, 1]))),
        ]
        with caplog.at_level(logging.WARNING, logger="ccot.coclust"):
            vote = majority_vote(samples, 2)
        np.testing.assert_array_equal(vote.labels, [1, 1])
        assert vote.g == 1
        assert "relabeling" in caplog.text

    def test_uncovered_index(self):
        with pytest.raises(CoverageError) as exc:
            majority_vote([(np.array([0, 1]), Partition(np.array([1, 2])))], 3)
        assert exc.value.missing == [2]

    def test_no_samples(self):
        with pytest.raises(InputError):
            majority_vote([], 3)


class TestGaussianKernel:
    def test_auto_bandwidth(self):
        V = np.array([[0.0], [2.0]])
        assert auto_sigma(V) == pytest.approx(2.0)
        K = gaussian_kernel_matrix(V).values
        np.testing.assert_allclose(K, [[1.0, np.exp(-0.5)], [np.exp(-0.5), 1.0]])

    def test_identical_vectors_need_explicit_sigma(self):
        V = np.ones((3, 2))
        with pytest.raises(DegenerateKernelError):
            gaussian_kernel_matrix(V)
        np.testing.assert_array_equal(gaussian_kernel_matrix(V, sigma=1.0).values, np.ones((3, 3)))

    def test_invalid_sigma(self):
        with pytest.raises(InputError):
            gaussian_kernel_matrix(np.eye(2), sigma=0.0)
        with pytest.raises(InputError):
            KernelConfig(sigma=-1.0)


class TestCcot:
    def test_two_obvious_blocks(self):
        res = ccot(two_block_matrix(), CcotConfig(lam=1.0))
        assert (res.g, res.m) == (2, 2)
        truth = np.repeat([1, 2], 4)
        assert error_rate(truth, res.row_partition) == 0.0
        assert error_rate(truth, res.col_partition) == 0.0
        assert res.diagnostics.samples_drawn == 1
        assert res.diagnostics.count_histogram == {"2x2": 1}

    def test_square_input_is_a_single_pass(self):
        A = two_block_matrix()
        res = ccot(A, CcotConfig(lam=1.0, n_samples=50))
        coupling = solve(pairwise_sq_dist(A.values, A.values.T), cfg=SinkhornConfig(lam=1.0))
        rows, _, row_trace = detect_partition(coupling.alpha)
        cols, _, _ = detect_partition(coupling.beta)
        np.testing.assert_array_equal(res.row_partition.labels, rows.labels)
        np.testing.assert_array_equal(res.col_partition.labels, cols.labels)
        np.testing.assert_array_equal(res.diagnostics.row_trace, row_trace)

    def test_transposed_input_swaps_partitions(self):
        A, _ = small_lbm()
        cfg = CcotConfig(lam=1.0, n_samples=10)
        res = ccot(A, cfg)
        flipped = ccot(A.transpose(), cfg)
        np.testing.assert_array_equal(flipped.row_partition.labels, res.col_partition.labels)
        np.testing.assert_array_equal(flipped.col_partition.labels, res.row_partition.labels)
        assert flipped.diagnostics.transposed and not res.diagnostics.transposed

    def test_deterministic_for_a_seed_and_worker_count(self):
        A, _ = small_lbm(seed=2)
        a = ccot(A, CcotConfig(lam=1.0, n_samples=8, seed=5))
        b = ccot(A, CcotConfig(lam=1.0, n_samples=8, seed=5))
        c = ccot(A, CcotConfig(lam=1.0, n_samples=8, seed=5, n_jobs=4))
        for other in (b, c):
            np.testing.assert_array_equal(a.row_partition.labels, other.row_partition.labels)
            np.testing.assert_array_equal(a.col_partition.labels, other.col_partition.labels)
            assert a.diagnostics.samples_drawn == other.diagnostics.samples_drawn

    def test_every_row_is_covered(self):
        A, _ = small_lbm(seed=3)
        res = ccot(A, CcotConfig(lam=1.0, n_samples=4))
        assert len(res.row_partition) == A.n
        assert res.diagnostics.min_row_coverage >= 1
        assert res.diagnostics.samples_drawn >= 4

    def test_coverage_failure(self):
        A = DataMatrix(np.random.default_rng(0).normal(size=(12, 4)))
        with pytest.raises(CoverageError):
            ccot(A, CcotConfig(lam=1.0, n_samples=1, max_extra_samples=0))

    def test_lambda_grid_search_records_trials(self):
        res = ccot(two_block_matrix(), CcotConfig(lambda_grid=(0.5, 1.0)))
        assert res.diagnostics.lam in (0.5, 1.0)
        assert res.diagnostics.lambda_trials
        assert res.diagnostics.to_dict()["lambda_trials"]

    def test_invalid_config(self):
        with pytest.raises(InputError):
            CcotConfig(n_samples=0)
        with pytest.raises(InputError):
            CcotConfig(lambda_grid=())

    def test_selection_skips_lambdas_the_kernel_cannot_hold(self):
        lam, trials = select_lambda(two_block_matrix(), CcotConfig(lambda_grid=(0.5, 1.0, 1e4)))
        assert lam == 1.0
        assert trials[1e4] is False
        assert 0.5 not in trials

    @pytest.mark.slow
    def test_well_separated_preset(self):
        errors = []
        for seed in range(10):
            A, truth = generate_lbm(load_preset("d1", seed=seed))
            start = time.perf_counter()
            res = ccot(A, CcotConfig(n_samples=200, seed=seed))
            assert time.perf_counter() - start < 60
            errors.append(cce(truth.row_labels, res.row_partition, truth.col_labels, res.col_partition))
        assert np.mean(errors) <= 0.05

    @pytest.mark.slow
    def test_well_separated_counts(self):
        hits = 0
        for seed in range(100):
            A, _ = generate_lbm(load_preset("d1", seed=seed))
            res = ccot(A, CcotConfig(n_samples=200, seed=seed))
            hits += (res.g, res.m) == (3, 3)
        assert hits >= 90

    @pytest.mark.slow
    def test_doubling_the_size_bounds_growth(self):
        def best_time(size):
            A, _ = generate_lbm(LbmConfig(n=size, d=size, g=3, m=3, seed=0))
            times = []
            for _ in range(3):
                start = time.perf_counter()
                ccot(A, CcotConfig(lam=1.0))
                times.append(time.perf_counter() - start)
            return min(times)

        assert best_time(400) < 4.5 * best_time(200)


class TestCcotGw:
    def test_constant_matrix_is_one_block(self):
        A = DataMatrix(np.full((6, 5), 2.0))
        res = ccot_gw(A, GWConfig(outer_iter=3), KernelConfig(sigma=1.0))
        assert (res.g, res.m) == (1, 1)
        assert res.diagnostics.row_sigma == 1.0

    def test_constant_matrix_with_auto_sigma(self):
        with pytest.raises(DegenerateKernelError):
            ccot_gw(DataMatrix(np.full((6, 5), 2.0)))

    def test_diagnostics(self):
        A, _ = small_lbm()
        res = ccot_gw(A, GWConfig(outer_iter=5))
        d = res.diagnostics.to_dict()
        assert d["method"] == "ccot-gw"
        assert d["barycenter_runs"] == 1
        assert 1 <= len(d["objective_trace"]) <= 5
        assert d["row_sigma"] > 0 and d["col_sigma"] > 0
        assert len(res.row_partition) == 40
        assert len(res.col_partition) == 20

    def test_precomputed_kernels_must_fit(self):
        A = DataMatrix(np.zeros((4, 3)))
        kernel = KernelConfig(kind="precomputed", row_kernel=np.eye(3), col_kernel=np.eye(3))
        with pytest.raises(InputError):
            ccot_gw(A, kernel=kernel)

    @pytest.mark.slow
    @pytest.mark.parametrize("preset, bound", [("d1", 0.05), ("d3", 0.10)])
    def test_presets(self, preset, bound):
        errors = []
        for seed in range(10):
            A, truth = generate_lbm(load_preset(preset, seed=seed))
            start = time.perf_counter()
            res = ccot_gw(A, GWConfig(seed=seed))
            assert time.perf_counter() - start < 60
            errors.append(cce(truth.row_labels, res.row_partition, truth.col_labels, res.col_partition))
        assert np.mean(errors) <= bound

    @pytest.mark.slow
    def test_ill_separated_counts(self):
        hits = 0
        for seed in range(100):
            A, _ = generate_lbm(load_preset("d3", seed=seed))
            res = ccot_gw(A, GWConfig(seed=seed))
            hits += (res.g, res.m) == (2, 4)
        assert hits >= 80

    @pytest.mark.slow
    def test_square_300_runtime(self):
        A, _ = generate_lbm(LbmConfig(n=300, d=300, g=3, m=3, seed=0))
        start = time.perf_counter()
        ccot_gw(A)
        assert time.perf_counter() - start < 120


class TestStrategies:
    def test_registry(self):
        assert sorted(STRATEGIES) == ["ccot", "ccot-gw"]

    def test_unknown_method(self):
        with pytest.raises(InputError):
            get_strategy("kmeans")

    def test_fit(self):
        res = get_strategy("ccot", cfg=CcotConfig(lam=1.0)).fit(two_block_matrix())
        assert (res.g, res.m) == (2, 2)
