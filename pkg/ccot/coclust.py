"""
End-to-end co-clustering pipelines.

  ccot     sample square sub-matrices, solve entropic OT between their rows and
           columns, read partitions off the sorted scaling vectors and vote.
  ccot_gw  Gaussian (or given) similarity matrices for rows and columns, GW
           barycenter between them, partitions from the right scalings.
"""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist, pdist

from . import config, sinkhorn
from .core import DataMatrix, pairwise_sq_dist, sample_indices, spawn_seeds
from .errors import ConvergenceError, CoverageError, DegenerateKernelError, InputError
from .gromov import GWConfig, SimilarityMatrix, barycenter
from .jumps import NOISE_FLOOR, Partition, detect_partition
from .sinkhorn import SinkhornConfig

logger = logging.getLogger(__name__)

# extra CCOT samples are drawn in fixed-size chunks so results do not depend on n_jobs
EXTRA_CHUNK = 16


@dataclass(frozen=True)
class CcotConfig:
    lam: Optional[float] = None  # None: pick from lambda_grid
    n_samples: int = config.N_SAMPLES
    seed: int = 0
    sinkhorn: SinkhornConfig = field(default_factory=SinkhornConfig)
    max_extra_samples: int = config.MAX_EXTRA_SAMPLES
    lambda_grid: Tuple[float, ...] = config.LAMBDA_GRID
    n_jobs: int = config.N_JOBS

    def __post_init__(self):
        if self.n_samples < 1:
            raise InputError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.max_extra_samples < 0:
            raise InputError(f"max_extra_samples must be >= 0, got {self.max_extra_samples}")
        if self.lam is not None and not self.lam > 0:
            raise InputError(f"lambda must be positive, got {self.lam}")
        if self.lam is None and (not self.lambda_grid or min(self.lambda_grid) <= 0):
            raise InputError("lambda grid must hold positive values")
        if self.n_jobs < 1:
            raise InputError(f"n_jobs must be >= 1, got {self.n_jobs}")


@dataclass(frozen=True)
class KernelConfig:
    kind: str = "gaussian"
    sigma: Optional[float] = None  # None: mean pairwise Euclidean distance
    row_kernel: Optional[np.ndarray] = None
    col_kernel: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "precomputed"):
            raise InputError(f"unknown kernel kind '{self.kind}'")
        if self.sigma is not None and not self.sigma > 0:
            raise InputError(f"sigma must be positive, got {self.sigma}")
        if self.kind == "precomputed" and (self.row_kernel is None or self.col_kernel is None):
            raise InputError("precomputed kernels need both row_kernel and col_kernel")


@dataclass(frozen=True)
class Diagnostics:
    method: str
    row_trace: np.ndarray
    col_trace: np.ndarray
    lam: float
    converged: bool = True
    count_histogram: Dict[str, int] = field(default_factory=dict)
    lambda_trials: Dict[float, bool] = field(default_factory=dict)
    samples_drawn: int = 0
    samples_converged: int = 0
    row_samples_retained: int = 0
    col_samples_retained: int = 0
    min_row_coverage: int = 0
    barycenter_runs: int = 0
    objective_trace: Tuple[float, ...] = ()
    row_sigma: Optional[float] = None
    col_sigma: Optional[float] = None
    transposed: bool = False

    def swapped(self) -> "Diagnostics":
        histogram = {}
        for key, count in self.count_histogram.items():
            g, m = key.split("x")
            histogram[f"{m}x{g}"] = count
        return replace(
            self,
            row_trace=self.col_trace,
            col_trace=self.row_trace,
            count_histogram=histogram,
            row_samples_retained=self.col_samples_retained,
            col_samples_retained=self.row_samples_retained,
            row_sigma=self.col_sigma,
            col_sigma=self.row_sigma,
            transposed=not self.transposed,
        )

    def to_dict(self) -> dict:
        """
        Scalar view for the run summary (traces are written separately).
        """
        out = {
            "method": self.method,
            "lambda": float(self.lam),
            "converged": bool(self.converged),
            "count_histogram": {k: int(v) for k, v in self.count_histogram.items()},
            "transposed": bool(self.transposed),
        }
        if self.method == "ccot":
            out.update(
                lambda_trials={float(k): bool(v) for k, v in self.lambda_trials.items()},
                samples_drawn=int(self.samples_drawn),
                samples_converged=int(self.samples_converged),
                row_samples_retained=int(self.row_samples_retained),
                col_samples_retained=int(self.col_samples_retained),
                min_row_coverage=int(self.min_row_coverage),
            )
        else:
            out.update(
                barycenter_runs=int(self.barycenter_runs),
                objective_trace=[float(x) for x in self.objective_trace],
                row_sigma=None if self.row_sigma is None else float(self.row_sigma),
                col_sigma=None if self.col_sigma is None else float(self.col_sigma),
            )
        return out


@dataclass(frozen=True)
class CoClusterResult:
    row_partition: Partition
    col_partition: Partition
    diagnostics: Diagnostics

    @property
    def g(self) -> int:
        return self.row_partition.g

    @property
    def m(self) -> int:
        return self.col_partition.g

    def transposed(self) -> "CoClusterResult":
        return CoClusterResult(self.col_partition, self.row_partition, self.diagnostics.swapped())


@dataclass(frozen=True)
class _Sample:
    index: int
    rows: np.ndarray
    row_partition: Partition
    col_partition: Partition
    row_trace: np.ndarray
    col_trace: np.ndarray
    converged: bool


def _modal(counts: Sequence[int]) -> int:
    tally = Counter(counts)
    top = max(tally.values())
    return min(k for k, c in tally.items() if c == top)


def majority_vote(per_sample: Sequence[Union[Partition, Tuple[Sequence[int], Partition]]], axis_size: int) -> Partition:
    """
    Per-index mode of the labels of samples whose cluster count is the modal one.

    Each entry is a partition over all axis_size indices, or a pair
    (indices, partition over those indices). Labels are ordered by scaling
    value in every sample, so they are comparable without alignment.
    """
    items = []
    for entry in per_sample:
        if isinstance(entry, Partition):
            items.append((np.arange(len(entry)), entry))
        else:
            idx, part = entry
            idx = np.asarray(idx, dtype=int)
            if idx.size != len(part):
                raise InputError(f"sample has {idx.size} indices but {len(part)} labels")
            items.append((idx, part))
    if not items:
        raise InputError("majority vote needs at least one sample")

    g = _modal([part.g for _, part in items])
    votes = np.zeros((axis_size, g + 1), dtype=int)
    for idx, part in items:
        if part.g == g:
            np.add.at(votes, (idx, part.labels), 1)

    missing = np.flatnonzero(votes.sum(axis=1) == 0)
    if missing.size:
        raise CoverageError(
            f"{missing.size} of {axis_size} indices appear in no retained sample "
            f"(first: {missing[:10].tolist()})",
            missing,
        )

    labels = votes[:, 1:].argmax(axis=1) + 1
    used = np.unique(labels)
    if used.size < g:
        logger.warning("vote left %d of %d clusters empty; relabeling", g - used.size, g)
        labels = np.searchsorted(used, labels) + 1
    return Partition(labels, used.size)


def _run_sample(values: np.ndarray, rows: np.ndarray, sk: SinkhornConfig, index: int) -> _Sample:
    D = values[rows]
    M = pairwise_sq_dist(D, D.T)
    coupling = sinkhorn.solve(M, None, None, sk)
    row_part, row_jumps, row_trace = detect_partition(coupling.alpha)
    col_part, col_jumps, col_trace = detect_partition(coupling.beta)
    logger.debug(
        "sample %d: g=%d m=%d (%d Sinkhorn iterations)",
        index, row_part.g, col_part.g, coupling.iterations_used,
    )
    return _Sample(index, rows, row_part, col_part, row_trace, col_trace, coupling.converged)


def _draw(A: DataMatrix, cfg: CcotConfig, sk: SinkhornConfig, offset: int, count: int) -> List[_Sample]:
    n, d = A.shape
    seeds = spawn_seeds(cfg.seed, count, offset)

    def task(j: int) -> _Sample:
        rows = np.arange(n) if n == d else sample_indices(n, d, seeds[j])
        return _run_sample(A.values, rows, sk, offset + j)

    if cfg.n_jobs > 1 and count > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_jobs) as pool:
            return list(pool.map(task, range(count)))
    return [task(j) for j in range(count)]


def _resolvable(coupling) -> bool:
    for scaling in (coupling.alpha, coupling.beta):
        if not np.all(np.isfinite(scaling)) or scaling.min() <= 0:
            return False
        if scaling.max() > scaling.min() / NOISE_FLOOR:
            return False
    return True


def select_lambda(A: DataMatrix, cfg: CcotConfig) -> Tuple[float, Dict[float, bool]]:
    """
    Sharpest lambda of the grid whose plain Sinkhorn solve converges on the
    first sample with scalings the jump detector can still resolve.

    Grid values are tried without log-domain stabilisation: a lambda is only
    usable when the Gibbs kernel itself converges and neither scaling spans
    more than 1/NOISE_FLOOR, otherwise the lower levels of the sorted
    scalings fall under the detector's noise floor.
    """
    n, d = A.shape
    rows = np.arange(n) if n == d else sample_indices(n, d, spawn_seeds(cfg.seed, 1)[0])
    D = A.values[rows]
    M = pairwise_sq_dist(D, D.T)
    trials: Dict[float, bool] = {}
    for lam in sorted(set(cfg.lambda_grid), reverse=True):
        try:
            with np.errstate(all="ignore"):
                coupling = sinkhorn.solve(M, None, None, replace(cfg.sinkhorn, lam=lam, log_domain=False))
        except DegenerateKernelError:
            trials[lam] = False
            continue
        trials[lam] = coupling.converged and _resolvable(coupling)
        if trials[lam]:
            logger.info("selected lambda=%g", lam)
            return lam, trials
        logger.debug("lambda=%g rejected (converged=%s)", lam, coupling.converged)
    lam = min(cfg.lambda_grid)
    logger.warning("no lambda in %s converged; using lambda=%g", sorted(trials), lam)
    return lam, trials


def ccot(A: DataMatrix, cfg: Optional[CcotConfig] = None) -> CoClusterResult:
    cfg = cfg or CcotConfig()
    if A.d > A.n:
        return ccot(A.transpose(), cfg).transposed()
    n, d = A.shape

    trials: Dict[float, bool] = {}
    lam = cfg.lam
    if lam is None:
        lam, trials = select_lambda(A, cfg)
    sk = replace(cfg.sinkhorn, lam=lam)

    first = 1 if n == d else cfg.n_samples
    samples = _draw(A, cfg, sk, 0, first)
    extra = 0
    while n != d:
        converged = [s for s in samples if s.converged]
        covered = np.zeros(n, dtype=bool)
        if converged:
            g = _modal([s.row_partition.g for s in converged])
            for s in converged:
                if s.row_partition.g == g:
                    covered[s.rows] = True
        if covered.all() or extra >= cfg.max_extra_samples:
            break
        count = min(EXTRA_CHUNK, cfg.max_extra_samples - extra)
        samples += _draw(A, cfg, sk, cfg.n_samples + extra, count)
        extra += count
    if extra:
        logger.info("drew %d extra samples to cover every row", extra)

    converged = [s for s in samples if s.converged]
    if not converged:
        raise ConvergenceError(f"none of the {len(samples)} Sinkhorn solves converged at lambda={lam}")

    row_partition = majority_vote([(s.rows, s.row_partition) for s in converged], n)
    col_partition = majority_vote([s.col_partition for s in converged], d)

    g_mode = _modal([s.row_partition.g for s in converged])
    m_mode = _modal([s.col_partition.g for s in converged])
    row_kept = [s for s in converged if s.row_partition.g == g_mode]
    coverage = np.zeros(n, dtype=int)
    for s in row_kept:
        coverage[s.rows] += 1
    # traces come from the first sample agreeing with both modal counts
    agreeing = [s for s in row_kept if s.col_partition.g == m_mode]
    reference = (agreeing or row_kept)[0]

    histogram = Counter(f"{s.row_partition.g}x{s.col_partition.g}" for s in converged)
    diagnostics = Diagnostics(
        method="ccot",
        row_trace=reference.row_trace,
        col_trace=reference.col_trace,
        lam=lam,
        converged=len(converged) == len(samples),
        count_histogram=dict(sorted(histogram.items())),
        lambda_trials=trials,
        samples_drawn=len(samples),
        samples_converged=len(converged),
        row_samples_retained=len(row_kept),
        col_samples_retained=sum(1 for s in converged if s.col_partition.g == m_mode),
        min_row_coverage=int(coverage.min()),
    )
    logger.info("CCOT found %d row and %d column clusters", row_partition.g, col_partition.g)
    return CoClusterResult(row_partition, col_partition, diagnostics)


def auto_sigma(V) -> float:
    """
    Mean Euclidean distance over all unordered pairs of vectors.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if V.shape[0] < 2:
        raise InputError("bandwidth needs at least 2 vectors")
    return float(np.mean(pdist(V, metric="euclidean")))


def gaussian_kernel_matrix(V, sigma: Optional[float] = None) -> SimilarityMatrix:
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if V.shape[0] < 2:
        raise InputError("kernel matrix needs at least 2 vectors")
    if sigma is None:
        sigma = auto_sigma(V)
        if sigma == 0:
            raise DegenerateKernelError("all vectors are identical; pass an explicit sigma")
    elif not sigma > 0:
        raise InputError(f"sigma must be positive, got {sigma}")
    sq = cdist(V, V, metric="sqeuclidean")
    return SimilarityMatrix(np.exp(-sq / (2.0 * sigma ** 2)))


def _kernels(A: DataMatrix, kernel: KernelConfig):
    if kernel.kind == "precomputed":
        Kr = SimilarityMatrix(kernel.row_kernel)
        Kc = SimilarityMatrix(kernel.col_kernel)
        if Kr.size != A.n or Kc.size != A.d:
            raise InputError(
                f"precomputed kernels are {Kr.size}x{Kr.size} and {Kc.size}x{Kc.size} for a {A.n}x{A.d} matrix"
            )
        return Kr, Kc, None, None
    row_sigma = kernel.sigma if kernel.sigma is not None else auto_sigma(A.values)
    col_sigma = kernel.sigma if kernel.sigma is not None else auto_sigma(A.values.T)
    for axis, s in (("row", row_sigma), ("column", col_sigma)):
        if s == 0:
            raise DegenerateKernelError(f"all {axis} vectors are identical; pass an explicit sigma")
    Kr = gaussian_kernel_matrix(A.values, row_sigma)
    Kc = gaussian_kernel_matrix(A.values.T, col_sigma)
    return Kr, Kc, row_sigma, col_sigma


def ccot_gw(A: DataMatrix, gw: Optional[GWConfig] = None, kernel: Optional[KernelConfig] = None) -> CoClusterResult:
    gw = gw or GWConfig()
    kernel = kernel or KernelConfig()
    Kr, Kc, row_sigma, col_sigma = _kernels(A, kernel)

    result = barycenter(Kr, Kc, gw)
    row_partition, _, row_trace = detect_partition(result.beta_r)
    col_partition, _, col_trace = detect_partition(result.beta_c)

    diagnostics = Diagnostics(
        method="ccot-gw",
        row_trace=row_trace,
        col_trace=col_trace,
        lam=gw.lam,
        converged=bool(result.gamma_r.converged and result.gamma_c.converged),
        count_histogram={f"{row_partition.g}x{col_partition.g}": 1},
        barycenter_runs=1,
        objective_trace=tuple(result.objective_trace),
        row_sigma=row_sigma,
        col_sigma=col_sigma,
    )
    logger.info("CCOT-GW found %d row and %d column clusters", row_partition.g, col_partition.g)
    return CoClusterResult(row_partition, col_partition, diagnostics)
