"""
Shared numeric types and helpers: data matrices, empirical measures,
squared-distance cost matrices, stable sorting and seeded sampling.

Randomness goes through numpy's PCG64 generator (``np.random.default_rng``),
which is stable across platforms for a given integer seed.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InputError

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


def _as_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DataMatrix:
    values: np.ndarray
    row_ids: List[str] = field(default_factory=list)
    col_ids: List[str] = field(default_factory=list)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise InputError(f"data matrix must be 2-D, got shape {values.shape}")
        n, d = values.shape
        if n < 2 or d < 2:
            raise InputError(f"data matrix needs at least 2 rows and 2 columns, got {n}x{d}")
        if not np.all(np.isfinite(values)):
            raise InputError("data matrix contains NaN or infinite entries")

        row_ids = [str(r) for r in self.row_ids] if self.row_ids else [str(i) for i in range(n)]
        col_ids = [str(c) for c in self.col_ids] if self.col_ids else [str(j) for j in range(d)]
        if len(row_ids) != n or len(col_ids) != d:
            raise InputError(
                f"identifier counts ({len(row_ids)}, {len(col_ids)}) do not match shape {n}x{d}"
            )
        if len(set(row_ids)) != n:
            raise InputError("row identifiers are not unique")
        if len(set(col_ids)) != d:
            raise InputError("column identifiers are not unique")

        object.__setattr__(self, "values", _freeze(values))
        object.__setattr__(self, "row_ids", row_ids)
        object.__setattr__(self, "col_ids", col_ids)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def transpose(self) -> "DataMatrix":
        return DataMatrix(self.values.T, list(self.col_ids), list(self.row_ids))

    def take_rows(self, idx: Sequence[int]) -> "DataMatrix":
        idx = np.asarray(idx, dtype=int)
        return DataMatrix(self.values[idx], [self.row_ids[i] for i in idx], list(self.col_ids))


@dataclass(frozen=True)
class EmpiricalMeasure:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size == 0:
            raise InputError("empty measure")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InputError("measure weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise InputError(f"measure weights sum to {w.sum():.15g}, expected 1")
        object.__setattr__(self, "weights", _freeze(w))

    @classmethod
    def uniform(cls, size: int) -> "EmpiricalMeasure":
        if size < 1:
            raise InputError(f"measure size must be positive, got {size}")
        return cls(np.full(size, 1.0 / size))

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class CostMatrix:
    values: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.values, dtype=float)
        if m.ndim != 2:
            raise InputError(f"cost matrix must be 2-D, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InputError("cost matrix has non-finite entries")
        if np.any(m < 0):
            raise InputError("cost matrix has negative entries")
        object.__setattr__(self, "values", _freeze(m))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    @property
    def T(self) -> "CostMatrix":
        return CostMatrix(self.values.T)


@dataclass(frozen=True)
class SortPermutation:
    """
    order[r] is the original index of the value at sorted rank r.
    """

    order: np.ndarray

    def __post_init__(self):
        order = np.asarray(self.order, dtype=int).ravel()
        if not np.array_equal(np.sort(order), np.arange(order.size)):
            raise InputError("order is not a permutation of 0..k-1")
        order.setflags(write=False)
        object.__setattr__(self, "order", order)

    def __len__(self) -> int:
        return self.order.size

    @property
    def ranks(self) -> np.ndarray:
        """
        Inverse permutation: ranks[i] is the sorted rank of original index i.
        """
        inv = np.empty_like(self.order)
        inv[self.order] = np.arange(self.order.size)
        return inv

    def apply(self, v: Sequence[float]) -> np.ndarray:
        return np.asarray(v)[self.order]

    def restore(self, sorted_v: Sequence[float]) -> np.ndarray:
        return np.asarray(sorted_v)[self.ranks]


def pairwise_sq_dist(A, B) -> CostMatrix:
    """
    Squared Euclidean distances between the rows of A and the rows of B.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise InputError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if A.shape[1] < 1:
        raise InputError("vectors must have at least one coordinate")
    M = cdist(A, B, metric="sqeuclidean")
    np.maximum(M, 0.0, out=M)
    return CostMatrix(M)


def sort_with_permutation(v) -> Tuple[np.ndarray, SortPermutation]:
    v = np.asarray(v, dtype=float).ravel()
    if np.any(np.isnan(v)):
        raise InputError("cannot sort a vector containing NaN")
    order = np.argsort(v, kind="stable")
    return v[order], SortPermutation(order)


def sample_indices(n: int, k: int, seed: SeedLike = None) -> np.ndarray:
    if not 1 <= k <= n:
        raise InputError(f"cannot draw {k} distinct indices out of {n}")
    return _as_rng(seed).choice(n, size=k, replace=False)


def sample_rows(A: DataMatrix, k: int, seed: SeedLike = None) -> Tuple[DataMatrix, np.ndarray]:
    if k > A.n:
        raise InputError(f"sample size {k} exceeds the {A.n} available rows")
    if k < 2:
        raise InputError(f"sample size must be at least 2, got {k}")
    idx = sample_indices(A.n, k, seed)
    return A.take_rows(idx), idx


def spawn_seeds(seed: Optional[int], count: int, offset: int = 0) -> List[np.random.SeedSequence]:
    """
    Independent child seeds; child i depends only on (seed, offset + i).
    """
    root = np.random.SeedSequence(seed)
    return [np.random.SeedSequence(root.entropy, spawn_key=(offset + i,)) for i in range(count)]
