"""
Gaussian latent block model (LBM) generator and co-clustering metrics.
"""

import logging
import os
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import yaml
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import normalized_mutual_info_score
from sklearn.metrics.cluster import contingency_matrix

from . import config
from .core import DataMatrix
from .errors import InputError

logger = logging.getLogger(__name__)

# block-mean grid step, in units of noise_sd
SEPARATION = {"well": 4.0, "ill": 1.5}


def unequal_proportions(g: int) -> Tuple[float, ...]:
    """
    Default "unequal" proportions: cluster c gets weight proportional to c.
    """
    w = np.arange(1, g + 1, dtype=float)
    return tuple(w / w.sum())


@dataclass(frozen=True)
class LbmConfig:
    n: int
    d: int
    g: int
    m: int
    row_props: Optional[Tuple[float, ...]] = None  # None: equal
    col_props: Optional[Tuple[float, ...]] = None
    separation: str = "well"
    noise_sd: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.g < 1 or self.m < 1:
            raise InputError(f"cluster counts must be positive, got g={self.g}, m={self.m}")
        if self.n < self.g or self.d < self.m:
            raise InputError(f"{self.n}x{self.d} matrix cannot hold {self.g}x{self.m} blocks")
        if self.separation not in SEPARATION:
            raise InputError(f"separation must be one of {sorted(SEPARATION)}, got '{self.separation}'")
        if not self.noise_sd > 0:
            raise InputError(f"noise_sd must be positive, got {self.noise_sd}")
        for name, props, size in (("row_props", self.row_props, self.g), ("col_props", self.col_props, self.m)):
            if props is None:
                continue
            props = tuple(float(x) for x in props)
            if len(props) != size:
                raise InputError(f"{name} has {len(props)} entries, expected {size}")
            if any(x < 0 for x in props) or abs(sum(props) - 1.0) > 1e-12:
                raise InputError(f"{name} must be nonnegative and sum to 1")
            object.__setattr__(self, name, props)

    def row_proportions(self) -> np.ndarray:
        return np.asarray(self.row_props if self.row_props else [1.0 / self.g] * self.g)

    def col_proportions(self) -> np.ndarray:
        return np.asarray(self.col_props if self.col_props else [1.0 / self.m] * self.m)

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("row_props", "col_props"):
            if out[key] is not None:
                out[key] = list(out[key])
        return out


@dataclass(frozen=True)
class GroundTruth:
    row_labels: np.ndarray
    col_labels: np.ndarray
    block_means: np.ndarray

    @property
    def g(self) -> int:
        return self.block_means.shape[0]

    @property
    def m(self) -> int:
        return self.block_means.shape[1]


def cluster_counts(props: Sequence[float], total: int) -> np.ndarray:
    """
    Largest-remainder rounding of total * props; ties go to the earlier cluster.
    """
    raw = np.asarray(props, dtype=float) * total
    counts = np.floor(raw).astype(int)
    short = total - counts.sum()
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:short]] += 1
    if np.any(counts == 0):
        raise InputError(f"proportions {list(props)} leave an empty cluster among {total} items")
    return counts


def generate_lbm(cfg: LbmConfig) -> Tuple[DataMatrix, GroundTruth]:
    rng = np.random.default_rng(cfg.seed)
    row_counts = cluster_counts(cfg.row_proportions(), cfg.n)
    col_counts = cluster_counts(cfg.col_proportions(), cfg.d)
    z = rng.permutation(np.repeat(np.arange(1, cfg.g + 1), row_counts))
    w = rng.permutation(np.repeat(np.arange(1, cfg.m + 1), col_counts))

    delta = SEPARATION[cfg.separation] * cfg.noise_sd
    means = rng.permutation(np.arange(cfg.g * cfg.m) * delta).reshape(cfg.g, cfg.m)

    values = rng.normal(means[z - 1][:, w - 1], cfg.noise_sd)
    logger.debug(
        "generated LBM %dx%d with %dx%d blocks (%s-separated, seed=%d)",
        cfg.n, cfg.d, cfg.g, cfg.m, cfg.separation, cfg.seed,
    )
    matrix = DataMatrix(
        values,
        [f"r{i}" for i in range(cfg.n)],
        [f"c{j}" for j in range(cfg.d)],
    )
    return matrix, GroundTruth(z, w, means)


def load_preset(name: str, **overrides) -> LbmConfig:
    """
    Load an LBM preset by name (looked up in PRESETS_DIR) or by YAML path.
    """
    path = name
    if not os.path.exists(path):
        path = os.path.join(config.PRESETS_DIR, f"{name.lower()}.yaml")
    if not os.path.exists(path):
        raise InputError(f"unknown preset '{name}' (looked in {config.PRESETS_DIR})")
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    data.pop("name", None)
    data.pop("description", None)
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return LbmConfig(**data)
    except TypeError as e:
        raise InputError(f"invalid preset {path}: {e}") from e


def _labels(x) -> np.ndarray:
    return np.asarray(getattr(x, "labels", x)).ravel()


def error_rate(truth, est) -> float:
    """
    Share of items misclassified under the best one-to-one matching of clusters.
    """
    truth, est = _labels(truth), _labels(est)
    if truth.size != est.size:
        raise InputError(f"label vectors differ in length: {truth.size} vs {est.size}")
    if truth.size == 0:
        raise InputError("empty label vectors")
    C = contingency_matrix(truth, est)
    rows, cols = linear_sum_assignment(C, maximize=True)
    return 1.0 - C[rows, cols].sum() / truth.size


def cce_from_errors(e_row: float, e_col: float) -> float:
    return e_row + e_col - e_row * e_col


def cce(truth_rows, est_rows, truth_cols, est_cols) -> float:
    return cce_from_errors(error_rate(truth_rows, est_rows), error_rate(truth_cols, est_cols))


def nmi(a, b) -> float:
    a, b = _labels(a), _labels(b)
    if a.size != b.size:
        raise InputError(f"label vectors differ in length: {a.size} vs {b.size}")
    ka, kb = np.unique(a).size, np.unique(b).size
    if ka == 1 or kb == 1:
        return 1.0 if ka == kb else 0.0
    return float(normalized_mutual_info_score(a, b, average_method="arithmetic"))
