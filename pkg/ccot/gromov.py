"""
Entropic Gromov-Wasserstein couplings and the two-input GW barycenter.

Losses are written as L(a, b) = f1(a) + f2(b) - h1(a) * h2(b) so that the
quartic contraction sum L(Ka[i,k], Kb[j,l]) gamma[i,j] gamma[k,l] reduces
to three matrix products.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Tuple

import numpy as np

from . import config, sinkhorn
from .errors import InputError
from .sinkhorn import Coupling, SinkhornConfig

logger = logging.getLogger(__name__)

LOSSES = ("squared", "kullback_leibler")


@dataclass(frozen=True)
class SimilarityMatrix:
    values: np.ndarray

    def __post_init__(self):
        K = np.asarray(self.values, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise InputError(f"similarity matrix must be square, got shape {K.shape}")
        if not np.all(np.isfinite(K)):
            raise InputError("similarity matrix has non-finite entries")
        if np.max(np.abs(K - K.T), initial=0.0) > 1e-10:
            raise InputError("similarity matrix is not symmetric")
        K.setflags(write=False)
        object.__setattr__(self, "values", K)

    @property
    def size(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class GWConfig:
    lam: float = config.GW_LAMBDA
    loss: str = "squared"
    eps_r: float = config.EPS_R
    eps_c: float = 1.0 - config.EPS_R
    barycenter_size: Optional[int] = None  # None: min(n, d)
    outer_iter: int = config.GW_OUTER_ITER
    inner: SinkhornConfig = field(default_factory=SinkhornConfig)
    seed: int = 0
    # fixed-point steps per coupling update
    coupling_iter: int = config.GW_INNER_ITER

    def __post_init__(self):
        if not self.lam > 0:
            raise InputError(f"lambda must be positive, got {self.lam}")
        if self.loss not in LOSSES:
            raise InputError(f"unknown loss '{self.loss}', expected one of {LOSSES}")
        if self.eps_r < 0 or self.eps_c < 0 or abs(self.eps_r + self.eps_c - 1.0) > 1e-12:
            raise InputError(f"barycenter weights ({self.eps_r}, {self.eps_c}) must be nonnegative and sum to 1")
        if self.barycenter_size is not None and self.barycenter_size < 2:
            raise InputError(f"barycenter size must be >= 2, got {self.barycenter_size}")
        if self.outer_iter < 1:
            raise InputError(f"outer_iter must be >= 1, got {self.outer_iter}")
        if self.coupling_iter < 1:
            raise InputError(f"coupling_iter must be >= 1, got {self.coupling_iter}")


@dataclass(frozen=True)
class BarycenterResult:
    K: SimilarityMatrix
    gamma_r: Coupling
    gamma_c: Coupling
    beta_r: np.ndarray
    beta_c: np.ndarray
    objective_trace: List[float]


Terms = Tuple[Callable, Callable, Callable, Callable]


def _loss_terms(loss: str) -> Terms:
    if loss == "squared":
        return (lambda a: 0.5 * a ** 2, lambda b: 0.5 * b ** 2, lambda a: a, lambda b: b)
    if loss == "kullback_leibler":
        return (lambda a: a * np.log(a) - a, lambda b: b, lambda a: a, lambda b: np.log(b))
    raise InputError(f"unknown loss '{loss}', expected one of {LOSSES}")


def _matrix(K) -> np.ndarray:
    if isinstance(K, SimilarityMatrix):
        return K.values
    return np.asarray(K, dtype=float)


def _check_loss_domain(loss: str, *mats: np.ndarray) -> None:
    if loss == "kullback_leibler" and any(np.any(m <= 0) for m in mats):
        raise InputError("Kullback-Leibler loss requires strictly positive similarity matrices")


def _tensor(Ka, Kb, gamma, p, q, terms: Terms) -> Tuple[np.ndarray, np.ndarray]:
    f1, f2, h1, h2 = terms
    const = np.outer(f1(Ka) @ p, np.ones_like(q)) + np.outer(np.ones_like(p), f2(Kb) @ q)
    return const - h1(Ka) @ gamma @ h2(Kb).T, const


def _value(tens: np.ndarray, gamma: np.ndarray, loss: str) -> float:
    value = float(np.sum(tens * gamma))
    return max(value, 0.0) if loss == "squared" else value


def gw_cost(Ka, Kb, gamma, loss: str = "squared") -> float:
    terms = _loss_terms(loss)
    Ka, Kb = _matrix(Ka), _matrix(Kb)
    G = gamma.gamma if isinstance(gamma, Coupling) else np.asarray(gamma, dtype=float)
    if G.shape != (Ka.shape[0], Kb.shape[0]):
        raise InputError(f"coupling shape {G.shape} does not match spaces {Ka.shape[0]}x{Kb.shape[0]}")
    _check_loss_domain(loss, Ka, Kb)
    tens, _ = _tensor(Ka, Kb, G, G.sum(axis=1), G.sum(axis=0), terms)
    return _value(tens, G, loss)


def _pseudo_cost(tens: np.ndarray, const: np.ndarray) -> np.ndarray:
    cost = tens.copy()
    cost[np.abs(cost) <= 1e-12 * np.max(np.abs(const), initial=0.0)] = 0.0
    return np.maximum(cost, 0.0)


def _weights(mu, size: int) -> np.ndarray:
    if mu is None:
        return np.full(size, 1.0 / size)
    return np.asarray(getattr(mu, "weights", mu), dtype=float)


def entropic_gw_coupling(
    Ka,
    Kb,
    mu_a=None,
    mu_b=None,
    cfg: Optional[GWConfig] = None,
    init: Optional[np.ndarray] = None,
) -> Coupling:
    """
    Fixed-point iteration on the linearized GW cost: each step solves an
    entropic OT problem on the pseudo-cost built from the current coupling.

    The pseudo-cost is used as is, without median normalization, so every
    step solves at the same lambda and a fixed point of the iteration is a
    stationary coupling of the regularized GW problem.

    Starts from the independent coupling (or init) and returns the Sinkhorn
    solution with the lowest GW cost seen.
    """
    cfg = cfg or GWConfig()
    terms = _loss_terms(cfg.loss)
    Ka, Kb = _matrix(Ka), _matrix(Kb)
    _check_loss_domain(cfg.loss, Ka, Kb)
    p = _weights(mu_a, Ka.shape[0])
    q = _weights(mu_b, Kb.shape[0])
    if p.size != Ka.shape[0] or q.size != Kb.shape[0]:
        raise InputError("measure lengths do not match the similarity matrices")

    inner = replace(cfg.inner, lam=cfg.lam, normalize_cost=False)
    T = np.outer(p, q) if init is None else np.asarray(init, dtype=float)
    tens, const = _tensor(Ka, Kb, T, p, q, terms)

    best: Optional[Coupling] = None
    best_cost = np.inf
    for it in range(cfg.coupling_iter):
        coupling = sinkhorn.solve(_pseudo_cost(tens, const), p, q, inner)
        change = float(np.abs(coupling.gamma - T).sum())
        T = coupling.gamma
        # the next pseudo-cost also prices T
        tens, const = _tensor(Ka, Kb, T, p, q, terms)
        cost = _value(tens, T, cfg.loss)
        if cost < best_cost or best is None:
            best, best_cost = coupling, cost
        if change <= inner.tol:
            logger.debug("GW coupling fixed point reached after %d steps", it + 1)
            break
    return best


def _update_K(couplings: List[np.ndarray], spaces: List[np.ndarray], eps: List[float], loss: str) -> np.ndarray:
    num = 0.0
    den = 0.0
    for G, Ks, e in zip(couplings, spaces, eps):
        if e == 0:
            continue
        p = G.sum(axis=1)
        target = Ks if loss == "squared" else np.log(Ks)
        num = num + e * (G @ target @ G.T)
        den = den + e * np.outer(p, p)
    K = num / den
    K = 0.5 * (K + K.T)
    return K if loss == "squared" else np.exp(K)


def _objective(K, spaces, couplings, eps, loss) -> float:
    return float(sum(e * gw_cost(K, Ks, G, loss) for Ks, G, e in zip(spaces, couplings, eps) if e))


def barycenter(Kr, Kc, cfg: Optional[GWConfig] = None) -> BarycenterResult:
    """
    Block-coordinate descent on sum_i eps_i * GW(K, K_i) over the barycenter
    K and the couplings gamma_r (N x n) and gamma_c (N x d).

    A new coupling replaces the old one only if it does not raise its term at
    the current K, and K is then set to the exact minimizer, so the objective
    trace never increases.
    """
    cfg = cfg or GWConfig()
    Kr, Kc = _matrix(Kr), _matrix(Kc)
    SimilarityMatrix(Kr)
    SimilarityMatrix(Kc)
    _check_loss_domain(cfg.loss, Kr, Kc)
    n, d = Kr.shape[0], Kc.shape[0]
    N = cfg.barycenter_size or min(n, d)
    if N < 2:
        raise InputError(f"barycenter size must be >= 2, got {N}")

    rng = np.random.default_rng(cfg.seed)
    pooled = np.concatenate([Kr.ravel(), Kc.ravel()])
    U = rng.uniform(pooled.min(), pooled.max(), size=(N, N))
    K = 0.5 * (U + U.T)

    mu = np.full(N, 1.0 / N)
    spaces = [Kr, Kc]
    measures = [np.full(n, 1.0 / n), np.full(d, 1.0 / d)]
    eps = [cfg.eps_r, cfg.eps_c]
    couplings: List[Optional[Coupling]] = [None, None]
    trace: List[float] = []

    for sweep in range(cfg.outer_iter):
        for s in range(2):
            old = couplings[s]
            new = entropic_gw_coupling(
                K, spaces[s], mu, measures[s], cfg, init=None if old is None else old.gamma
            )
            if old is None or gw_cost(K, spaces[s], new, cfg.loss) <= gw_cost(K, spaces[s], old, cfg.loss):
                couplings[s] = new
        gammas = [c.gamma for c in couplings]
        K = _update_K(gammas, spaces, eps, cfg.loss)
        trace.append(_objective(K, spaces, gammas, eps, cfg.loss))
        logger.debug("barycenter sweep %d: objective=%.6e", sweep + 1, trace[-1])
        if len(trace) > 1:
            prev = trace[-2]
            if abs(prev - trace[-1]) <= config.GW_OBJECTIVE_TOL * max(abs(prev), np.finfo(float).tiny):
                break

    gamma_r, gamma_c = couplings
    return BarycenterResult(
        K=SimilarityMatrix(K),
        gamma_r=gamma_r,
        gamma_c=gamma_c,
        beta_r=gamma_r.beta,
        beta_c=gamma_c.beta,
        objective_trace=trace,
    )
