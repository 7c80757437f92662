"""
Entropy-regularized optimal transport by Sinkhorn-Knopp matrix scaling.

Minimizes <M, gamma> - (1/lam) * E(gamma) over couplings with marginals
(mu_r, mu_c). The solution factors as diag(alpha) xi diag(beta) with
xi = exp(-lam * M / scale); ``scale`` is the median positive cost entry
when ``normalize_cost`` is set, 1 otherwise.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.special import entr, logsumexp

from . import config
from .core import CostMatrix, EmpiricalMeasure
from .errors import DegenerateKernelError, InputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SinkhornConfig:
    lam: float = 1.0
    max_iter: int = config.SINKHORN_MAX_ITER
    tol: float = config.SINKHORN_TOL
    # None: switch to log-domain updates when lam * max(scaled M) exceeds LOG_DOMAIN_TRIGGER
    log_domain: Optional[bool] = None
    normalize_cost: bool = True

    def __post_init__(self):
        if not self.lam > 0:
            raise InputError(f"lambda must be positive, got {self.lam}")
        if not self.tol > 0:
            raise InputError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise InputError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class Coupling:
    gamma: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    xi: np.ndarray
    iterations_used: int
    marginal_violation: float
    converged: bool = True
    log_domain: bool = False
    cost_scale: float = 1.0
    lam: float = 1.0

    @property
    def shape(self):
        return self.gamma.shape

    @property
    def T(self) -> "Coupling":
        return Coupling(
            gamma=self.gamma.T,
            alpha=self.beta,
            beta=self.alpha,
            xi=self.xi.T,
            iterations_used=self.iterations_used,
            marginal_violation=self.marginal_violation,
            converged=self.converged,
            log_domain=self.log_domain,
            cost_scale=self.cost_scale,
            lam=self.lam,
        )


def _values(x) -> np.ndarray:
    if isinstance(x, Coupling):
        return x.gamma
    if isinstance(x, CostMatrix):
        return x.values
    return np.asarray(x, dtype=float)


def _weights(mu, size: int) -> np.ndarray:
    if mu is None:
        return np.full(size, 1.0 / size)
    w = mu.weights if isinstance(mu, EmpiricalMeasure) else np.asarray(mu, dtype=float)
    if w.size != size:
        raise InputError(f"measure of length {w.size} does not match cost dimension {size}")
    if np.any(w <= 0):
        raise InputError("Sinkhorn requires strictly positive measures")
    return w


def cost_scale(M: np.ndarray) -> float:
    positive = M[M > 0]
    return float(np.median(positive)) if positive.size else 1.0


def gibbs_kernel(M, lam: float) -> np.ndarray:
    M = _values(M)
    if not lam > 0:
        raise InputError(f"lambda must be positive, got {lam}")
    if not np.all(np.isfinite(M)):
        raise InputError("cost matrix has non-finite entries")
    xi = np.exp(-lam * M)
    if np.any(~xi.any(axis=1)) or np.any(~xi.any(axis=0)):
        raise DegenerateKernelError(
            f"Gibbs kernel underflows to zero on a whole row or column at lambda={lam}; "
            "use log-domain mode or a smaller lambda"
        )
    return xi


def _violation(row: np.ndarray, col: np.ndarray, mu_r: np.ndarray, mu_c: np.ndarray) -> float:
    return float(np.abs(row - mu_r).sum() + np.abs(col - mu_c).sum())


def _solve_standard(K, mu_r, mu_c, cfg: SinkhornConfig):
    alpha = np.ones_like(mu_r)
    beta = np.ones_like(mu_c)
    violation = np.inf
    it = 0
    for it in range(1, cfg.max_iter + 1):
        alpha = mu_r / (K @ beta)
        beta = mu_c / (K.T @ alpha)
        if it % config.CHECK_EVERY == 0 or it == cfg.max_iter:
            violation = _violation(alpha * (K @ beta), beta * (K.T @ alpha), mu_r, mu_c)
            if violation <= cfg.tol:
                break
    return np.log(alpha), np.log(beta), it, violation


def _solve_log(logK, mu_r, mu_c, cfg: SinkhornConfig):
    log_mu_r = np.log(mu_r)
    log_mu_c = np.log(mu_c)
    f = np.zeros_like(mu_r)
    g = np.zeros_like(mu_c)
    violation = np.inf
    it = 0
    for it in range(1, cfg.max_iter + 1):
        f = log_mu_r - logsumexp(logK + g[None, :], axis=1)
        g = log_mu_c - logsumexp(logK + f[:, None], axis=0)
        if it % config.CHECK_EVERY == 0 or it == cfg.max_iter:
            log_gamma = f[:, None] + logK + g[None, :]
            violation = _violation(
                np.exp(logsumexp(log_gamma, axis=1)),
                np.exp(logsumexp(log_gamma, axis=0)),
                mu_r,
                mu_c,
            )
            if violation <= cfg.tol:
                break
    return f, g, it, violation


def solve(M, mu_r=None, mu_c=None, cfg: Optional[SinkhornConfig] = None) -> Coupling:
    """
    Sinkhorn-Knopp on cost M with marginals mu_r (rows) and mu_c (columns).

    Measures default to uniform. Non-convergence within cfg.max_iter is not an
    error: the coupling comes back with converged=False and the reached violation.
    """
    cfg = cfg or SinkhornConfig()
    M = _values(M)
    if M.ndim != 2:
        raise InputError(f"cost matrix must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError("cost matrix has non-finite entries")
    a, b = M.shape
    mu_r = _weights(mu_r, a)
    mu_c = _weights(mu_c, b)

    scale = cost_scale(M) if cfg.normalize_cost else 1.0
    logK = -cfg.lam * (M / scale)
    use_log = cfg.log_domain
    if use_log is None:
        use_log = cfg.lam * float(np.max(M / scale)) > config.LOG_DOMAIN_TRIGGER

    if use_log:
        xi = np.exp(logK)
        f, g, it, violation = _solve_log(logK, mu_r, mu_c, cfg)
    else:
        xi = gibbs_kernel(M / scale, cfg.lam)
        f, g, it, violation = _solve_standard(xi, mu_r, mu_c, cfg)

    # gauge: equal L1 norms for alpha and beta
    shift = 0.5 * (logsumexp(g) - logsumexp(f))
    f = f + shift
    g = g - shift
    alpha = np.exp(f)
    beta = np.exp(g)
    if use_log:
        gamma = np.exp(f[:, None] + logK + g[None, :])
    else:
        gamma = alpha[:, None] * xi * beta[None, :]

    converged = bool(violation <= cfg.tol)
    if converged:
        logger.debug("Sinkhorn converged in %d iterations (violation=%.3e)", it, violation)
    else:
        logger.warning(
            "Sinkhorn did not converge after %d iterations (lambda=%g, violation=%.3e)",
            it, cfg.lam, violation,
        )

    return Coupling(
        gamma=gamma,
        alpha=alpha,
        beta=beta,
        xi=xi,
        iterations_used=it,
        marginal_violation=float(violation),
        converged=converged,
        log_domain=bool(use_log),
        cost_scale=scale,
        lam=cfg.lam,
    )


def transport_cost(gamma: Union[Coupling, np.ndarray], M) -> float:
    G = _values(gamma)
    M = _values(M)
    if G.shape != M.shape:
        raise InputError(f"coupling shape {G.shape} does not match cost shape {M.shape}")
    return float(np.sum(G * M))


def entropy(gamma: Union[Coupling, np.ndarray]) -> float:
    """
    E(gamma) = -sum gamma log gamma, with 0 log 0 = 0.
    """
    return float(entr(_values(gamma)).sum())
