"""Low-rank representation by inexact augmented Lagrange multipliers.

Solves::

    min ||X||_* + alpha * ||E||_{2,1}   s.t.   A = A X + E

with the auxiliary splitting ``X = J``. The J-step is singular value
thresholding, the X-step a linear solve against the constant matrix
``I + A^T A`` (Cholesky-factored once per solve), and the E-step a
column-wise shrinkage.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import linalg

from .errors import ConfigError, InputError, NumericalError

log = logging.getLogger(__name__)


def as_dense(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite 2-D float64 array, raising InputError otherwise."""
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InputError(f"{name} must have at least one row and column, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise InputError(f"{name} has a non-finite entry at ({bad[0]}, {bad[1]})")
    return arr


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 0.15
    mu0: float = 1e-4
    mu_max: float = 1e10
    rho: float = 1.1
    epsilon: float = 1e-8
    max_iter: int = 1000

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.mu0 < self.mu_max:
            raise ConfigError(f"need 0 < mu0 < mu_max, got mu0={self.mu0}, mu_max={self.mu_max}")
        if not self.rho > 1:
            raise ConfigError(f"rho must exceed 1, got {self.rho}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigError(f"max_iter must be a positive integer, got {self.max_iter}")

    def with_alpha(self, alpha: float) -> "SolverConfig":
        return SolverConfig(alpha, self.mu0, self.mu_max, self.rho, self.epsilon, self.max_iter)


@dataclass(frozen=True)
class LrrSolution:
    x_star: np.ndarray
    e_star: np.ndarray
    iterations: int
    converged: bool
    residual_feasibility: float
    residual_consistency: float
    final_mu: float

    @property
    def rank(self) -> int:
        return numerical_rank(self.x_star)

    def diagnostics(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "residual_feasibility": self.residual_feasibility,
            "residual_consistency": self.residual_consistency,
            "final_mu": self.final_mu,
        }


def _svd(m: np.ndarray):
    try:
        return linalg.svd(m, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    except linalg.LinAlgError:
        pass
    try:
        return linalg.svd(m, full_matrices=False, lapack_driver="gesvd", check_finite=False)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge on a {m.shape[0]}x{m.shape[1]} matrix") from exc


def numerical_rank(m, tol: Optional[float] = None) -> int:
    """Count singular values above ``tol``.

    The default tolerance is ``max(rows, cols) * sigma_max * 1e-12``.
    """
    m = np.asarray(m, dtype=np.float64)
    s = _svd(m)[1]
    if s.size == 0 or s[0] == 0:
        return 0
    if tol is None:
        tol = max(m.shape) * s[0] * 1e-12
    return int(np.count_nonzero(s > tol))


def svt(m, tau: float) -> np.ndarray:
    """Singular value thresholding, the proximal map of ``tau * ||.||_*``.

    Returns ``U diag(max(s - tau, 0)) V^T`` for the thin SVD of ``m``.
    """
    if tau < 0:
        raise ConfigError(f"threshold must be nonnegative, got {tau}")
    m = np.asarray(m, dtype=np.float64)
    if tau == 0:
        return m.copy()
    u, s, vt = _svd(m)
    k = int(np.count_nonzero(s > tau))
    if k == 0:
        return np.zeros_like(m)
    return (u[:, :k] * (s[:k] - tau)) @ vt[:k]


def l21_prox(m, tau: float) -> np.ndarray:
    """Column-wise shrinkage, the proximal map of ``tau * ||.||_{2,1}``.

    Columns with Euclidean norm at most ``tau`` become zero; the others are
    scaled by ``(norm - tau) / norm``.
    """
    if tau < 0:
        raise ConfigError(f"threshold must be nonnegative, got {tau}")
    m = np.asarray(m, dtype=np.float64)
    norms = np.sqrt(np.einsum("ij,ij->j", m, m))
    scale = np.zeros_like(norms)
    keep = norms > tau
    scale[keep] = (norms[keep] - tau) / norms[keep]
    return m * scale


def solve_lrr(
    a,
    config: SolverConfig = SolverConfig(),
    callback: Optional[Callable[[int, float, float, float], None]] = None,
) -> LrrSolution:
    """Run inexact ALM on ``a`` until both max-norm residuals drop below epsilon.

    Parameters
    ----------
    a : array_like, shape (m, n)
    config : SolverConfig
    callback : callable, optional
        Called after every iteration as ``callback(iteration, mu, feas, cons)``
        where ``mu`` is the penalty used in that iteration.

    Returns
    -------
    LrrSolution
        ``x_star`` is n x n, ``e_star`` m x n. Hitting ``max_iter`` is not an
        error; the result comes back with ``converged=False``.
    """
    A = as_dense(a, "input matrix")
    m, n = A.shape
    alpha = config.alpha
    eps = config.epsilon

    AtA = A.T @ A
    try:
        chol = linalg.cho_factor(np.eye(n) + AtA, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NumericalError("I + A^T A is not numerically positive definite") from exc

    X = np.zeros((n, n))
    E = np.zeros((m, n))
    Y1 = np.zeros((m, n))
    Y2 = np.zeros((n, n))
    mu = config.mu0
    feas = cons = np.inf
    converged = False
    it = 0

    for it in range(1, config.max_iter + 1):
        J = svt(X + Y2 / mu, 1.0 / mu)
        rhs = AtA - A.T @ E + J + (A.T @ Y1 - Y2) / mu
        X = linalg.cho_solve(chol, rhs, check_finite=False)
        AX = A @ X
        E = l21_prox(A - AX + Y1 / mu, alpha / mu)

        r1 = A - AX - E
        r2 = X - J
        Y1 += mu * r1
        Y2 += mu * r2
        used_mu = mu
        mu = min(config.rho * mu, config.mu_max)

        feas = float(np.max(np.abs(r1)))
        cons = float(np.max(np.abs(r2)))
        if not (np.isfinite(feas) and np.isfinite(cons)):
            raise NumericalError(f"non-finite iterate at iteration {it}")
        if callback is not None:
            callback(it, used_mu, feas, cons)
        if it == 1 or it % 50 == 0:
            log.debug("iter %d mu=%.3g feas=%.3g cons=%.3g", it, used_mu, feas, cons)
        if feas < eps and cons < eps:
            converged = True
            break

    if not converged:
        log.warning(
            "LRR did not converge in %d iterations (feas=%.3g, cons=%.3g)",
            config.max_iter, feas, cons,
        )
    return LrrSolution(
        x_star=X,
        e_star=E,
        iterations=it,
        converged=converged,
        residual_feasibility=feas,
        residual_consistency=cons,
        final_mu=mu,
    )
