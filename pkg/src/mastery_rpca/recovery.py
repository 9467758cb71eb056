"""Low-rank plus sparse decomposition of a mastery matrix.

The observed matrix is modelled as ``D = X + E + noise`` with ``X`` low rank
(shared group characteristics) and ``E`` sparse (individual deviations).
The rank / l0 program behind that model is intractable, so we minimise its
convex relaxation

    F(X, E) = 1/2 ||D - X - E||_F^2 + alpha ||X||_* + beta ||E||_1

by exact block coordinate descent: with ``E`` fixed the ``X`` update is
singular value thresholding of ``D - E`` at ``alpha``, and with ``X`` fixed
the ``E`` update is elementwise soft thresholding of ``D - X`` at ``beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .matrix import (
    MatrixLike,
    NumericalError,
    as_array,
    frobenius_norm,
    l1_norm,
    nuclear_norm,
    numerical_rank,
    svd,
)

MAD_SCALE = 1.48


class RecoveryError(RuntimeError):
    """The solver had to abort (SVD failure or a non-finite objective)."""


@dataclass(frozen=True)
class RecoveryParams:
    """Solver configuration.

    ``beta`` is usually ``lambda * alpha``; see :meth:`from_data`.
    """

    alpha: float
    beta: float
    tol: float = 1e-6
    max_iters: int = 500

    def __post_init__(self):
        for name in ("alpha", "beta", "tol"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        if int(self.max_iters) < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters!r}")

    @classmethod
    def from_data(
        cls,
        D: MatrixLike,
        alpha: Optional[float] = None,
        lam: Optional[float] = None,
        sigma: Optional[float] = None,
        tol: float = 1e-6,
        max_iters: int = 500,
    ) -> "RecoveryParams":
        """Heuristic parameters for ``D``.

        ``alpha = (sqrt(n) + sqrt(m)) * sigma`` with ``sigma`` the MAD
        estimate of ``D`` unless given, and ``beta = lam * alpha`` with
        ``lam = 1 / sqrt(m)`` unless given.  An explicit ``alpha`` wins over
        the heuristic.
        """
        A = as_array(D)
        n, m = A.shape
        if alpha is None:
            if sigma is None:
                sigma = estimate_sigma(A)
            alpha = default_alpha(n, m, sigma)
        if lam is None:
            lam = default_lambda(m)
        return cls(alpha=alpha, beta=lam * alpha, tol=tol, max_iters=max_iters)


@dataclass
class RecoveryResult:
    low_rank: np.ndarray
    sparse: np.ndarray
    residual: np.ndarray
    objective_trace: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    @property
    def objective(self) -> float:
        return self.objective_trace[-1] if self.objective_trace else float("nan")

    def rank(self, rtol: float = 1e-8) -> int:
        return numerical_rank(self.low_rank, rtol)

    def support(self, threshold: float = 1e-6) -> np.ndarray:
        """Boolean mask of entries where the sparse part is non-negligible."""
        return np.abs(self.sparse) > threshold


def estimate_sigma(D: MatrixLike) -> float:
    """Median-absolute-deviation noise scale, ``1.48 * median|D - median(D)|``."""
    A = as_array(D)
    if A.size == 0:
        raise ValueError("cannot estimate noise scale of an empty matrix")
    return float(MAD_SCALE * np.median(np.abs(A - np.median(A))))


def default_alpha(n_rows: int, n_cols: int, sigma: float) -> float:
    """Expected spectral norm of an ``n_rows x n_cols`` N(0, sigma^2) matrix."""
    if n_rows < 1 or n_cols < 1:
        raise ValueError("dimensions must be >= 1")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    return (math.sqrt(n_rows) + math.sqrt(n_cols)) * sigma


def default_lambda(n_cols: int) -> float:
    if n_cols < 1:
        raise ValueError("n_cols must be >= 1")
    return 1.0 / math.sqrt(n_cols)


def svt(M: MatrixLike, tau: float) -> np.ndarray:
    """Singular value thresholding: shrink every singular value by ``tau``.

    This is the proximal operator of ``tau * ||.||_*``.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    f = svd(M)
    s = np.maximum(f.singular_values - tau, 0.0)
    keep = s > 0
    if not np.any(keep):
        return np.zeros(as_array(M).shape)
    return (f.left_vectors[:, keep] * s[keep]) @ f.right_vectors[:, keep].T


def soft_threshold(M: MatrixLike, beta: float) -> np.ndarray:
    """Elementwise shrinkage ``sign(M) * max(|M| - beta, 0)``."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    A = as_array(M)
    return np.sign(A) * np.maximum(np.abs(A) - beta, 0.0)


def objective(D: MatrixLike, X: MatrixLike, E: MatrixLike, alpha: float, beta: float) -> float:
    """Value of the convex relaxed objective at ``(X, E)``."""
    D, X, E = as_array(D), as_array(X), as_array(E)
    if not (D.shape == X.shape == E.shape):
        raise ValueError(f"shape mismatch: D{D.shape} X{X.shape} E{E.shape}")
    return (
        0.5 * frobenius_norm(D - X - E) ** 2
        + alpha * nuclear_norm(X)
        + beta * l1_norm(E)
    )


def _rel_change(new: np.ndarray, old: np.ndarray) -> float:
    # plain ratio keeps the stopping rule invariant to rescaling D, alpha, beta
    step = np.linalg.norm(new - old)
    ref = np.linalg.norm(old)
    if ref == 0:
        return 0.0 if step == 0 else math.inf
    return float(step / ref)


def recover(
    D: MatrixLike,
    params: RecoveryParams,
    init_sparse: Optional[MatrixLike] = None,
    callback: Optional[Callable[[int, float], None]] = None,
) -> RecoveryResult:
    """Split ``D`` into low-rank, sparse and residual parts.

    Parameters
    ----------
    D : matrix
        Observed students x topics matrix.
    params : RecoveryParams
        Weights and stopping rule.
    init_sparse : matrix, optional
        Starting sparse component; zeros by default.  The problem is convex,
        so the answer does not depend on it beyond the tolerance.
    callback : callable, optional
        Called as ``callback(iteration, objective)`` after every sweep.

    Returns
    -------
    RecoveryResult
        ``converged`` is True when the largest relative Frobenius change of
        the two components fell below ``params.tol`` before ``max_iters``.
    """
    D = as_array(D)
    E = np.zeros_like(D) if init_sparse is None else np.array(as_array(init_sparse), dtype=np.float64)
    if E.shape != D.shape:
        raise ValueError(f"init_sparse has shape {E.shape}, expected {D.shape}")
    X = np.zeros_like(D)
    trace: List[float] = []
    converged = False
    it = 0
    for it in range(1, int(params.max_iters) + 1):
        try:
            X_new = svt(D - E, params.alpha)
        except NumericalError as exc:
            raise RecoveryError(f"SVD failed at iteration {it}: {exc}") from exc
        E_new = soft_threshold(D - X_new, params.beta)
        f = objective(D, X_new, E_new, params.alpha, params.beta)
        if not math.isfinite(f):
            raise RecoveryError(f"non-finite objective at iteration {it}; check alpha/beta")
        change = max(_rel_change(X_new, X), _rel_change(E_new, E))
        X, E = X_new, E_new
        trace.append(f)
        if callback is not None:
            callback(it, f)
        if change < params.tol:
            converged = True
            break
    return RecoveryResult(
        low_rank=X,
        sparse=E,
        residual=D - X - E,
        objective_trace=trace,
        iterations=it,
        converged=converged,
    )
