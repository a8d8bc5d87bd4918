"""Penalized linear regression estimators.

The central pair is the proximal bridge solver: a primal fixed-point form for
over-determined systems (M >= D) and a dual closed form for under-determined
systems (M < D).  Ordinary least squares and ridge are provided in matching
primal/dual flavors, plus a local-quadratic-approximation iteration used for
cross-checking the primal update map.

All fitting routines accept a 2-D target matrix and treat each output column
independently; a 1-D target is handled as a single column.  Fits are pure
functions of their inputs and the returned coefficient sets are immutable,
so grid searches and Monte-Carlo loops may call them concurrently.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .linalg import (
    as_matrix,
    as_vector,
    min_eigenvalue,
    solve_general,
    solve_regularized,
)

__all__ = [
    "BridgeConfig",
    "CoefficientSet",
    "InvalidK",
    "DivergedFixedPoint",
    "fit_ols",
    "fit_ridge",
    "fit_pbridge",
    "fit_pbridge_primal",
    "fit_pbridge_dual",
    "fit_lqa",
    "k_measure",
    "bridge_objective",
    "check_invertibility_condition",
    "stationarity_residual",
    "OrdinaryLeastSquares",
    "RidgeRegression",
    "BridgeRegression",
]


class InvalidK(ValueError):
    """Raised when the norm-power exponent is outside the solver's range."""


class DivergedFixedPoint(ArithmeticError):
    """Raised when a refinement iterate contains non-finite entries."""


@dataclass(frozen=True)
class BridgeConfig:
    """Hyperparameters of the proximal bridge solver.

    ``epsilon_reg`` is the ridge term added to the dual-form inverses; when
    left as None it defaults to ``lam``, matching the reference algorithm
    where the same value conditions both inverses.  In the dual form ``lam``
    therefore acts as a conditioning knob rather than a Lagrangian penalty.
    ``refine_iters`` is the fixed refinement budget of the primal form (4 by
    default, with no convergence test); ``refine_tol``, when set, stops the
    refinement early once the largest coefficient change drops below it, so
    a large budget plus a tolerance runs the iteration to its fixed point.
    ``jitter`` guards the negative power |alpha|**(k-2) at zero coefficients.
    """

    k: float = 2.0
    lam: float = 0.0
    epsilon_reg: float | None = None
    refine_iters: int = 4
    refine_tol: float | None = None
    jitter: float = 1e-10
    penalize_intercept: bool = True

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.refine_iters < 0:
            raise ValueError("refine_iters must be nonnegative")
        if self.epsilon_reg is not None and self.epsilon_reg < 0:
            raise ValueError("epsilon_reg must be nonnegative")

    @property
    def dual_rho(self):
        return self.lam if self.epsilon_reg is None else self.epsilon_reg


@dataclass(frozen=True)
class CoefficientSet:
    """A fitted D x C coefficient matrix with its provenance.

    ``converged`` is meaningful only for iteratively fitted sets (the
    coordinate-descent baselines); closed-form fits leave it True.
    """

    coeffs: np.ndarray
    method_tag: str
    config_used: BridgeConfig | None = None
    converged: bool = True

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        object.__setattr__(self, "coeffs", c)
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients contain non-finite entries")

    @property
    def n_outputs(self):
        return self.coeffs.shape[1]

    def column(self, l=0):
        return self.coeffs[:, l]

    def nonzero(self, tol=1e-3, l=0):
        """Indices of column ``l`` whose magnitude is at least ``tol``."""
        return np.flatnonzero(np.abs(self.coeffs[:, l]) >= tol)

    def predict(self, X):
        Y = as_matrix(X, "X") @ self.coeffs
        return Y[:, 0] if self.n_outputs == 1 else Y


def _as_xy(X, Y):
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    if Y.shape[0] != X.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
    return X, Y


def fit_ols(X, Y):
    """Least squares: normal equations for M >= D, least-norm dual for M < D."""
    X, Y = _as_xy(X, Y)
    M, D = X.shape
    if M >= D:
        A = solve_regularized(X.T @ X, 0.0, X.T @ Y)
        tag = "ols-primal"
    else:
        A = X.T @ solve_regularized(X @ X.T, 0.0, Y)
        tag = "ols-dual"
    return CoefficientSet(A, tag)


def fit_ridge(X, Y, lam):
    """Ridge regression in primal (M >= D) or dual (M < D) form."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    X, Y = _as_xy(X, Y)
    M, D = X.shape
    if M >= D:
        A = solve_regularized(X.T @ X, lam, X.T @ Y)
        tag = "ridge-primal"
    else:
        A = X.T @ solve_regularized(X @ X.T, lam, Y)
        tag = "ridge-dual"
    return CoefficientSet(A, tag, BridgeConfig(k=2.0, lam=lam))


def k_measure(alpha, k, eps):
    """Smooth surrogate of the l_k norm: (sum_j (a_j^2 + eps)^(k/2))^(1/k)."""
    if k < 1:
        raise InvalidK("k must be at least 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    a = as_vector(alpha, "alpha")
    return float(np.sum((a * a + eps) ** (k / 2.0)) ** (1.0 / k))


def bridge_objective(X, y, alpha, lam, k, eps):
    """Residual sum of squares plus lam * k_measure(alpha)^k."""
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    a = as_vector(alpha, "alpha")
    r = y - X @ a
    return float(r @ r + lam * k_measure(a, k, eps) ** k)


def _refine_columns(X, Y, lam, k, iters, jitter, pen, tol=None):
    """Per-column primal refinement of the ridge start.

    Solves a(l) = (G + lam*k/2 * diag((|a(l)|+jitter)^(k-2)) * pen)^(-1) X^T y_l
    repeatedly from the ridge initializer, with G = X^T X.  ``pen`` is a 0/1
    mask selecting penalized rows.  When ``tol`` is set the loop exits early
    once the largest coefficient change falls below it.  Every product and
    solve is single-column so that multi-output fits are bitwise identical
    to fitting each column on its own.
    """
    G = X.T @ X
    ridge_system = G if lam == 0 else G + lam * np.diag(pen)
    A = np.empty((G.shape[0], Y.shape[1]))
    half = 0.5 * lam * k
    for l in range(Y.shape[1]):
        rhs = X.T @ Y[:, l : l + 1]
        a = solve_regularized(ridge_system, 0.0, rhs)[:, 0]
        if lam > 0 and k < 2:
            # k = 2 makes the diag term lam * I: the ridge start is final
            for _ in range(iters):
                diag = half * (np.abs(a) + jitter) ** (k - 2.0) * pen
                new = solve_regularized(G + np.diag(diag), 0.0, rhs)[:, 0]
                if not np.all(np.isfinite(new)):
                    raise DivergedFixedPoint("refinement iterate became non-finite")
                done = tol is not None and np.abs(new - a).max() <= tol * (
                    1.0 + np.abs(new).max()
                )
                a = new
                if done:
                    break
        A[:, l] = a
    return A


def _split_intercept(X, Y):
    """Center predictors and targets for an unpenalized intercept fit.

    Requires the first column of X to be constant; returns the centered
    design (without that column), centered targets, and the offsets needed
    to restore raw-basis coefficients.
    """
    if not np.allclose(X[:, 0], X[0, 0]) or X[0, 0] == 0:
        raise ValueError(
            "penalize_intercept=False requires a constant first column in X"
        )
    scale = X[0, 0]
    Z = X[:, 1:]
    zbar = Z.mean(axis=0)
    ybar = Y.mean(axis=0)
    return Z - zbar, Y - ybar, zbar, ybar, scale


def _with_intercept(B, zbar, ybar, scale):
    """Map centered-basis coefficients back to the raw column basis."""
    a0 = (ybar - zbar @ B) / scale
    return np.vstack([a0, B])


def fit_pbridge_primal(X, Y, cfg):
    """Proximal bridge regression, primal form (requires M >= D).

    Starts each output column at the ridge solution with the same lam and
    re-solves the penalized normal equations ``refine_iters`` times with the
    diagonal term rebuilt from the current iterate.  With k = 2 the diagonal
    term is exactly lam * I and the ridge start is returned unchanged.
    """
    X, Y = _as_xy(X, Y)
    M, D = X.shape
    if M < D:
        raise ValueError(f"primal form needs M >= D, got {M} x {D}")
    if not 1.0 <= cfg.k <= 2.0:
        raise InvalidK(f"primal form requires k in [1, 2], got {cfg.k}")
    if cfg.penalize_intercept:
        A = _refine_columns(X, Y, cfg.lam, cfg.k, cfg.refine_iters, cfg.jitter,
                            np.ones(D), cfg.refine_tol)
    else:
        Z, Yc, zbar, ybar, scale = _split_intercept(X, Y)
        B = _refine_columns(Z, Yc, cfg.lam, cfg.k, cfg.refine_iters, cfg.jitter,
                            np.ones(D - 1), cfg.refine_tol)
        A = _with_intercept(B, zbar, ybar, scale)
    return CoefficientSet(A, "pbridge-primal", cfg)


def fit_pbridge_dual(X, Y, cfg):
    """Proximal bridge regression, dual form (requires M < D, k in (1, 2]).

    Per output column: with W = |X^T|^(1/(k-1)) (W = X^T exactly at k = 2),

        theta = W (X W + rho I)^(-1) y
        alpha = sgn(theta) o |X^T (X X^T + rho I)^(-1) X theta^(k-1)|^(1/(k-1))

    where rho = cfg.dual_rho conditions both inverses.  The elementwise power
    theta^(k-1) is taken in the complex plane, so a negative theta component
    contributes a rotated (not sign-flipped) term before the modulus; this is
    what the reference algorithm computes and what the sparse solutions of
    the worked examples require.
    """
    X, Y = _as_xy(X, Y)
    M, D = X.shape
    if M >= D:
        raise ValueError(f"dual form needs M < D, got {M} x {D}")
    if cfg.k <= 1.0 or cfg.k > 2.0:
        raise InvalidK(f"dual form requires k in (1, 2], got {cfg.k}")
    rho = cfg.dual_rho
    if cfg.k == 2.0:
        gram = X @ X.T
        A = np.empty((D, Y.shape[1]))
        for l in range(Y.shape[1]):
            theta = X.T @ solve_regularized(gram, rho, Y[:, l : l + 1])[:, 0]
            w = X.T @ solve_regularized(gram, rho, (X @ theta)[:, None])[:, 0]
            A[:, l] = np.sign(theta) * np.abs(w)
        return CoefficientSet(A, "pbridge-dual", cfg)
    p = 1.0 / (cfg.k - 1.0)
    W = np.abs(X.T) ** p
    if not np.all(np.isfinite(W)):
        raise InvalidK(
            f"k={cfg.k} is too close to 1 for this matrix scale: |X^T|^(1/(k-1)) overflows"
        )
    gram = X @ X.T
    A = np.empty((D, Y.shape[1]))
    for l in range(Y.shape[1]):
        # X W is a general (nonsymmetric) M x M matrix
        theta = W @ solve_general(X @ W, rho, Y[:, l : l + 1])[:, 0]
        t = theta.astype(complex) ** (cfg.k - 1.0)
        u = X @ t
        s = solve_regularized(gram, rho, np.column_stack([u.real, u.imag]))
        w = X.T @ (s[:, 0] + 1j * s[:, 1])
        A[:, l] = np.sign(theta) * np.abs(w) ** p
    return CoefficientSet(A, "pbridge-dual", cfg)


def fit_pbridge(X, Y, cfg):
    """Shape-dispatched proximal bridge fit: primal when M >= D, else dual."""
    X, Y = _as_xy(X, Y)
    if X.shape[0] >= X.shape[1]:
        return fit_pbridge_primal(X, Y, cfg)
    return fit_pbridge_dual(X, Y, cfg)


def fit_lqa(X, y, lam, q, iters):
    """Local-quadratic-approximation iteration for the l_q penalty.

    Shares the primal update map: starting from the ridge solution, each
    round re-solves with diag weights lam*q/2 * |previous|^(q-2).  Exists to
    cross-check that the bridge fixed point and the LQA iteration coincide.
    """
    X, Y = _as_xy(X, y)
    if X.shape[0] < X.shape[1]:
        raise ValueError("LQA iteration is defined for M >= D")
    if not 1.0 <= q <= 2.0:
        raise InvalidK(f"q must be in [1, 2], got {q}")
    A = _refine_columns(X, Y, lam, q, iters, 1e-10, np.ones(X.shape[1]))
    return CoefficientSet(A, "lqa", BridgeConfig(k=q, lam=lam, refine_iters=iters))


def check_invertibility_condition(X, alpha, lam, k, jitter=1e-10):
    """Strict sufficient condition for the primal system matrix to be invertible.

    True iff lam*k/2 * max_j (|alpha_j|^(k-2)) < min eig(X^T X), with
    magnitudes below ``jitter`` clamped to ``jitter`` so the negative power
    stays finite.
    """
    X = as_matrix(X, "X")
    a = np.maximum(np.abs(as_vector(alpha, "alpha")), jitter)
    left = 0.5 * lam * k * np.max(a ** (k - 2.0))
    return bool(left < min_eigenvalue(X.T @ X))


def stationarity_residual(X, y, alpha, lam, k, jitter=1e-10):
    """Max-norm residual of the primal stationarity system at ``alpha``.

    Computes ||(lam*k/2 * diag((|alpha|+jitter)^(k-2)) + X^T X) alpha - X^T y||_inf,
    the self-consistency measure of the fixed point.
    """
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    a = as_vector(alpha, "alpha")
    diag = 0.5 * lam * k * (np.abs(a) + jitter) ** (k - 2.0)
    return float(np.abs(diag * a + X.T @ (X @ a) - X.T @ y).max())


# ---------------------------------------------------------------------------
# Estimator-API wrappers
# ---------------------------------------------------------------------------


class _LinearFitMixin:
    def predict(self, X):
        X = as_matrix(X, "X")
        return X @ self.coef_

    def _store(self, cs, squeeze):
        self.coefficients_ = cs
        self.coef_ = cs.coeffs[:, 0] if squeeze else cs.coeffs
        self.n_features_in_ = cs.coeffs.shape[0]
        return self


class OrdinaryLeastSquares(_LinearFitMixin, RegressorMixin, BaseEstimator):
    """Least squares with automatic primal/least-norm dispatch on the shape."""

    def fit(self, X, y):
        return self._store(fit_ols(X, y), np.ndim(y) == 1)


class RidgeRegression(_LinearFitMixin, RegressorMixin, BaseEstimator):
    """Ridge regression with automatic primal/dual dispatch on the shape."""

    def __init__(self, lam=1.0):
        self.lam = lam

    def fit(self, X, y):
        return self._store(fit_ridge(X, y, self.lam), np.ndim(y) == 1)


class BridgeRegression(_LinearFitMixin, RegressorMixin, BaseEstimator):
    """Proximal bridge regression with automatic primal/dual dispatch.

    Parameters mirror :class:`BridgeConfig`; see there for semantics.
    """

    def __init__(self, k=2.0, lam=0.0, epsilon_reg=None, refine_iters=4,
                 refine_tol=None, jitter=1e-10, penalize_intercept=True):
        self.k = k
        self.lam = lam
        self.epsilon_reg = epsilon_reg
        self.refine_iters = refine_iters
        self.refine_tol = refine_tol
        self.jitter = jitter
        self.penalize_intercept = penalize_intercept

    def _config(self):
        return BridgeConfig(
            k=self.k,
            lam=self.lam,
            epsilon_reg=self.epsilon_reg,
            refine_iters=self.refine_iters,
            refine_tol=self.refine_tol,
            jitter=self.jitter,
            penalize_intercept=self.penalize_intercept,
        )

    def fit(self, X, y):
        return self._store(fit_pbridge(X, y, self._config()), np.ndim(y) == 1)
