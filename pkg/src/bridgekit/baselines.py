"""Coordinate-descent lasso and elastic net, used as comparison baselines.

The objective follows the common library normalization

    (1/2M) ||y - X a||^2 + s * (r ||a||_1 + (1-r)/2 ||a||^2)

with overall strength ``s`` and mixing ``r`` (lasso at r = 1), so published
strength values transfer directly.  Relative to the unnormalized penalized
least squares cost ``||y - X a||^2 + lam * ||a||_1`` this means
``lam = 2 M s r``.  Coordinates are visited cyclically for determinism.
"""

import warnings
from dataclasses import dataclass

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - degraded but functional
    numba = None

from .estimators import CoefficientSet, fit_ols
from .linalg import as_matrix, as_vector

__all__ = ["EnetConfig", "NotConverged", "fit_elastic_net", "fit_lasso", "enet_path_grid"]


class NotConverged(RuntimeWarning):
    """Coordinate descent hit max_iters before the tolerance was met."""


@dataclass(frozen=True)
class EnetConfig:
    """Elastic-net hyperparameters.

    ``fit_intercept`` adds an unpenalized intercept by centering X and y; the
    returned coefficient vector then has the intercept prepended as row 0.
    ``standardize`` scales each column to unit sample deviation before the
    descent and returns coefficients on the original scale (the convention of
    the common comparison libraries; constant columns are left alone).
    """

    alpha_strength: float = 1.0
    l1_ratio: float = 1.0
    max_iters: int = 10000
    tol: float = 1e-7
    fit_intercept: bool = False
    standardize: bool = False

    def __post_init__(self):
        if self.alpha_strength < 0:
            raise ValueError("alpha_strength must be nonnegative")
        if not 0.0 <= self.l1_ratio <= 1.0:
            raise ValueError("l1_ratio must lie in [0, 1]")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


def _soft(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def _cd_sweeps(C, b, lam1, lam2, max_iters, tol, a0=None, objective_log=None,
               obj_const=0.0):
    """Cyclic coordinate descent on the Gram form of the elastic net.

    ``C = X^T X / M`` and ``b = X^T y / M``.  Returns (a, sweeps, converged).
    When ``objective_log`` is a list, the objective value after every sweep is
    appended (``obj_const`` supplies the y-only term so values are exact).
    """
    D = len(b)
    a = np.zeros(D) if a0 is None else a0.astype(float).copy()
    g = b - C @ a
    denom = np.diag(C) + lam2
    sweeps = 0
    converged = False
    for sweeps in range(1, max_iters + 1):
        delta = 0.0
        for j in range(D):
            if denom[j] <= 0.0:
                continue
            rho = g[j] + C[j, j] * a[j]
            new = _soft(rho, lam1) / denom[j]
            d = new - a[j]
            if d != 0.0:
                g -= d * C[:, j]
                a[j] = new
                delta = max(delta, abs(d))
        if objective_log is not None:
            objective_log.append(
                obj_const - 2.0 * b @ a + a @ C @ a
                + 2.0 * lam1 * np.abs(a).sum() + lam2 * a @ a
            )
        if delta < tol:
            converged = True
            break
    return a, sweeps, converged


def fit_elastic_net(X, y, cfg, objective_log=None):
    """Elastic net via cyclic coordinate descent with soft-thresholding.

    Emits a :class:`NotConverged` warning (and still returns the last
    iterate) if ``cfg.max_iters`` sweeps did not reach ``cfg.tol``.
    """
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    if y.size != X.shape[0]:
        raise ValueError("X and y disagree on the sample count")
    M = X.shape[0]
    if cfg.fit_intercept:
        xbar = X.mean(axis=0)
        ybar = y.mean()
        Xc, yc = X - xbar, y - ybar
    else:
        Xc, yc = X, y
    if cfg.standardize:
        scale = Xc.std(axis=0, ddof=1)
        scale = np.where(scale == 0.0, 1.0, scale)
        Xc = Xc / scale
    else:
        scale = None
    C = Xc.T @ Xc / M
    b = Xc.T @ yc / M
    lam1 = cfg.alpha_strength * cfg.l1_ratio
    lam2 = cfg.alpha_strength * (1.0 - cfg.l1_ratio)
    a, sweeps, converged = _cd_sweeps(
        C, b, lam1, lam2, cfg.max_iters, cfg.tol,
        objective_log=objective_log, obj_const=float(yc @ yc) / M,
    )
    if not converged:
        warnings.warn(
            f"coordinate descent stopped after {sweeps} sweeps without reaching "
            f"tol={cfg.tol}", NotConverged, stacklevel=2,
        )
    if scale is not None:
        a = a / scale
    if cfg.fit_intercept:
        a = np.concatenate([[ybar - xbar @ a], a])
    tag = "lasso" if cfg.l1_ratio == 1.0 else "enet"
    return CoefficientSet(a, tag, converged=converged)


def fit_lasso(X, y, alpha_strength, **kwargs):
    """Lasso: elastic net at l1_ratio = 1."""
    return fit_elastic_net(X, y, EnetConfig(alpha_strength, 1.0, **kwargs))


def _cd_grid_python(C, b, strengths, ratios, order, max_iters, tol, out):
    """Pure-python path kernel: warm-started over strengths, vectorized
    across the ratio axis.  Used when the jit compiler is unavailable."""
    diagC = np.diag(C).copy()
    A = np.zeros((len(ratios), len(b)))
    G = np.tile(b, (len(ratios), 1))
    for idx in order:
        s = strengths[idx]
        lam1 = s * ratios
        denom = diagC[None, :] + (s * (1.0 - ratios))[:, None]
        for _ in range(max_iters):
            delta = 0.0
            for j in range(len(b)):
                if diagC[j] == 0.0:
                    continue
                rho = G[:, j] + diagC[j] * A[:, j]
                new = _soft(rho, lam1) / denom[:, j]
                d = new - A[:, j]
                if np.any(d != 0.0):
                    G -= d[:, None] * C[j][None, :]
                    A[:, j] = new
                    delta = max(delta, float(np.abs(d).max()))
            if delta < tol:
                break
        out[idx] = A


def _cd_grid_impl(C, b, strengths, ratios, order, max_iters, tol, out):
    D = b.shape[0]
    n_r = ratios.shape[0]
    warm = np.zeros((n_r, D))
    for oi in range(order.shape[0]):
        idx = order[oi]
        s = strengths[idx]
        for r in range(n_r):
            lam1 = s * ratios[r]
            lam2 = s * (1.0 - ratios[r])
            a = warm[r].copy()
            g = b - C @ a
            for _ in range(max_iters):
                delta = 0.0
                for j in range(D):
                    denom = C[j, j] + lam2
                    if denom <= 0.0:
                        continue
                    rho = g[j] + C[j, j] * a[j]
                    if rho > lam1:
                        new = (rho - lam1) / denom
                    elif rho < -lam1:
                        new = (rho + lam1) / denom
                    else:
                        new = 0.0
                    d = new - a[j]
                    if d != 0.0:
                        for t in range(D):
                            g[t] -= d * C[t, j]
                        a[j] = new
                        if abs(d) > delta:
                            delta = abs(d)
                if delta < tol:
                    break
            warm[r] = a
            out[idx, r] = a


if numba is not None:
    _cd_grid_compiled = numba.njit(cache=True)(_cd_grid_impl)
else:
    _cd_grid_compiled = None


def enet_path_grid(X, y, strengths, l1_ratios, max_iters=10000, tol=1e-7):
    """Fit every (strength, l1_ratio) cell of a grid by coordinate descent.

    Strength values are visited from largest to smallest with warm starts.
    A zero strength cell is the plain least-squares solution and is filled
    in closed form.  Returns an array of shape
    (len(strengths), len(l1_ratios), D) aligned with the inputs as given.
    """
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    strengths = np.asarray(list(strengths), dtype=float)
    ratios = np.asarray(list(l1_ratios), dtype=float)
    M, D = X.shape
    C = X.T @ X / M
    b = X.T @ y / M
    order = np.argsort(strengths)[::-1]
    nonzero_order = np.array([i for i in order if strengths[i] > 0.0], dtype=np.int64)
    out = np.zeros((len(strengths), len(ratios), D))
    if nonzero_order.size:
        if _cd_grid_compiled is not None:
            _cd_grid_compiled(C, b, strengths, ratios, nonzero_order,
                              max_iters, tol, out)
        else:
            _cd_grid_python(C, b, strengths, ratios, nonzero_order,
                            max_iters, tol, out)
    if (strengths == 0.0).any():
        out[strengths == 0.0] = fit_ols(X, y).coeffs[:, 0]
    return out
