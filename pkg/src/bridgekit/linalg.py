"""Dense linear-algebra and elementwise-power kernel shared by the estimators.

Everything here operates on plain float64 ndarrays and is pure: no caching,
no mutation of inputs, safe to call concurrently.
"""

import numpy as np
import scipy.linalg


class SingularSystem(np.linalg.LinAlgError):
    """Raised when a (regularized) symmetric solve fails to factorize."""


class NonSymmetric(ValueError):
    """Raised when a matrix expected to be symmetric is not."""


def as_matrix(a, name="array"):
    """Coerce to a 2-D float64 array and reject non-finite entries."""
    m = np.asarray(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {np.shape(a)}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_vector(v, name="vector"):
    """Coerce to a 1-D float64 array and reject non-finite entries."""
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def _checked_square(A, rho, B):
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    if B.shape[0] != A.shape[0]:
        raise ValueError("B row count must match A dimension")
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    return A if rho == 0 else A + rho * np.eye(A.shape[0]), B


def solve_regularized(A, rho, B):
    """Solve (A + rho*I) X = B for symmetric positive semidefinite A.

    Uses a Cholesky factorization and falls back to a pivoted (LU) solve when
    the shifted matrix is not numerically positive definite.

    Raises
    ------
    NonSymmetric
        If A is visibly nonsymmetric (the factorization reads one triangle,
        so passing a general matrix would silently give wrong answers).
    SingularSystem
        If both factorizations fail; the caller should raise ``rho``.
    """
    M, B = _checked_square(A, rho, B)
    scale = max(1.0, np.abs(M).max())
    if np.abs(M - M.T).max() > 1e-8 * scale:
        raise NonSymmetric("solve_regularized requires a symmetric matrix")
    try:
        cho = scipy.linalg.cho_factor(M, check_finite=False)
        X = scipy.linalg.cho_solve(cho, B, check_finite=False)
    except scipy.linalg.LinAlgError:
        try:
            X = np.linalg.solve(M, B)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(f"system singular even with rho={rho}") from exc
    if not np.all(np.isfinite(X)):
        raise SingularSystem(f"solve produced non-finite values (rho={rho})")
    return X


def solve_general(A, rho, B):
    """Solve (A + rho*I) X = B for a general square A by pivoted elimination."""
    M, B = _checked_square(A, rho, B)
    try:
        X = np.linalg.solve(M, B)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"system singular even with rho={rho}") from exc
    if not np.all(np.isfinite(X)):
        raise SingularSystem(f"solve produced non-finite values (rho={rho})")
    return X


def signed_pow(v, p):
    """Elementwise sign-preserving power: sgn(v_j) * |v_j|**p, with 0**p = 0."""
    if p <= 0:
        raise ValueError("p must be positive")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.abs(v) ** p


def abs_pow_mat(M, p):
    """Elementwise |M_ij|**p."""
    if p <= 0:
        raise ValueError("p must be positive")
    return np.abs(np.asarray(M, dtype=float)) ** p


def min_eigenvalue(A, tol=1e-10):
    """Smallest eigenvalue of a symmetric matrix via a symmetric eigensolver.

    Raises
    ------
    NonSymmetric
        If ||A - A^T||_inf exceeds ``tol`` relative to the matrix scale.
    """
    A = as_matrix(A, "A")
    if A.shape[0] != A.shape[1]:
        raise NonSymmetric("matrix is not square")
    scale = max(1.0, np.abs(A).max())
    if np.abs(A - A.T).max() > tol * scale:
        raise NonSymmetric("matrix is not symmetric within tolerance")
    return float(np.linalg.eigvalsh(A)[0])
