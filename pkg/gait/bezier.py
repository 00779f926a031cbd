import math

import numpy as np


class GaitError(ValueError):
    pass


def bernstein(tau: float | np.ndarray, degree: int) -> np.ndarray:
    """Bernstein basis, shape (len(tau), degree + 1)."""
    t = np.atleast_1d(np.asarray(tau, dtype=float))
    k = np.arange(degree + 1)
    coeff = np.array([math.comb(degree, i) for i in k], dtype=float)
    return coeff * t[:, None] ** k * (1.0 - t[:, None]) ** (degree - k)


def _rows(alpha: np.ndarray) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    return alpha[None, :] if alpha.ndim == 1 else alpha


def bezier(alpha: np.ndarray, tau: float) -> np.ndarray:
    """Evaluate every row of ``alpha`` (outputs x degree+1) at scalar tau."""
    a = _rows(alpha)
    return a @ bernstein(tau, a.shape[1] - 1)[0]


def derivative_points(alpha: np.ndarray) -> np.ndarray:
    a = _rows(alpha)
    n = a.shape[1] - 1
    if n == 0:
        return np.zeros((a.shape[0], 1))
    return n * np.diff(a, axis=1)


def bezier_derivative(alpha: np.ndarray, tau: float, order: int = 1) -> np.ndarray:
    a = _rows(alpha)
    for _ in range(order):
        a = derivative_points(a)
    return bezier(a, tau)


def de_casteljau(alpha: np.ndarray, tau: float) -> np.ndarray:
    a = _rows(alpha).copy()
    for _ in range(a.shape[1] - 1):
        a = (1.0 - tau) * a[:, :-1] + tau * a[:, 1:]
    return a[:, 0]


def fit_bezier(tau: np.ndarray, y: np.ndarray, degree: int) -> tuple[np.ndarray, float]:
    """Least-squares Bézier coefficients for samples (tau_i, y_i) and the 2-norm residual."""
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(y, dtype=float)
    if degree < 1:
        raise GaitError(f"degree must be >= 1, got {degree}")
    if tau.shape != y.shape or tau.ndim != 1:
        raise GaitError("tau and y must be 1-D arrays of equal length")
    if len(tau) < degree + 1:
        raise GaitError(f"{len(tau)} samples cannot determine a degree-{degree} curve")
    if np.any(tau < 0) or np.any(tau > 1):
        raise GaitError("sample phases must lie in [0, 1]")
    A = bernstein(tau, degree)
    if np.linalg.matrix_rank(A) < degree + 1:
        raise GaitError("design matrix is rank deficient; spread the samples over more distinct phases")
    alpha, *_ = np.linalg.lstsq(A, y, rcond=None)
    return alpha, float(np.linalg.norm(A @ alpha - y))
