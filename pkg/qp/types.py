from dataclasses import dataclass, field

import numpy as np

from core.types import QpStatus

KKT_TOL = 1e-6


@dataclass
class QpProblem:
    """min 0.5 x^T H x + g^T x  s.t.  A_eq x = b_eq,  A_ineq x <= b_ineq,  lb <= x <= ub."""

    H: np.ndarray
    g: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_ineq: np.ndarray | None = None
    b_ineq: np.ndarray | None = None
    lb: np.ndarray | None = None  # -inf entries are unbounded
    ub: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.H = np.atleast_2d(np.asarray(self.H, dtype=float))
        self.g = np.asarray(self.g, dtype=float).ravel()
        n = self.n
        if self.H.shape != (n, n):
            raise ValueError(f"Hessian shape {self.H.shape} does not match gradient of length {n}")
        self.A_eq, self.b_eq = self._rows(self.A_eq, self.b_eq, "equality")
        self.A_ineq, self.b_ineq = self._rows(self.A_ineq, self.b_ineq, "inequality")
        self.lb = np.full(n, -np.inf) if self.lb is None else np.asarray(self.lb, dtype=float)
        self.ub = np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, dtype=float)
        if self.lb.shape != (n,) or self.ub.shape != (n,):
            raise ValueError("bounds must have one entry per variable")
        if np.any(self.lb > self.ub):
            raise ValueError("lower bound above upper bound")

    def _rows(self, A, b, what: str) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        if A is None:
            return np.zeros((0, n)), np.zeros(0)
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        if A.shape[1] != n or A.shape[0] != b.shape[0]:
            raise ValueError(f"{what} rows {A.shape} inconsistent with {n} variables and {b.shape[0]} bounds")
        return A, b

    @property
    def n(self) -> int:
        return self.g.shape[0]

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ self.H @ x + self.g @ x)


@dataclass
class QpSolution:
    x: np.ndarray
    status: QpStatus
    y_eq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    z_ineq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    z_lb: np.ndarray = field(default_factory=lambda: np.zeros(0))
    z_ub: np.ndarray = field(default_factory=lambda: np.zeros(0))
    stationarity: float = np.inf
    primal: float = np.inf
    complementarity: float = np.inf
    iterations: int = 0
    active: tuple[int, ...] = ()  # working set in standard-form inequality numbering

    @property
    def ok(self) -> bool:
        return self.status == QpStatus.OPTIMAL


def kkt_residuals(p: QpProblem, x, y_eq, z_ineq, z_lb, z_ub) -> tuple[float, float, float]:
    """Infinity norms of stationarity, primal infeasibility and complementarity."""
    grad = p.H @ x + p.g + p.A_eq.T @ y_eq + p.A_ineq.T @ z_ineq + z_ub - z_lb
    r_eq = p.A_eq @ x - p.b_eq
    r_in = p.A_ineq @ x - p.b_ineq
    lb_gap = np.where(np.isfinite(p.lb), x - p.lb, 0.0)
    ub_gap = np.where(np.isfinite(p.ub), p.ub - x, 0.0)
    primal = max(
        np.max(np.abs(r_eq), initial=0.0),
        np.max(r_in, initial=0.0),
        np.max(-lb_gap, initial=0.0),
        np.max(-ub_gap, initial=0.0),
    )
    comp = max(
        np.max(np.abs(z_ineq * r_in), initial=0.0),
        np.max(np.abs(z_lb * lb_gap), initial=0.0),
        np.max(np.abs(z_ub * ub_gap), initial=0.0),
        np.max(-z_ineq, initial=0.0),
        np.max(-z_lb, initial=0.0),
        np.max(-z_ub, initial=0.0),
    )
    return float(np.max(np.abs(grad), initial=0.0)), float(primal), float(comp)
