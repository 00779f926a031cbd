"""Rapidly exponentially stabilizing CLF on the linearized output dynamics.

With xi = (y, ẏ) and ÿ = nu the outputs obey xi_dot = F xi + G nu. The CLF is
V = xi^T P_eps xi with P_eps = E P E, E = diag(I/eps, I), and the decay bound
used by the controllers is V_dot <= -(gamma/eps) V with gamma = c3.
"""

from dataclasses import dataclass

import numpy as np

from clf.care import ClfError, solve_care
from dynamics.dynamics import dynamics_terms
from dynamics.kinematics import jacobian_dot, point_jacobian
from dynamics.model import PlanarModel
from gait.outputs import OutputBundle
from models.measurable import MeasurableState
from models.subsystem import SubsystemLayout, socket_jacobian


def linear_output_dynamics(m: int) -> tuple[np.ndarray, np.ndarray]:
    F = np.zeros((2 * m, 2 * m))
    F[:m, m:] = np.eye(m)
    G = np.zeros((2 * m, m))
    G[m:] = np.eye(m)
    return F, G


@dataclass(frozen=True)
class ResClf:
    P: np.ndarray
    P_eps: np.ndarray
    epsilon: float
    Q: np.ndarray
    F: np.ndarray
    G: np.ndarray
    c1: float
    c2: float
    c3: float

    @property
    def gamma(self) -> float:
        return self.c3

    @property
    def rate(self) -> float:
        """Decay rate gamma / eps of the CLF constraint."""
        return self.c3 / self.epsilon

    def V(self, xi: np.ndarray) -> float:
        return float(xi @ self.P_eps @ xi)


def build_resclf(P: np.ndarray, epsilon: float, Q: np.ndarray | None = None) -> ResClf:
    if not 0.0 < epsilon < 1.0:
        raise ClfError(f"epsilon must lie in (0, 1), got {epsilon}")
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    if n % 2 or P.shape != (n, n):
        raise ClfError(f"P must be square with even size, got {P.shape}")
    m = n // 2
    Q = np.eye(n) if Q is None else np.asarray(Q, dtype=float)
    E = np.diag(np.concatenate([np.full(m, 1.0 / epsilon), np.ones(m)]))
    F, G = linear_output_dynamics(m)
    eig_P = np.linalg.eigvalsh(P)
    return ResClf(
        P=P,
        P_eps=E @ P @ E,
        epsilon=epsilon,
        Q=Q,
        F=F,
        G=G,
        c1=float(eig_P.min()),
        c2=float(eig_P.max()),
        c3=float(np.linalg.eigvalsh(Q).min() / eig_P.max()),
    )


def resclf_from_gains(q_diag: list[float], epsilon: float) -> ResClf:
    """CARE on the output double integrator with Q = diag(q_diag)."""
    Q = np.diag(np.asarray(q_diag, dtype=float))
    F, G = linear_output_dynamics(len(q_diag) // 2)
    return build_resclf(solve_care(F, G, Q), epsilon, Q)


def lyapunov_terms(
    xi: np.ndarray, P: np.ndarray, F: np.ndarray, G: np.ndarray
) -> tuple[float, float, np.ndarray]:
    return float(xi @ P @ xi), float(xi @ (F.T @ P + P @ F) @ xi), 2.0 * xi @ P @ G


def clf_terms(xi: np.ndarray, resclf: ResClf) -> tuple[float, float, np.ndarray]:
    """V, L_F V and L_G V at xi."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (resclf.P.shape[0],):
        raise ClfError(f"xi must have shape ({resclf.P.shape[0]},), got {xi.shape}")
    return lyapunov_terms(xi, resclf.P_eps, resclf.F, resclf.G)


def lie_derivatives(
    sub: PlanarModel,
    layout: SubsystemLayout,
    X: MeasurableState,
    bundle: OutputBundle,
    stance: bool,
    rows: tuple[int, ...] = (0, 1, 2),
) -> tuple[np.ndarray, np.ndarray]:
    """L_f^2 y and L_g L_f y of the equivalent subsystem at X.

    In stance the accelerations are projected onto the pinned-foot manifold:
    q̈ = M (B u + J_f^T F_f - H) - N Jdot_h qd with N = D^-1 J^T (J D^-1 J^T)^-1
    and M = D^-1 - N J D^-1.
    """
    q, qdot = X.q_bar, X.qdot_bar
    terms = dynamics_terms(sub, q, qdot)
    Dinv = np.linalg.inv(terms.D)
    drift_force = socket_jacobian(sub, layout, q).T @ X.zeta - terms.H
    M, drift_acc = Dinv, np.zeros(len(q))
    if stance:
        r = list(rows)
        J = point_jacobian(sub, q, layout.sole)[r]
        Jdq = (jacobian_dot(sub, q, qdot, layout.sole) @ qdot)[r]
        N = Dinv @ J.T @ np.linalg.inv(J @ Dinv @ J.T)
        M = Dinv - N @ J @ Dinv
        drift_acc = -N @ Jdq
    Lf2 = bundle.Jdot_y @ qdot + bundle.J_y @ (M @ drift_force + drift_acc)
    LgLf = bundle.J_y @ M @ sub.B
    return Lf2, LgLf


def feedback_linearize(
    sub: PlanarModel,
    layout: SubsystemLayout,
    X: MeasurableState,
    bundle: OutputBundle,
    nu: np.ndarray,
    stance: bool,
    u_ankle: float = 0.0,
) -> np.ndarray:
    """u_s = (u_knee, u_ankle) giving ÿ = nu with the ankle torque held at u_ankle."""
    Lf2, LgLf = lie_derivatives(sub, layout, X, bundle, stance)
    knee_col = LgLf[:, 0]
    if np.any(np.abs(knee_col) < 1e-9):
        raise ClfError("decoupling matrix is singular at this state")
    u_knee = (np.asarray(nu, dtype=float) - Lf2 - LgLf[:, 1] * u_ankle) / knee_col
    return np.array([float(u_knee[0]), u_ankle])
