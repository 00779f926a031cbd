"""Phase variable and knee tracking outputs of the prosthesis subsystem.

The phase is the socket x position, measured from where it was when the
current domain began, normalized by the domain's (p0, pf). Outputs are
``y = q̄[joint] - y_d(tau)``; derivatives are taken along q̄.
"""

from dataclasses import dataclass

import numpy as np

from core.types import DomainId
from gait.bezier import bezier, bezier_derivative
from gait.params import GaitParams

KNEE = 3  # q̄ index of the prosthesis knee
PHASE_COORDINATE = 0  # q̄ index the phase is measured along


def phase_gradient(gait: GaitParams, domain: DomainId, q_bar: np.ndarray, origin: float = 0.0) -> np.ndarray:
    """∂tau/∂q̄, zero once tau is clamped."""
    d = gait.domain(domain)
    raw = (q_bar[PHASE_COORDINATE] - origin - d.p0) / (d.pf - d.p0)
    grad = np.zeros(len(q_bar))
    if 0.0 < raw < 1.0:
        grad[PHASE_COORDINATE] = 1.0 / (d.pf - d.p0)
    return grad


def phase(
    q_bar: np.ndarray, qdot_bar: np.ndarray, gait: GaitParams, domain: DomainId, origin: float = 0.0
) -> tuple[float, float]:
    d = gait.domain(domain)
    raw = (q_bar[PHASE_COORDINATE] - origin - d.p0) / (d.pf - d.p0)
    if raw <= 0.0:
        return 0.0, 0.0
    if raw >= 1.0:
        return 1.0, 0.0
    return float(raw), float(qdot_bar[PHASE_COORDINATE] / (d.pf - d.p0))


def desired_outputs(tau: float, tau_dot: float, alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """y_d, ẏ_d and the tau_dot^2 part of ÿ_d (the tau_ddot part lives in J_y)."""
    return (
        bezier(alpha, tau),
        bezier_derivative(alpha, tau) * tau_dot,
        bezier_derivative(alpha, tau, 2) * tau_dot**2,
    )


@dataclass(frozen=True)
class OutputBundle:
    y: np.ndarray
    ydot: np.ndarray
    J_y: np.ndarray  # m x 5
    Jdot_y: np.ndarray
    y_actual: np.ndarray
    y_d: np.ndarray
    yd_dot: np.ndarray
    yd_ddot: np.ndarray
    tau: float
    tau_dot: float

    @property
    def xi(self) -> np.ndarray:
        return np.concatenate([self.y, self.ydot])

    def yddot(self, qdot_bar: np.ndarray, qdd_bar: np.ndarray) -> np.ndarray:
        return self.Jdot_y @ qdot_bar + self.J_y @ qdd_bar


def output_bundle(
    q_bar: np.ndarray,
    qdot_bar: np.ndarray,
    gait: GaitParams,
    domain: DomainId,
    origin: float = 0.0,
    joints: tuple[int, ...] = (KNEE,),
) -> OutputBundle:
    q_bar = np.asarray(q_bar, dtype=float)
    qdot_bar = np.asarray(qdot_bar, dtype=float)
    alpha = gait.domain(domain).alpha
    if alpha.shape[0] != len(joints):
        raise ValueError(f"{alpha.shape[0]} desired curves for {len(joints)} outputs")
    tau, tau_dot = phase(q_bar, qdot_bar, gait, domain, origin)
    grad = phase_gradient(gait, domain, q_bar, origin)
    y_d, yd_dot, yd_ddot = desired_outputs(tau, tau_dot, alpha)
    d1 = bezier_derivative(alpha, tau)
    d2 = bezier_derivative(alpha, tau, 2)

    m, n = len(joints), len(q_bar)
    J = np.zeros((m, n))
    for row, j in enumerate(joints):
        J[row, j] = 1.0
    J -= np.outer(d1, grad)
    Jdot = -np.outer(d2 * tau_dot, grad)
    y_actual = q_bar[list(joints)]
    return OutputBundle(
        y=y_actual - y_d,
        ydot=J @ qdot_bar,
        J_y=J,
        Jdot_y=Jdot,
        y_actual=y_actual,
        y_d=y_d,
        yd_dot=yd_dot,
        yd_ddot=yd_ddot,
        tau=tau,
        tau_dot=tau_dot,
    )
