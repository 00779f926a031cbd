"""Locally measurable prosthesis state and the two dynamics it ties together.

``full_accelerations`` integrates the human-prosthesis model with the socket
pinned; ``subsystem_accelerations`` evaluates the prosthesis alone from what a
socket load cell and an IMU can see. Both agree on the prosthesis joints when
the socket wrench fed to the subsystem is the full model's multiplier.
"""

from dataclasses import dataclass

import numpy as np

from dynamics.dynamics import constrained_dynamics, dynamics_terms, solve_constrained
from dynamics.kinematics import jacobian_dot, point_jacobian, point_pose, rotation
from dynamics.model import Attachment, DimensionError, PlanarModel
from models.full import FullModelLayout
from models.subsystem import SubsystemLayout, constraint_wrench, socket_jacobian


@dataclass(frozen=True)
class MeasurableState:
    x_s: np.ndarray  # knee, ankle, knee rate, ankle rate
    x_r: np.ndarray  # socket x, z, pitch and their rates (world)
    zeta: np.ndarray  # socket wrench F_f: fx N, fz N, my N m

    def __post_init__(self) -> None:
        for name, size in (("x_s", 4), ("x_r", 6), ("zeta", 3)):
            value = np.asarray(getattr(self, name), dtype=float)
            if value.shape != (size,):
                raise DimensionError(f"{name} must have shape ({size},), got {value.shape}")
            object.__setattr__(self, name, value)
        if not np.all(np.isfinite(self.zeta)):
            raise ValueError(f"non-finite socket wrench {self.zeta}")

    @property
    def q_bar(self) -> np.ndarray:
        return np.concatenate([self.x_r[:3], self.x_s[:2]])

    @property
    def qdot_bar(self) -> np.ndarray:
        return np.concatenate([self.x_r[3:], self.x_s[2:]])

    @classmethod
    def from_subsystem(cls, q_bar: np.ndarray, qdot_bar: np.ndarray, zeta: np.ndarray) -> "MeasurableState":
        return cls(
            x_s=np.concatenate([q_bar[3:], qdot_bar[3:]]),
            x_r=np.concatenate([q_bar[:3], qdot_bar[:3]]),
            zeta=zeta,
        )


def socket_wrench(model: PlanarModel, layout: FullModelLayout, q: np.ndarray, lam_f: np.ndarray) -> np.ndarray:
    """Rotate the socket multipliers from residual-thigh axes into the world."""
    thigh_pitch = point_pose(model, q, layout.socket)[2] - q[layout.q_f[2]]
    lam_f = np.asarray(lam_f, dtype=float)
    return np.concatenate([rotation(thigh_pitch) @ lam_f[:2], lam_f[2:]])


def extract_measurables(
    model: PlanarModel, layout: FullModelLayout, q: np.ndarray, qdot: np.ndarray, lam_f: np.ndarray
) -> MeasurableState:
    q = model.check_q(q)
    qdot = model.check_q(qdot)
    pose = point_pose(model, q, layout.socket)
    rate = point_jacobian(model, q, layout.socket) @ qdot
    s = list(layout.q_s)
    return MeasurableState(
        x_s=np.concatenate([q[s], qdot[s]]),
        x_r=np.concatenate([pose, rate]),
        zeta=socket_wrench(model, layout, q, lam_f),
    )


@dataclass(frozen=True)
class FullAccelerations:
    qdd: np.ndarray
    lam_f: np.ndarray  # socket multipliers along the residual-thigh axes
    lam_g: np.ndarray  # ground multipliers, empty without a pinned foot


def socket_selector(layout: FullModelLayout) -> np.ndarray:
    J = np.zeros((3, layout.n))
    for row, i in enumerate(layout.q_f):
        J[row, i] = 1.0
    return J


def full_accelerations(
    model: PlanarModel,
    layout: FullModelLayout,
    q: np.ndarray,
    qdot: np.ndarray,
    u: np.ndarray,
    ground: Attachment | None = None,
    anchor: np.ndarray | None = None,
    tau_ext: np.ndarray | None = None,
    omega: float = 0.0,
    prescribed_socket: np.ndarray | None = None,
) -> FullAccelerations:
    """Constrained accelerations with the socket pinned and optionally one foot.

    ``anchor`` is the (x, z, pitch) the pinned foot is held at; with
    ``omega > 0`` position and velocity drift are fed back Baumgarte style.
    ``prescribed_socket`` opens the socket and applies the given multipliers
    as generalized forces instead.
    """
    q = model.check_q(q)
    qdot = model.check_q(qdot)
    u = np.asarray(u, dtype=float)
    if u.shape != (model.n_inputs,):
        raise DimensionError(f"expected {model.n_inputs} inputs, got {u.shape}")
    tau = model.B @ u
    if tau_ext is not None:
        tau = tau + tau_ext

    blocks, rates, stab = [], [], []
    Jf = socket_selector(layout)
    if prescribed_socket is None:
        blocks.append(Jf)
        rates.append(np.zeros(3))
        stab.append(2 * omega * (Jf @ qdot) + omega**2 * q[list(layout.q_f)])
    else:
        tau = tau + Jf.T @ np.asarray(prescribed_socket, dtype=float)
    if ground is not None:
        Jg = point_jacobian(model, q, ground)
        blocks.append(Jg)
        rates.append(jacobian_dot(model, q, qdot, ground) @ qdot)
        drift = np.zeros(3) if anchor is None else point_pose(model, q, ground) - anchor
        stab.append(2 * omega * (Jg @ qdot) + omega**2 * drift)

    if not blocks:
        terms = dynamics_terms(model, q, qdot)
        qdd, lam = solve_constrained(terms.D, tau - terms.H, np.zeros((0, model.n)), np.zeros(0))
        return FullAccelerations(qdd=qdd, lam_f=np.asarray(prescribed_socket, dtype=float), lam_g=np.zeros(0))

    J = np.vstack(blocks)
    stabilization = np.concatenate(stab) if omega > 0 else None
    qdd, lam = constrained_dynamics(model, q, qdot, tau, J, np.concatenate(rates), stabilization)
    if prescribed_socket is None:
        return FullAccelerations(qdd=qdd, lam_f=lam[:3], lam_g=lam[3:])
    return FullAccelerations(qdd=qdd, lam_f=np.asarray(prescribed_socket, dtype=float), lam_g=lam)


def full_state_derivative(
    model: PlanarModel, layout: FullModelLayout, x: np.ndarray, u: np.ndarray, **kwargs
) -> np.ndarray:
    n = model.n
    acc = full_accelerations(model, layout, x[:n], x[n:], u, **kwargs)
    return np.concatenate([x[n:], acc.qdd])


def subsystem_accelerations(
    sub: PlanarModel,
    layout: SubsystemLayout,
    X: MeasurableState,
    u_s: np.ndarray,
    stance: bool,
    rows: tuple[int, ...] = (0, 1, 2),
) -> tuple[np.ndarray, np.ndarray]:
    """q̄dd and the ground wrench of the prosthesis alone, driven by u_s and F_f."""
    q, qdot = X.q_bar, X.qdot_bar
    terms = dynamics_terms(sub, q, qdot)
    tau = sub.B @ np.asarray(u_s, dtype=float) + socket_jacobian(sub, layout, q).T @ X.zeta - terms.H
    if not stance:
        return np.linalg.solve(terms.D, tau), np.zeros(0)
    lam = constraint_wrench(sub, layout, q, qdot, u_s, X.zeta, rows)
    Jh = point_jacobian(sub, q, layout.sole)[list(rows)]
    return np.linalg.solve(terms.D, tau + Jh.T @ lam), lam


def subsystem_dynamics(
    sub: PlanarModel, layout: SubsystemLayout, X: MeasurableState, u_s: np.ndarray, stance: bool
) -> np.ndarray:
    """ẋ_s of the equivalent subsystem at the measurable state."""
    qdd, _ = subsystem_accelerations(sub, layout, X, u_s, stance)
    return np.concatenate([X.x_s[2:], qdd[list(layout.q_s)]])
