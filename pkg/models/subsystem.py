"""Five-coordinate prosthesis subsystem.

``q̄ = (x, z, pitch of the socket in the world; knee, ankle)``. The socket
wrench enters at the base frame origin, so its Jacobian is ``[I3 | 0]``.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from core.types import JointKind
from dynamics.dynamics import dynamics_terms
from dynamics.kinematics import jacobian_dot, point_jacobian
from dynamics.model import Attachment, Joint, Link, PlanarModel
from models.full import FullModelLayout, prosthesis_contact_points, prosthesis_joints, prosthesis_links
from models.params import DEFAULT_PROSTHESIS, ModelError, ProsthesisParams, load_prosthesis


class SingularConstraintError(RuntimeError):
    pass


@dataclass(frozen=True)
class SubsystemLayout:
    socket: Attachment
    sole: Attachment
    heel: Attachment
    toe: Attachment
    base: tuple[int, ...] = (0, 1, 2)
    q_s: tuple[int, ...] = (3, 4)

    @property
    def n(self) -> int:
        return 5


def build_subsystem_model(
    p: ProsthesisParams | str | Path = DEFAULT_PROSTHESIS,
) -> tuple[PlanarModel, SubsystemLayout]:
    if not isinstance(p, ProsthesisParams):
        p = load_prosthesis(p)
    virtual = Link("virtual", 0.0, 0.0)
    links = (virtual, virtual, *prosthesis_links(p))
    joints = (
        Joint("socket_x", JointKind.PRISMATIC_X, -1),
        Joint("socket_z", JointKind.PRISMATIC_Z, 0),
        Joint("socket_pitch", JointKind.REVOLUTE_PITCH, 1),
        *prosthesis_joints(p, 2),
    )
    model = PlanarModel(links=links, joints=joints, actuation_map=(False, False, False, True, True))
    sole, heel, toe = prosthesis_contact_points(p)
    layout = SubsystemLayout(
        socket=Attachment(2),
        sole=Attachment(4, sole),
        heel=Attachment(4, heel),
        toe=Attachment(4, toe),
    )
    return model, layout


def check_subsystem(full: PlanarModel, full_layout: FullModelLayout, sub: PlanarModel) -> None:
    """Raise ModelError unless the prosthesis links and joints agree exactly."""
    first = full_layout.socket.link
    for k in range(3):
        a, b = full.links[first + k], sub.links[2 + k]
        if a != b:
            raise ModelError(f"subsystem link {b.name} differs from the full model: {b} != {a}")
    for k in (1, 2):
        if full.joints[first + k].offset != sub.joints[2 + k].offset:
            raise ModelError(f"subsystem joint {sub.joints[2 + k].name} offset differs from the full model")


def socket_jacobian(sub: PlanarModel, layout: SubsystemLayout, q: np.ndarray) -> np.ndarray:
    return point_jacobian(sub, q, layout.socket)


def constraint_wrench(
    sub: PlanarModel,
    layout: SubsystemLayout,
    q: np.ndarray,
    qdot: np.ndarray,
    u_s: np.ndarray,
    F_f: np.ndarray,
    rows: tuple[int, ...] = (0, 1, 2),
    contact: Attachment | None = None,
) -> np.ndarray:
    """Ground wrench keeping the stance foot fixed under the given inputs.

    lam = (J D^-1 J^T)^-1 (-Jdot qd - J D^-1 (B u_s + J_f^T F_f - H)), with J the
    selected rows of the sole Jacobian.
    """
    contact = contact or layout.sole
    terms = dynamics_terms(sub, q, qdot)
    rows_ = list(rows)
    J = point_jacobian(sub, q, contact)[rows_]
    Jdq = (jacobian_dot(sub, q, qdot, contact) @ qdot)[rows_]
    Jf = socket_jacobian(sub, layout, q)
    tau = sub.B @ np.asarray(u_s, dtype=float) + Jf.T @ np.asarray(F_f, dtype=float) - terms.H
    Dinv_Jt = np.linalg.solve(terms.D, J.T)
    A = J @ Dinv_Jt
    if np.linalg.matrix_rank(A) < len(rows_):
        raise SingularConstraintError(f"constraint rows {rows} are rank deficient at q = {np.round(q, 4)}")
    return np.linalg.solve(A, -Jdq - J @ np.linalg.solve(terms.D, tau))
