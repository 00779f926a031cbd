"""Inverse-dynamics CLF-QP for the prosthesis knee.

Decision vector Υ = (q̄dd, u_s, ground wrench, delta). The ground wrench part
depends on what the controller can sense during prosthesis stance:

    force sensing : lam_x only, F_gz and M_gy come from the insole
    otherwise     : the full 3-row wrench at the sole
    non-stance    : none

The prosthesis ankle torque is fixed by an equality row so the QP only
chooses the knee torque.
"""

from dataclasses import dataclass

import numpy as np

from clf.resclf import ResClf, clf_terms
from core.config import ControllerConfig
from core.types import DomainId, SensedForces
from dynamics.dynamics import dynamics_terms
from dynamics.kinematics import jacobian_dot, point_jacobian
from dynamics.model import PlanarModel
from gait.outputs import OutputBundle
from models.measurable import MeasurableState
from models.subsystem import SubsystemLayout, socket_jacobian
from qp.types import QpProblem


@dataclass(frozen=True)
class QpLayout:
    n_q: int
    n_u: int
    n_lam: int
    measured_ground: bool  # lam is only the x row, z and pitch are sensed

    @property
    def qdd(self) -> slice:
        return slice(0, self.n_q)

    @property
    def u(self) -> slice:
        return slice(self.n_q, self.n_q + self.n_u)

    @property
    def lam(self) -> slice:
        start = self.n_q + self.n_u
        return slice(start, start + self.n_lam)

    @property
    def delta(self) -> int:
        return self.n_q + self.n_u + self.n_lam

    @property
    def n(self) -> int:
        return self.delta + 1


@dataclass(frozen=True)
class ClfRow:
    V: float
    LfV: float
    LgV: np.ndarray
    rate: float  # gamma / eps


def qp_layout(n_q: int, n_u: int, domain: DomainId, measured_ground: bool) -> QpLayout:
    if domain not in (DomainId.PS, DomainId.PNS):
        raise ValueError(f"invalid domain {domain!r}")
    if domain == DomainId.PNS:
        return QpLayout(n_q, n_u, 0, False)
    return QpLayout(n_q, n_u, 1 if measured_ground else 3, measured_ground)


def assemble_idclfqp(
    sub: PlanarModel,
    layout: SubsystemLayout,
    X: MeasurableState,
    sensed: SensedForces,
    bundle: OutputBundle,
    resclf: ResClf,
    cfg: ControllerConfig,
    domain: DomainId,
    u_ankle: float,
    measured_ground: bool,
    u_prev: np.ndarray | None = None,
    lam_prev: np.ndarray | None = None,
) -> tuple[QpProblem, QpLayout, ClfRow]:
    """Build the QP; ``X.zeta`` is the socket wrench the controller believes in."""
    q, qdot = X.q_bar, X.qdot_bar
    n_q, n_u = sub.n, sub.n_inputs
    lay = qp_layout(n_q, n_u, domain, measured_ground)
    stance = domain == DomainId.PS
    if stance and measured_ground and not (sensed.F_gz_valid and sensed.M_gy_valid):
        # Without insole data fall back to solving for the whole ground wrench.
        lay = qp_layout(n_q, n_u, domain, False)
    terms = dynamics_terms(sub, q, qdot)

    # Dynamics: D qdd - B u - J_h^T lam = -H + J_f^T F_f (+ sensed ground rows)
    A_dyn = np.zeros((n_q, lay.n))
    A_dyn[:, lay.qdd] = terms.D
    A_dyn[:, lay.u] = -sub.B
    b_dyn = -terms.H + socket_jacobian(sub, layout, q).T @ X.zeta
    Jh = Jh_dot_qdot = None
    if stance:
        Jh = point_jacobian(sub, q, layout.sole)
        Jh_dot_qdot = jacobian_dot(sub, q, qdot, layout.sole) @ qdot
        if lay.measured_ground:
            A_dyn[:, lay.lam] = -Jh[:1].T
            b_dyn = b_dyn + Jh[1].T * sensed.F_gz + Jh[2].T * sensed.M_gy
        else:
            A_dyn[:, lay.lam] = -Jh.T

    # Ankle torque fixed by the set-point PD.
    A_ankle = np.zeros((1, lay.n))
    A_ankle[0, lay.u.start + 1] = 1.0
    A_eq = np.vstack([A_dyn, A_ankle])
    b_eq = np.concatenate([b_dyn, [u_ankle]])

    # Tracking cost ||Jdot_c qd + J_c qdd - mu||^2, holonomic rows soft.
    nu_pd = -cfg.kp * bundle.y - cfg.kd * bundle.ydot
    rows_J = [bundle.J_y]
    rows_b = [nu_pd - bundle.Jdot_y @ qdot]
    if stance:
        rows_J.append(Jh)
        rows_b.append(-Jh_dot_qdot)
    A_cost = np.zeros((sum(r.shape[0] for r in rows_J), lay.n))
    A_cost[:, lay.qdd] = np.vstack(rows_J)
    b_cost = np.concatenate(rows_b)

    nominal = np.zeros(lay.n)
    if u_prev is not None:
        nominal[lay.u] = u_prev
    if lam_prev is not None and lay.n_lam:
        nominal[lay.lam] = np.asarray(lam_prev, dtype=float)[: lay.n_lam]
    H = 2.0 * (A_cost.T @ A_cost + cfg.sigma * np.eye(lay.n))
    g = -2.0 * (A_cost.T @ b_cost + cfg.sigma * nominal)
    g[lay.delta] += cfg.rho

    # CLF: LgV (Jdot_y qd + J_y qdd) - delta <= -rate V - LfV
    V, LfV, LgV = clf_terms(bundle.xi, resclf)
    row = np.zeros((1, lay.n))
    row[0, lay.qdd] = LgV @ bundle.J_y
    row[0, lay.delta] = -1.0
    b_clf = np.array([-resclf.rate * V - LfV - LgV @ bundle.Jdot_y @ qdot])

    lb = np.full(lay.n, -np.inf)
    ub = np.full(lay.n, np.inf)
    lb[lay.u.start] = -cfg.u_max_knee
    ub[lay.u.start] = cfg.u_max_knee
    lb[lay.delta] = 0.0

    problem = QpProblem(H=H, g=g, A_eq=A_eq, b_eq=b_eq, A_ineq=row, b_ineq=b_clf, lb=lb, ub=ub)
    return problem, lay, ClfRow(V=V, LfV=LfV, LgV=LgV, rate=resclf.rate)
