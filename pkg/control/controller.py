import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from clf.resclf import ResClf, resclf_from_gains
from control.ankle import ankle_pd
from control.estimator import ForceEstimator, residual_load
from control.idclfqp import assemble_idclfqp
from core.config import ControllerConfig, QpConfig
from core.types import ControllerKind, DomainId, QpStatus, SensedForces
from dynamics.model import PlanarModel
from gait.outputs import OutputBundle, output_bundle
from gait.params import GaitParams
from models.measurable import MeasurableState
from models.subsystem import SubsystemLayout
from qp.solver import ActiveSetSolver

logger = logging.getLogger(__name__)


@dataclass
class TickDiagnostics:
    u_s: np.ndarray
    delta: float = 0.0
    V: float = 0.0
    Vdot: float = 0.0
    bound: float = 0.0  # -(gamma/eps) V
    status: QpStatus | None = None  # None for the PD controller
    stationarity: float = 0.0
    primal: float = 0.0
    complementarity: float = 0.0
    iterations: int = 0
    lam_hx: float = float("nan")
    tau: float = 0.0
    y: float = 0.0
    ydot: float = 0.0
    fallback: bool = False


@dataclass
class ControllerContext:
    """Everything a tick needs besides the measurements; one per simulated device."""

    kind: ControllerKind
    cfg: ControllerConfig
    gait: GaitParams
    sub: PlanarModel
    layout: SubsystemLayout
    resclf: ResClf
    solver: ActiveSetSolver
    estimator: ForceEstimator
    u_prev: np.ndarray = field(default_factory=lambda: np.zeros(2))
    lam_prev: np.ndarray = field(default_factory=lambda: np.zeros(3))
    x_prev: np.ndarray | None = None
    last_domain: DomainId | None = None


Handler = Callable[[ControllerContext, MeasurableState, SensedForces, OutputBundle, DomainId, float], TickDiagnostics]


def _qp_tick(
    ctx: ControllerContext,
    X: MeasurableState,
    sensed: SensedForces,
    bundle: OutputBundle,
    domain: DomainId,
    u_ankle: float,
    measured_ground: bool,
) -> TickDiagnostics:
    if ctx.last_domain != domain:
        # Decision vector changes size across domains.
        ctx.x_prev = None
        ctx.solver.last_active = ()
        ctx.last_domain = domain
    problem, lay, clf = assemble_idclfqp(
        ctx.sub,
        ctx.layout,
        X,
        sensed,
        bundle,
        ctx.resclf,
        ctx.cfg,
        domain,
        u_ankle,
        measured_ground,
        u_prev=ctx.u_prev,
        lam_prev=ctx.lam_prev,
    )
    warm = ctx.x_prev if ctx.x_prev is not None and len(ctx.x_prev) == lay.n else None
    sol = ctx.solver.solve(problem, warm)
    bound = -clf.rate * clf.V
    diag = TickDiagnostics(
        u_s=ctx.u_prev.copy(),
        V=clf.V,
        bound=bound,
        status=sol.status,
        stationarity=sol.stationarity,
        primal=sol.primal,
        complementarity=sol.complementarity,
        iterations=sol.iterations,
        tau=bundle.tau,
        y=float(bundle.y[0]),
        ydot=float(bundle.ydot[0]),
    )
    if not sol.ok:
        logger.warning("QP %s at tau=%.3f, holding previous torque", sol.status, bundle.tau)
        diag.fallback = True
        diag.u_s = np.array([ctx.u_prev[0], u_ankle])
        diag.Vdot = float("nan")
        return diag
    x = sol.x
    qdd = x[lay.qdd]
    diag.u_s = x[lay.u].copy()
    diag.delta = float(x[lay.delta])
    diag.Vdot = float(clf.LfV + clf.LgV @ bundle.yddot(X.qdot_bar, qdd))
    if lay.n_lam:
        lam = x[lay.lam]
        diag.lam_hx = float(lam[0])
        ctx.lam_prev = np.concatenate([lam, ctx.lam_prev[lay.n_lam :]])
    ctx.x_prev = x
    return diag


def force_sensing_tick(ctx, X, sensed, bundle, domain, u_ankle) -> TickDiagnostics:
    if not sensed.F_f_valid:
        X = MeasurableState(x_s=X.x_s, x_r=X.x_r, zeta=np.zeros(3))
    return _qp_tick(ctx, X, sensed, bundle, domain, u_ankle, measured_ground=True)


def no_sensor_tick(ctx, X, sensed, bundle, domain, u_ankle) -> TickDiagnostics:
    X = MeasurableState(x_s=X.x_s, x_r=X.x_r, zeta=np.zeros(3))
    return _qp_tick(ctx, X, sensed, bundle, domain, u_ankle, measured_ground=False)


def force_estimating_tick(ctx, X, sensed, bundle, domain, u_ankle) -> TickDiagnostics:
    X = MeasurableState(x_s=X.x_s, x_r=X.x_r, zeta=ctx.estimator.estimate())
    return _qp_tick(ctx, X, sensed, bundle, domain, u_ankle, measured_ground=False)


def pd_tick(ctx, X, sensed, bundle, domain, u_ankle) -> TickDiagnostics:
    u = -ctx.cfg.kp * bundle.y[0] - ctx.cfg.kd * bundle.ydot[0]
    u = float(np.clip(u, -ctx.cfg.u_max_knee, ctx.cfg.u_max_knee))
    return TickDiagnostics(
        u_s=np.array([u, u_ankle]),
        tau=bundle.tau,
        y=float(bundle.y[0]),
        ydot=float(bundle.ydot[0]),
    )


class ControllerRegistry:
    def __init__(self) -> None:
        self._handlers: dict[ControllerKind, Handler] = {}

    def register(self, kind: ControllerKind, handler: Handler) -> None:
        self._handlers[kind] = handler

    def get(self, kind: ControllerKind) -> Handler:
        if kind not in self._handlers:
            raise KeyError(f"no controller registered for {kind}")
        return self._handlers[kind]

    @property
    def kinds(self) -> list[ControllerKind]:
        return list(self._handlers)


def default_registry() -> ControllerRegistry:
    registry = ControllerRegistry()
    registry.register(ControllerKind.FORCE_SENSING, force_sensing_tick)
    registry.register(ControllerKind.NO_SENSOR, no_sensor_tick)
    registry.register(ControllerKind.FORCE_ESTIMATING, force_estimating_tick)
    registry.register(ControllerKind.PD, pd_tick)
    return registry


REGISTRY = default_registry()


def make_context(
    cfg: ControllerConfig,
    gait: GaitParams,
    sub: PlanarModel,
    layout: SubsystemLayout,
    qp: QpConfig | None = None,
) -> ControllerContext:
    qp = qp or QpConfig()
    return ControllerContext(
        kind=cfg.kind,
        cfg=cfg,
        gait=gait,
        sub=sub,
        layout=layout,
        resclf=resclf_from_gains(cfg.q_diag, cfg.epsilon),
        solver=ActiveSetSolver(qp.max_iter, qp.regularization, qp.tolerance),
        estimator=ForceEstimator(cfg.window),
    )


def control_tick(
    ctx: ControllerContext,
    X: MeasurableState,
    sensed: SensedForces,
    domain: DomainId,
    origin: float = 0.0,
    qdd_measured: np.ndarray | None = None,
    registry: ControllerRegistry = REGISTRY,
) -> tuple[np.ndarray, TickDiagnostics]:
    """One control period: ankle set-point PD, then the knee controller of ``ctx.kind``.

    ``qdd_measured`` (finite-differenced q̄ velocities) feeds the force
    estimator with the residual load of the previous tick's torques.
    """
    if qdd_measured is not None and ctx.kind == ControllerKind.FORCE_ESTIMATING:
        lam = ctx.lam_prev if domain == DomainId.PS else None
        ctx.estimator.add(residual_load(ctx.sub, ctx.layout, X.q_bar, X.qdot_bar, qdd_measured, ctx.u_prev, lam))

    bundle = output_bundle(X.q_bar, X.qdot_bar, ctx.gait, domain, origin)
    u_ankle = ankle_pd(bundle.tau, X.q_bar, X.qdot_bar, ctx.gait.domain(domain).ankle, ctx.cfg.u_max_ankle)
    diag = registry.get(ctx.kind)(ctx, X, sensed, bundle, domain, u_ankle)
    u_s = np.array([np.clip(diag.u_s[0], -ctx.cfg.u_max_knee, ctx.cfg.u_max_knee), u_ankle])
    diag.u_s = u_s
    ctx.u_prev = u_s.copy()
    return u_s, diag
