"""Hybrid walking dynamics: continuous flow in a domain, guard, plastic impact."""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from core.types import DomainId, next_domain
from dynamics.dynamics import mass_matrix, solve_constrained
from dynamics.kinematics import point_jacobian, point_pose
from dynamics.model import Attachment, PlanarModel
from models.full import FullModelLayout
from models.measurable import full_accelerations, socket_selector, socket_wrench
from sim.terrain import Terrain

logger = logging.getLogger(__name__)

CONTACT_NAMES = ("human_heel", "human_toe", "prosthesis_heel", "prosthesis_toe")
GUARD_MIN_CLOCK = 0.5  # fraction of the nominal domain duration before strikes count


class SimulationError(RuntimeError):
    pass


@dataclass
class SimState:
    q: np.ndarray
    qdot: np.ndarray
    domain: DomainId = DomainId.PS
    t_us: int = 0
    domain_start_us: int = 0
    origin: float = 0.0  # socket x at the start of the domain
    stance_anchor: np.ndarray = field(default_factory=lambda: np.zeros(3))
    contact_anchors: dict[str, float | None] = field(default_factory=lambda: dict.fromkeys(CONTACT_NAMES))
    step: int = 0

    @property
    def t(self) -> float:
        return self.t_us * 1e-6

    @property
    def x(self) -> np.ndarray:
        return np.concatenate([self.q, self.qdot])


@dataclass
class TrueWrenches:
    socket: np.ndarray  # F_f in the world, human on prosthesis
    prosthesis_ground: np.ndarray  # (Fx, Fz, My) about the prosthesis sole point
    human_ground: np.ndarray
    liftoff: bool = False
    slipping: bool = False


@dataclass
class ImpactResult:
    qdot: np.ndarray
    impulse: np.ndarray
    energy_before: float
    energy_after: float


def sole_wrench(model: PlanarModel, q: np.ndarray, sole: Attachment, points: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Sum of point forces as (Fx, Fz, My) about the sole point."""
    s = point_pose(model, q, sole)[:2]
    F = np.zeros(3)
    for p, f in points:
        F[:2] += f
        F[2] += -(p[1] - s[1]) * f[0] + (p[0] - s[0]) * f[1]
    return F


def _compliant_forces(model, layout, q, qdot, terrain, anchors):
    tau = np.zeros(model.n)
    per_foot: dict[bool, list] = {False: [], True: []}
    slipping = False
    for name in CONTACT_NAMES:
        att = getattr(layout, name)
        J = point_jacobian(model, q, att)
        pos = point_pose(model, q, att)[:2]
        vel = (J @ qdot)[:2]
        c = terrain.contact_force(pos, vel, anchors[name])
        slipping |= c.slipping
        if c.fz > 0.0:
            tau += J[:2].T @ c.vector
            per_foot[name.startswith("prosthesis")].append((pos, c.vector))
    return tau, per_foot, slipping


def _accelerations(model, layout, state: SimState, q, qdot, u, terrain: Terrain, omega: float, support=None):
    if terrain.rigid:
        stance = layout.stance_sole(state.domain)
        acc = full_accelerations(
            model, layout, q, qdot, u, ground=stance, anchor=state.stance_anchor, tau_ext=support, omega=omega
        )
        return acc, None
    tau, per_foot, slipping = _compliant_forces(model, layout, q, qdot, terrain, state.contact_anchors)
    if support is not None:
        tau = tau + support
    acc = full_accelerations(model, layout, q, qdot, u, tau_ext=tau, omega=omega)
    return acc, (per_foot, slipping)


def true_wrenches(model, layout, state: SimState, u, terrain: Terrain, omega: float, support=None) -> TrueWrenches:
    acc, contact = _accelerations(model, layout, state, state.q, state.qdot, u, terrain, omega, support)
    F_f = socket_wrench(model, layout, state.q, acc.lam_f)
    if contact is None:
        zero = np.zeros(3)
        lam = acc.lam_g
        stance_p = state.domain == DomainId.PS
        liftoff = bool(lam[1] < 0.0)
        slipping = bool(abs(lam[0]) > terrain.friction * max(lam[1], 0.0))
        return TrueWrenches(
            socket=F_f,
            prosthesis_ground=lam.copy() if stance_p else zero,
            human_ground=zero if stance_p else lam.copy(),
            liftoff=liftoff,
            slipping=slipping,
        )
    per_foot, slipping = contact
    return TrueWrenches(
        socket=F_f,
        prosthesis_ground=sole_wrench(model, state.q, layout.prosthesis_sole, per_foot[True]),
        human_ground=sole_wrench(model, state.q, layout.human_sole, per_foot[False]),
        slipping=slipping,
    )


def _update_anchors(model, layout, state: SimState) -> None:
    for name in CONTACT_NAMES:
        pos = point_pose(model, state.q, getattr(layout, name))
        if pos[1] >= 0.0:
            state.contact_anchors[name] = None
        elif state.contact_anchors[name] is None:
            state.contact_anchors[name] = float(pos[0])


def step_continuous(
    model: PlanarModel,
    layout: FullModelLayout,
    state: SimState,
    terrain: Terrain,
    u: np.ndarray,
    dt_us: int,
    omega: float = 50.0,
    support: np.ndarray | None = None,
) -> tuple[SimState, TrueWrenches]:
    """One RK4 step of the full model with the torques and ``support`` held; wrenches are at the start of the step."""
    if dt_us <= 0:
        raise ValueError("dt must be > 0")
    if not np.all(np.isfinite(state.x)):
        raise SimulationError(f"non-finite state at t={state.t:.4f}s")
    wrenches = true_wrenches(model, layout, state, u, terrain, omega, support)
    n = model.n
    dt = dt_us * 1e-6

    def f(x: np.ndarray) -> np.ndarray:
        acc, _ = _accelerations(model, layout, state, x[:n], x[n:], u, terrain, omega, support)
        return np.concatenate([x[n:], acc.qdd])

    x = state.x
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    x_next = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(x_next)):
        raise SimulationError(
            f"integration diverged at t={state.t:.4f}s in domain {state.domain}: q={np.array2string(state.q, precision=3)}"
        )
    new = replace(state, q=x_next[:n], qdot=x_next[n:], t_us=state.t_us + dt_us, contact_anchors=dict(state.contact_anchors))
    if not terrain.rigid:
        _update_anchors(model, layout, new)
    return new, wrenches


def plastic_impact(D: np.ndarray, J: np.ndarray, qdot: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """q̇⁺ and impulse from D (q̇⁺ - q̇⁻) = J^T Λ, J q̇⁺ = 0."""
    return solve_constrained(D, D @ qdot, J, np.zeros(J.shape[0]))


def impact_map(
    model: PlanarModel, layout: FullModelLayout, q: np.ndarray, qdot: np.ndarray, new_stance: Attachment
) -> ImpactResult:
    D = mass_matrix(model, q)
    J = np.vstack([socket_selector(layout), point_jacobian(model, q, new_stance)])
    qdot_plus, impulse = plastic_impact(D, J, qdot)
    return ImpactResult(
        qdot=qdot_plus,
        impulse=impulse,
        energy_before=float(0.5 * qdot @ D @ qdot),
        energy_after=float(0.5 * qdot_plus @ D @ qdot_plus),
    )


def guard(model: PlanarModel, layout: FullModelLayout, state: SimState, duration: float) -> bool:
    """Swing sole at or below the ground, moving down, late enough in the domain."""
    if (state.t_us - state.domain_start_us) * 1e-6 < GUARD_MIN_CLOCK * duration:
        return False
    swing = layout.swing_sole(state.domain)
    z = point_pose(model, state.q, swing)[1]
    zdot = (point_jacobian(model, state.q, swing) @ state.qdot)[1]
    return bool(z <= 0.0 and zdot < 0.0)


def guard_and_impact(
    model: PlanarModel, layout: FullModelLayout, state: SimState, terrain: Terrain
) -> tuple[DomainId, SimState, bool]:
    """Switch to the next domain. Returns the new domain, state and a no-op flag.

    On rigid terrain the velocities go through the plastic impact map of the
    new stance sole; a strike that is not moving into the ground leaves them
    untouched and is flagged. Compliant terrain keeps velocities continuous.
    """
    new_domain = next_domain(state.domain)
    new_stance = layout.stance_sole(new_domain)
    J = point_jacobian(model, state.q, new_stance)
    noop = bool((J @ state.qdot)[1] >= 0.0)
    qdot = state.qdot
    if terrain.rigid and not noop:
        result = impact_map(model, layout, state.q, state.qdot, new_stance)
        qdot = result.qdot
        logger.debug("impact: KE %.3f -> %.3f J", result.energy_before, result.energy_after)
    elif noop:
        logger.info("strike at t=%.3fs without downward velocity, no impact applied", state.t)
    pose = point_pose(model, state.q, new_stance)
    anchor = np.array([pose[0], 0.0, pose[2]])
    socket_x = point_pose(model, state.q, layout.socket)[0]
    new = replace(
        state,
        qdot=qdot,
        domain=new_domain,
        domain_start_us=state.t_us,
        origin=float(socket_x),
        stance_anchor=anchor,
        contact_anchors=dict(state.contact_anchors),
        step=state.step + 1,
    )
    return new_domain, new, noop
