"""Closed-loop walking episode: physics, sensors, human and prosthesis controllers."""

import logging
import math

import numpy as np

from control.controller import TickDiagnostics, control_tick, make_context
from core.config import Config, ControllerConfig, SubjectConfig
from core.types import DomainId
from dynamics.kinematics import point_jacobian, point_pose
from gait.bezier import bezier
from gait.params import GaitParams, load_gait
from models.full import FullModelLayout, build_full_model
from models.measurable import MeasurableState
from models.params import Anthropometry, load_prosthesis
from models.subsystem import build_subsystem_model, check_subsystem
from sim.human import balance_support, human_controller
from sim.hybrid import SimState, guard, guard_and_impact, impact_map, step_continuous, true_wrenches
from sim.log import EpisodeLog, StepEvent, TickRecord
from sim.sensors import SensorSuite, TrueSignals, sample_sensors
from sim.terrain import create_terrain

logger = logging.getLogger(__name__)

STANCE_THIGH = 0.25  # residual thigh world pitch at strike, matches the swing_thigh end point


def initial_state(model, layout: FullModelLayout, gait: GaitParams, torso_pitch: float) -> SimState:
    """Start of prosthesis stance: prosthesis foot flat on the ground, walking speed."""
    ps = gait.domain(DomainId.PS)
    q = layout.standing_pose()
    q[2] = torso_pitch
    q[6] = STANCE_THIGH - torso_pitch
    q[10] = float(bezier(ps.alpha, 0.0)[0])
    q[11] = -(STANCE_THIGH + q[10])
    swing_thigh = float(bezier(np.array([ps.human.swing_thigh]), 0.0)[0])
    q[3] = swing_thigh - torso_pitch
    q[4] = float(bezier(np.array([ps.human.knee]), 0.0)[0])
    q[5] = -(swing_thigh + q[4])
    q[1] -= point_pose(model, q, layout.prosthesis_sole)[1]

    qdot = np.zeros(layout.n)
    qdot[0] = gait.step_length / gait.duration
    qdot = impact_map(model, layout, q, qdot, layout.prosthesis_sole).qdot
    pose = point_pose(model, q, layout.prosthesis_sole)
    return SimState(
        q=q,
        qdot=qdot,
        domain=DomainId.PS,
        origin=float(point_pose(model, q, layout.socket)[0]),
        stance_anchor=np.array([pose[0], 0.0, pose[2]]),
    )


def measurable_state(model, layout: FullModelLayout, state: SimState, zeta: np.ndarray, pitch: float, pitch_rate: float) -> MeasurableState:
    """Encoders for the joints and socket position, IMU for the socket pitch."""
    pose = point_pose(model, state.q, layout.socket)
    rate = point_jacobian(model, state.q, layout.socket) @ state.qdot
    s = list(layout.q_s)
    return MeasurableState(
        x_s=np.concatenate([state.q[s], state.qdot[s]]),
        x_r=np.array([pose[0], pose[1], pitch, rate[0], rate[1], pitch_rate]),
        zeta=zeta,
    )


def _record(state: SimState, cycle: int, X: MeasurableState, diag: TickDiagnostics, sensed, wrenches) -> TickRecord:
    fz = sensed.F_gz
    return TickRecord(
        t=state.t,
        domain=state.domain,
        step=state.step,
        cycle=cycle,
        tau=float(diag.tau),
        knee=float(X.x_s[0]),
        knee_rate=float(X.x_s[2]),
        knee_desired=float(X.x_s[0] - diag.y),
        y=float(diag.y),
        ydot=float(diag.ydot),
        ankle=float(X.x_s[1]),
        u_knee=float(diag.u_s[0]),
        u_ankle=float(diag.u_s[1]),
        V=float(diag.V),
        Vdot=float(diag.Vdot),
        bound=float(diag.bound),
        delta=float(diag.delta),
        lam_hx=float(diag.lam_hx),
        qp_status=str(diag.status) if diag.status is not None else "",
        fallback=diag.fallback,
        sensed_fx=float(sensed.F_f[0]),
        sensed_fz=float(sensed.F_f[1]),
        sensed_my=float(sensed.F_f[2]),
        sensed_gz=float(sensed.F_gz),
        sensed_gy=float(sensed.M_gy),
        true_fx=float(wrenches.socket[0]),
        true_fz=float(wrenches.socket[1]),
        true_my=float(wrenches.socket[2]),
        true_gx=float(wrenches.prosthesis_ground[0]),
        true_gz=float(wrenches.prosthesis_ground[1]),
        true_gy=float(wrenches.prosthesis_ground[2]),
        cop_x=float(sensed.M_gy / fz) if sensed.F_gz_valid and fz > 1.0 else math.nan,
        liftoff=wrenches.liftoff,
        slipping=wrenches.slipping,
    )


def _fall(cfg: Config, layout: FullModelLayout, state: SimState) -> str:
    if abs(state.q[2]) > cfg.fall.max_torso_pitch:
        return f"torso pitch {state.q[2]:.2f} rad"
    if state.q[1] < cfg.fall.min_hip_height * layout.leg_length:
        return f"hip height {state.q[1]:.2f} m"
    return ""


def run_episode(
    cfg: Config,
    subject: SubjectConfig | None = None,
    terrain_name: str | None = None,
    controller: ControllerConfig | None = None,
    seed: int | None = None,
    steps: int | None = None,
) -> EpisodeLog:
    """Walk until ``steps`` foot strikes, a fall, or the configured duration."""
    subject = subject or cfg.experiment.subjects[0]
    terrain_name = terrain_name or cfg.experiment.terrains[0]
    controller = controller or cfg.experiment.controllers[0]
    seed = cfg.experiment.seed if seed is None else seed
    steps = cfg.experiment.steps if steps is None else steps

    prosthesis = load_prosthesis(cfg.model.prosthesis)
    model, layout = build_full_model(Anthropometry(height=subject.height, weight=subject.weight), prosthesis, cfg.model.anthropometry)
    sub, sub_layout = build_subsystem_model(prosthesis)
    check_subsystem(model, layout, sub)
    gait = load_gait(cfg.model.gait)
    terrain = create_terrain(cfg.terrain_preset(terrain_name))
    suite = SensorSuite(cfg.sensors, np.random.default_rng(seed))
    ctx = make_context(controller, gait, sub, sub_layout, cfg.qp)

    log = EpisodeLog(subject=subject.name, terrain=terrain_name, controller=str(controller.kind), seed=seed)
    dt_us = cfg.physics.dt_us
    period_us = dt_us * cfg.physics.control_every
    end_us = round(cfg.physics.max_duration_s * 1e6)
    omega = cfg.physics.baumgarte_omega

    state = initial_state(model, layout, gait, cfg.human.torso_pitch)
    u_s = np.zeros(2)
    x0, speed = float(state.q[0]), gait.step_length / gait.duration
    u_r = human_controller(model, layout, state.q, state.qdot, gait, state.domain, 0.0, cfg.human)
    support = balance_support(state.q, state.qdot, 0.0, x0, speed, layout.leg_length, cfg.human.support)
    wrenches = true_wrenches(model, layout, state, np.concatenate([u_r, u_s]), terrain, omega, support)
    cycle, tick = 0, 0
    prev_qdot_bar: np.ndarray | None = None
    logger.info("episode %s: %s on %s, seed %d", log.name, controller.kind, terrain_name, seed)

    while state.t_us < end_us:
        pose = point_pose(model, state.q, layout.socket)
        rate = point_jacobian(model, state.q, layout.socket) @ state.qdot
        signals = TrueSignals(ground=wrenches.prosthesis_ground, socket=wrenches.socket, pitch=pose[2], pitch_rate=rate[2])
        suite.observe(state.t_us, signals)
        if tick % cfg.physics.control_every == 0:
            sensed, imu = sample_sensors(suite, state.t_us, signals)
            X = measurable_state(model, layout, state, sensed.F_f, imu.pitch, imu.pitch_rate)
            qdd = None if prev_qdot_bar is None else (X.qdot_bar - prev_qdot_bar) / (period_us * 1e-6)
            u_s, diag = control_tick(ctx, X, sensed, state.domain, state.origin, qdd)
            prev_qdot_bar = X.qdot_bar
            log.log(_record(state, cycle, X, diag, sensed, wrenches))
        tick += 1

        t_domain = (state.t_us - state.domain_start_us) * 1e-6
        u_r = human_controller(model, layout, state.q, state.qdot, gait, state.domain, t_domain, cfg.human)
        support = balance_support(state.q, state.qdot, state.t, x0, speed, layout.leg_length, cfg.human.support)
        state, wrenches = step_continuous(
            model, layout, state, terrain, np.concatenate([u_r, u_s]), dt_us, omega, support
        )

        if guard(model, layout, state, gait.duration):
            domain, state, noop = guard_and_impact(model, layout, state, terrain)
            log.steps.append(StepEvent(t=state.t, step=state.step, domain=domain, impact_noop=noop))
            prev_qdot_bar = None
            if domain == DomainId.PS:
                cycle += 1
            logger.debug("step %d at t=%.3fs, entering %s", state.step, state.t, domain)
            if state.step >= steps:
                break

        reason = _fall(cfg, layout, state)
        if reason:
            log.fell, log.fall_reason = True, reason
            logger.warning("fall at t=%.2fs after %d steps: %s", state.t, state.step, reason)
            break

    log.duration = state.t
    return log
