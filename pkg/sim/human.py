"""Simulated walker: PD tracking of the human-side joints on a domain clock.

The stance-side hip holds the torso upright, the swing thigh follows its
world pitch trajectory, and in prosthesis stance the left ankle keeps the
swinging foot level. Swing-side joints get gravity feedforward.
"""

import numpy as np

from core.config import HumanConfig, SupportConfig
from core.types import DomainId
from dynamics.dynamics import gravity_forces
from gait.bezier import bezier, bezier_derivative
from gait.params import GaitParams
from models.full import FullModelLayout

TORSO = 2
LEFT_HIP, LEFT_KNEE, LEFT_ANKLE, RIGHT_HIP = 3, 4, 5, 6


def domain_clock(t_domain: float, duration: float) -> tuple[float, float]:
    """s = t / duration clamped to [0, 1], and ds/dt."""
    s = t_domain / duration
    if s >= 1.0:
        return 1.0, 0.0
    return max(s, 0.0), 1.0 / duration


def _curve(coefficients: list[float], s: float, s_dot: float) -> tuple[float, float]:
    alpha = np.array([coefficients], dtype=float)
    return float(bezier(alpha, s)[0]), float(bezier_derivative(alpha, s)[0] * s_dot)


def human_controller(
    model,
    layout: FullModelLayout,
    q: np.ndarray,
    qdot: np.ndarray,
    gait: GaitParams,
    domain: DomainId,
    t_domain: float,
    cfg: HumanConfig,
) -> np.ndarray:
    """u_r = (left hip, left knee, left ankle, right hip) torques."""
    s, s_dot = domain_clock(t_domain, gait.duration)
    human = gait.domain(domain).human
    u = np.zeros(4)

    # A hip torque pushes the torso the opposite way.
    torso = cfg.torso_kp * (q[TORSO] - cfg.torso_pitch) + cfg.torso_kd * qdot[TORSO]
    thigh_d, thigh_rate_d = _curve(human.swing_thigh, s, s_dot)
    knee_d, knee_rate_d = _curve(human.knee, s, s_dot)

    if domain == DomainId.PS:
        swing_hip, stance_hip = 0, 3
        swing = [LEFT_HIP, LEFT_KNEE, LEFT_ANKLE]
        thigh = q[TORSO] + q[LEFT_HIP]
        thigh_rate = qdot[TORSO] + qdot[LEFT_HIP]
        u[1] = -cfg.kp * (q[LEFT_KNEE] - knee_d) - cfg.kd * (qdot[LEFT_KNEE] - knee_rate_d)
        foot = thigh + q[LEFT_KNEE] + q[LEFT_ANKLE]
        foot_rate = thigh_rate + qdot[LEFT_KNEE] + qdot[LEFT_ANKLE]
        u[2] = -cfg.kp * foot - cfg.kd * foot_rate
    else:
        swing_hip, stance_hip = 3, 0
        swing = [RIGHT_HIP]
        thigh = q[TORSO] + q[RIGHT_HIP]
        thigh_rate = qdot[TORSO] + qdot[RIGHT_HIP]
        u[1] = -cfg.kp * (q[LEFT_KNEE] - knee_d) - cfg.kd * (qdot[LEFT_KNEE] - knee_rate_d)
        if human.ankle is not None:
            ankle_d, ankle_rate_d = _curve(human.ankle, s, s_dot)
            u[2] = -cfg.kp * (q[LEFT_ANKLE] - ankle_d) - cfg.kd * (qdot[LEFT_ANKLE] - ankle_rate_d)

    u[swing_hip] = -cfg.kp * (thigh - thigh_d) - cfg.kd * (thigh_rate - thigh_rate_d)
    u[stance_hip] = torso

    if cfg.gravity_compensation:
        G = gravity_forces(model, q)
        for j in swing:
            u[layout.actuated.index(j)] += G[j]
    return np.clip(u, -cfg.strength, cfg.strength)


def balance_support(
    q: np.ndarray,
    qdot: np.ndarray,
    t: float,
    x0: float,
    speed: float,
    leg_length: float,
    cfg: SupportConfig,
) -> np.ndarray:
    """Generalized force of the walker's hand support, acting on the hip coordinates.

    Along x the hip is paced to ``x0 + speed * t``; along z the support only
    pushes, and only once the hip sinks below the catch height.
    """
    f = np.zeros(len(q))
    if not cfg.enabled:
        return f
    f[0] = cfg.kx * (x0 + speed * t - q[0]) + cfg.bx * (speed - qdot[0])
    sink = cfg.catch_height * leg_length - q[1]
    if sink > 0.0:
        f[1] = max(cfg.kz * sink - cfg.bz * qdot[1], 0.0)
    return f
