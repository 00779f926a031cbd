import numpy as np

from gait.params import AnkleSchedule

ANKLE = 4  # q̄ index of the prosthesis ankle


def ankle_pd(tau: float, q_bar: np.ndarray, qdot_bar: np.ndarray, schedule: AnkleSchedule, u_max: float) -> float:
    """Varying set-point PD on the prosthesis ankle."""
    u = -schedule.kp * (q_bar[ANKLE] - schedule.setpoint(tau)) - schedule.kd * qdot_bar[ANKLE]
    return float(np.clip(u, -u_max, u_max))
