"""Moving-average estimate of the socket wrench for controllers without a load cell.

Each sample is the load the socket must have carried for the subsystem
dynamics to balance at the measured accelerations and applied torques:
the first three rows of D̄ q̈ + H̄ - B̄ u - J̄_h^T lam (J̄_f = [I3 | 0]).
"""

from collections import deque

import numpy as np

from dynamics.dynamics import dynamics_terms
from dynamics.kinematics import point_jacobian
from dynamics.model import PlanarModel
from models.subsystem import SubsystemLayout


def residual_load(
    sub: PlanarModel,
    layout: SubsystemLayout,
    q_bar: np.ndarray,
    qdot_bar: np.ndarray,
    qdd_bar: np.ndarray,
    u_s: np.ndarray,
    lam_h: np.ndarray | None = None,
) -> np.ndarray:
    terms = dynamics_terms(sub, q_bar, qdot_bar)
    r = terms.D @ qdd_bar + terms.H - sub.B @ u_s
    if lam_h is not None and len(lam_h):
        r -= point_jacobian(sub, q_bar, layout.sole).T @ lam_h
    return r[:3]


def force_estimate(history, window: int = 30) -> np.ndarray:
    samples = list(history)[-window:]
    if not samples:
        raise ValueError("force estimate needs at least one sample")
    return np.mean(np.asarray(samples, dtype=float), axis=0)


class ForceEstimator:
    def __init__(self, window: int = 30):
        self.window = window
        self.history: deque[np.ndarray] = deque(maxlen=window)

    def add(self, sample: np.ndarray) -> None:
        self.history.append(np.asarray(sample, dtype=float))

    def estimate(self) -> np.ndarray:
        if not self.history:
            return np.zeros(3)
        return force_estimate(self.history, self.window)

    def clear(self) -> None:
        self.history.clear()
