"""Mass matrix and bias forces by summing per-link Newton-Euler terms.

For a planar chain the generalized inertial force is
sum_b J_b^T diag(m, m, I) (J_b qdd + Jdot_b qd), so D = sum J^T M J and
H = sum J^T M Jdot qd - sum m J_v^T g (= C qd + G).
"""

from dataclasses import dataclass

import numpy as np

from dynamics.kinematics import (
    S,
    forward_kinematics,
    frame_rates,
    jacobian_at,
    jacobian_dot_at,
    world_point,
)
from dynamics.model import DimensionError, PlanarModel


@dataclass(frozen=True)
class DynamicsTerms:
    D: np.ndarray
    H: np.ndarray


def dynamics_terms(model: PlanarModel, q: np.ndarray, qdot: np.ndarray) -> DynamicsTerms:
    q = model.check_q(q)
    qdot = model.check_q(qdot)
    n = model.n
    frames = forward_kinematics(model, q)
    rates = frame_rates(model, frames, qdot)
    g = np.asarray(model.gravity, dtype=float)
    D = np.zeros((n, n))
    H = np.zeros(n)
    for b, link in enumerate(model.links):
        if link.mass == 0.0 and link.inertia_zz == 0.0:
            continue
        c = world_point(frames, b, link.com_offset)
        cdot = rates.origin[b] + rates.omega[b] * (S @ (c - frames.origin[b]))
        J = jacobian_at(model, frames, b, c)
        bias = jacobian_dot_at(model, frames, rates, b, c, cdot) @ qdot
        Jv, Jw = J[:2], J[2]
        D += link.mass * (Jv.T @ Jv) + link.inertia_zz * np.outer(Jw, Jw)
        H += link.mass * (Jv.T @ bias[:2]) + link.inertia_zz * Jw * bias[2]
        H -= link.mass * (Jv.T @ g)
    return DynamicsTerms(D=0.5 * (D + D.T), H=H)


def mass_matrix(model: PlanarModel, q: np.ndarray) -> np.ndarray:
    return dynamics_terms(model, q, np.zeros(model.n)).D


def bias_forces(model: PlanarModel, q: np.ndarray, qdot: np.ndarray) -> np.ndarray:
    return dynamics_terms(model, q, qdot).H


def gravity_forces(model: PlanarModel, q: np.ndarray) -> np.ndarray:
    return bias_forces(model, q, np.zeros(model.n))


def kinetic_energy(model: PlanarModel, q: np.ndarray, qdot: np.ndarray) -> float:
    qdot = model.check_q(qdot)
    return float(0.5 * qdot @ mass_matrix(model, q) @ qdot)


def potential_energy(model: PlanarModel, q: np.ndarray) -> float:
    frames = forward_kinematics(model, q)
    g = np.asarray(model.gravity, dtype=float)
    return float(-sum(link.mass * (g @ world_point(frames, b, link.com_offset)) for b, link in enumerate(model.links)))


def total_energy(model: PlanarModel, q: np.ndarray, qdot: np.ndarray) -> float:
    return kinetic_energy(model, q, qdot) + potential_energy(model, q)


def forward_dynamics(
    model: PlanarModel, q: np.ndarray, qdot: np.ndarray, u: np.ndarray | None = None, tau_ext: np.ndarray | None = None
) -> np.ndarray:
    """Unconstrained qdd = D^-1 (B u + tau_ext - H)."""
    terms = dynamics_terms(model, q, qdot)
    rhs = -terms.H
    if u is not None:
        u = np.asarray(u, dtype=float)
        if u.shape != (model.n_inputs,):
            raise DimensionError(f"expected {model.n_inputs} inputs, got {u.shape}")
        rhs = rhs + model.B @ u
    if tau_ext is not None:
        rhs = rhs + tau_ext
    return np.linalg.solve(terms.D, rhs)


def solve_constrained(
    D: np.ndarray, rhs: np.ndarray, J: np.ndarray, accel_rhs: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Solve D qdd = rhs + J^T lam, J qdd = accel_rhs for (qdd, lam)."""
    n, k = D.shape[0], J.shape[0]
    if k == 0:
        return np.linalg.solve(D, rhs), np.zeros(0)
    K = np.zeros((n + k, n + k))
    K[:n, :n] = D
    K[:n, n:] = -J.T
    K[n:, :n] = J
    sol = np.linalg.solve(K, np.concatenate([rhs, accel_rhs]))
    return sol[:n], sol[n:]


def constrained_dynamics(
    model: PlanarModel,
    q: np.ndarray,
    qdot: np.ndarray,
    tau: np.ndarray,
    J: np.ndarray,
    Jdot_qdot: np.ndarray,
    stabilization: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """D qdd + H = tau + J^T lam with J qdd + Jdot qd = -stabilization."""
    terms = dynamics_terms(model, q, qdot)
    accel_rhs = -np.asarray(Jdot_qdot, dtype=float)
    if stabilization is not None:
        accel_rhs = accel_rhs - stabilization
    return solve_constrained(terms.D, tau - terms.H, J, accel_rhs)
