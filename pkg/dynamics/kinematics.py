from dataclasses import dataclass

import numpy as np

from core.types import JointKind
from dynamics.model import Attachment, PlanarModel

# d/dtheta R(theta) = S R(theta)
S = np.array([[0.0, -1.0], [1.0, 0.0]])


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class Frames:
    """World placement of every link frame."""

    origin: np.ndarray  # (n, 2)
    angle: np.ndarray  # (n,)
    parent_angle: np.ndarray  # (n,) pitch of the frame the joint axis lives in


@dataclass(frozen=True)
class FrameRates:
    origin: np.ndarray  # (n, 2) origin velocities
    omega: np.ndarray  # (n,) pitch rates


def forward_kinematics(model: PlanarModel, q: np.ndarray) -> Frames:
    q = model.check_q(q)
    n = model.n
    origin = np.zeros((n, 2))
    angle = np.zeros(n)
    parent_angle = np.zeros(n)
    for i, joint in enumerate(model.joints):
        p = joint.parent
        po = origin[p] if p >= 0 else np.zeros(2)
        pa = angle[p] if p >= 0 else 0.0
        R = rotation(pa)
        o = po + R @ np.asarray(joint.offset)
        if joint.kind == JointKind.REVOLUTE_PITCH:
            angle[i] = pa + q[i]
        elif joint.kind == JointKind.PRISMATIC_X:
            o = o + R[:, 0] * q[i]
            angle[i] = pa
        else:
            o = o + R[:, 1] * q[i]
            angle[i] = pa
        origin[i] = o
        parent_angle[i] = pa
    return Frames(origin=origin, angle=angle, parent_angle=parent_angle)


def frame_rates(model: PlanarModel, frames: Frames, qdot: np.ndarray) -> FrameRates:
    n = model.n
    v = np.zeros((n, 2))
    w = np.zeros(n)
    for i, joint in enumerate(model.joints):
        p = joint.parent
        vp = v[p] if p >= 0 else np.zeros(2)
        wp = w[p] if p >= 0 else 0.0
        po = frames.origin[p] if p >= 0 else np.zeros(2)
        vi = vp + wp * (S @ (frames.origin[i] - po))
        if joint.kind == JointKind.REVOLUTE_PITCH:
            w[i] = wp + qdot[i]
        else:
            axis = 0 if joint.kind == JointKind.PRISMATIC_X else 1
            vi = vi + rotation(frames.parent_angle[i])[:, axis] * qdot[i]
            w[i] = wp
        v[i] = vi
    return FrameRates(origin=v, omega=w)


def world_point(frames: Frames, link: int, point) -> np.ndarray:
    return frames.origin[link] + rotation(frames.angle[link]) @ np.asarray(point, dtype=float)


def point_pose(model: PlanarModel, q: np.ndarray, attachment: Attachment) -> np.ndarray:
    """(x, z, pitch) of an attachment point."""
    model.check_attachment(attachment)
    frames = forward_kinematics(model, q)
    p = world_point(frames, attachment.link, attachment.point)
    return np.array([p[0], p[1], frames.angle[attachment.link]])


def jacobian_at(model: PlanarModel, frames: Frames, link: int, p: np.ndarray) -> np.ndarray:
    J = np.zeros((3, model.n))
    for j in model.support[link]:
        kind = model.joints[j].kind
        if kind == JointKind.REVOLUTE_PITCH:
            J[:2, j] = S @ (p - frames.origin[j])
            J[2, j] = 1.0
        else:
            axis = 0 if kind == JointKind.PRISMATIC_X else 1
            J[:2, j] = rotation(frames.parent_angle[j])[:, axis]
    return J


def jacobian_dot_at(
    model: PlanarModel, frames: Frames, rates: FrameRates, link: int, p: np.ndarray, pdot: np.ndarray
) -> np.ndarray:
    Jd = np.zeros((3, model.n))
    for j in model.support[link]:
        joint = model.joints[j]
        if joint.kind == JointKind.REVOLUTE_PITCH:
            Jd[:2, j] = S @ (pdot - rates.origin[j])
        else:
            axis = 0 if joint.kind == JointKind.PRISMATIC_X else 1
            wp = rates.omega[joint.parent] if joint.parent >= 0 else 0.0
            Jd[:2, j] = wp * (S @ rotation(frames.parent_angle[j])[:, axis])
    return Jd


def point_jacobian(model: PlanarModel, q: np.ndarray, attachment: Attachment) -> np.ndarray:
    """3 x n Jacobian of (x, z, pitch) of the attachment point."""
    model.check_attachment(attachment)
    frames = forward_kinematics(model, q)
    p = world_point(frames, attachment.link, attachment.point)
    return jacobian_at(model, frames, attachment.link, p)


def point_velocity(model: PlanarModel, q: np.ndarray, qdot: np.ndarray, attachment: Attachment) -> np.ndarray:
    return point_jacobian(model, q, attachment) @ model.check_q(qdot)


def jacobian_dot(model: PlanarModel, q: np.ndarray, qdot: np.ndarray, attachment: Attachment) -> np.ndarray:
    model.check_attachment(attachment)
    qdot = model.check_q(qdot)
    frames = forward_kinematics(model, q)
    rates = frame_rates(model, frames, qdot)
    link = attachment.link
    p = world_point(frames, link, attachment.point)
    pdot = rates.origin[link] + rates.omega[link] * (S @ (p - frames.origin[link]))
    return jacobian_dot_at(model, frames, rates, link, p, pdot)
