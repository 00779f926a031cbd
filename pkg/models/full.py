"""Twelve-coordinate human-prosthesis model.

Coordinates ``q = (q_l, q_f, q_s)``:

    q_l = (x, z, pitch of the torso at the hip; left hip, knee, ankle; right hip)
    q_f = (x, z, pitch) of the socket relative to the residual thigh
    q_s = (prosthesis knee, prosthesis ankle)

The socket is a 3-DOF joint pinned at zero by a holonomic constraint, so its
multipliers are the socket wrench applied by the human on the prosthesis,
expressed along the residual-thigh axes. Knee flexion is negative.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from core.types import DomainId, JointKind
from dynamics.model import Attachment, Joint, Link, PlanarModel
from models.params import (
    DEFAULT_ANTHROPOMETRY,
    DEFAULT_PROSTHESIS,
    Anthropometry,
    ModelError,
    ProsthesisParams,
    SegmentTable,
    load_prosthesis,
    load_segment_table,
)

logger = logging.getLogger(__name__)

COORDINATES = (
    "base_x",
    "base_z",
    "torso_pitch",
    "left_hip",
    "left_knee",
    "left_ankle",
    "right_hip",
    "socket_x",
    "socket_z",
    "socket_pitch",
    "prosthesis_knee",
    "prosthesis_ankle",
)


@dataclass(frozen=True)
class FullModelLayout:
    leg_length: float  # hip to sole, equal on both sides after the shoe lift
    shoe_lift: float
    socket: Attachment
    human_sole: Attachment
    prosthesis_sole: Attachment
    human_heel: Attachment
    human_toe: Attachment
    prosthesis_heel: Attachment
    prosthesis_toe: Attachment
    coordinates: tuple[str, ...] = COORDINATES
    base: tuple[int, ...] = (0, 1, 2)
    q_l: tuple[int, ...] = (0, 1, 2, 3, 4, 5, 6)
    q_f: tuple[int, ...] = (7, 8, 9)
    q_s: tuple[int, ...] = (10, 11)
    right_hip: int = 6
    thigh_link: int = 6
    actuated: tuple[int, ...] = (3, 4, 5, 6, 10, 11)
    n_r_inputs: int = 4  # u = (u_r, u_s), u_r first

    @property
    def n(self) -> int:
        return len(self.coordinates)

    @property
    def u_r(self) -> slice:
        return slice(0, self.n_r_inputs)

    @property
    def u_s(self) -> slice:
        return slice(self.n_r_inputs, len(self.actuated))

    def stance_sole(self, domain: DomainId) -> Attachment:
        return self.prosthesis_sole if domain == DomainId.PS else self.human_sole

    def swing_sole(self, domain: DomainId) -> Attachment:
        return self.human_sole if domain == DomainId.PS else self.prosthesis_sole

    def contacts(self, prosthesis_side: bool) -> tuple[Attachment, Attachment]:
        if prosthesis_side:
            return self.prosthesis_heel, self.prosthesis_toe
        return self.human_heel, self.human_toe

    def standing_pose(self) -> np.ndarray:
        """Upright, both soles on z = 0 under the hip."""
        q = np.zeros(self.n)
        q[1] = self.leg_length
        return q


def _segment(name: str, mass: float, length: float, com: float, gyration: float) -> Link:
    return Link(
        name=name,
        mass=mass,
        inertia_zz=mass * (gyration * length) ** 2,
        com_offset=(0.0, -com * length),
        length=length,
    )


def prosthesis_links(p: ProsthesisParams) -> tuple[Link, Link, Link]:
    """Upper, shank and foot links, shared verbatim by the full and subsystem models."""
    return (
        Link("prosthesis_upper", p.upper.mass, p.upper.inertia, (0.0, -p.upper.com), p.upper.length),
        Link("prosthesis_shank", p.shank.mass, p.shank.inertia, (0.0, -p.shank.com), p.shank.length),
        Link("prosthesis_foot", p.foot.mass, p.foot.inertia, (p.foot.com_x, -p.foot.com_z), p.foot.height),
    )


def prosthesis_joints(p: ProsthesisParams, upper: int) -> tuple[Joint, Joint]:
    return (
        Joint("prosthesis_knee", JointKind.REVOLUTE_PITCH, upper, (0.0, -p.upper.length)),
        Joint("prosthesis_ankle", JointKind.REVOLUTE_PITCH, upper + 1, (0.0, -p.shank.length)),
    )


def prosthesis_contact_points(p: ProsthesisParams) -> tuple[tuple[float, float], ...]:
    """Sole, heel and toe in the prosthesis foot frame."""
    h = p.foot.height
    return (0.0, -h), (-p.foot.heel, -h), (p.foot.length - p.foot.heel, -h)


def build_full_model(
    a: Anthropometry,
    p: ProsthesisParams | str | Path = DEFAULT_PROSTHESIS,
    table: SegmentTable | str | Path = DEFAULT_ANTHROPOMETRY,
) -> tuple[PlanarModel, FullModelLayout]:
    if not isinstance(p, ProsthesisParams):
        p = load_prosthesis(p)
    if not isinstance(table, SegmentTable):
        table = load_segment_table(table)

    H, W = a.height, a.weight
    torso = _segment("torso", table.torso.mass * W, table.torso.length * H, -table.torso.com, table.torso.gyration)
    thigh = _segment("left_thigh", table.thigh.mass * W, table.thigh.length * H, table.thigh.com, table.thigh.gyration)
    shank = _segment("left_shank", table.shank.mass * W, table.shank.length * H, table.shank.com, table.shank.gyration)
    residual = _segment(
        "residual_thigh", table.residual.mass * W, table.residual.length * H, table.residual.com, table.residual.gyration
    )

    # The prosthesis side is longer than the sound leg; a shoe lift evens them.
    foot_len = table.foot.length * H
    ankle_height = table.foot.height * H
    shoe_lift = residual.length + p.leg_length - (thigh.length + shank.length + ankle_height)
    if shoe_lift < 0:
        raise ModelError(
            f"prosthesis side is {-shoe_lift:.4f} m shorter than the sound leg; lengthen the prosthesis upper link"
        )
    sole = ankle_height + shoe_lift
    heel = table.foot.heel * foot_len
    foot_mass = table.foot.mass * W
    foot = Link(
        name="left_foot",
        mass=foot_mass,
        inertia_zz=foot_mass * (table.foot.gyration * foot_len) ** 2,
        com_offset=(table.foot.com * foot_len - heel, -0.5 * ankle_height),
        length=sole,
    )

    virtual = Link("virtual", 0.0, 0.0)
    upper, p_shank, p_foot = prosthesis_links(p)
    links = (virtual, virtual, torso, thigh, shank, foot, residual, virtual, virtual, upper, p_shank, p_foot)
    R = JointKind.REVOLUTE_PITCH
    joints = (
        Joint("base_x", JointKind.PRISMATIC_X, -1),
        Joint("base_z", JointKind.PRISMATIC_Z, 0),
        Joint("torso_pitch", R, 1),
        Joint("left_hip", R, 2),
        Joint("left_knee", R, 3, (0.0, -thigh.length)),
        Joint("left_ankle", R, 4, (0.0, -shank.length)),
        Joint("right_hip", R, 2),
        Joint("socket_x", JointKind.PRISMATIC_X, 6, (0.0, -residual.length)),
        Joint("socket_z", JointKind.PRISMATIC_Z, 7),
        Joint("socket_pitch", R, 8),
        *prosthesis_joints(p, 9),
    )
    actuation = tuple(i in FullModelLayout.actuated for i in range(len(joints)))
    model = PlanarModel(links=links, joints=joints, actuation_map=actuation)

    p_sole, p_heel, p_toe = prosthesis_contact_points(p)
    layout = FullModelLayout(
        leg_length=thigh.length + shank.length + sole,
        shoe_lift=shoe_lift,
        socket=Attachment(9),
        human_sole=Attachment(5, (0.0, -sole)),
        prosthesis_sole=Attachment(11, p_sole),
        human_heel=Attachment(5, (-heel, -sole)),
        human_toe=Attachment(5, (foot_len - heel, -sole)),
        prosthesis_heel=Attachment(11, p_heel),
        prosthesis_toe=Attachment(11, p_toe),
    )
    logger.debug(
        "full model: %.1f kg human + %.2f kg prosthesis, leg %.3f m, shoe lift %.3f m",
        W,
        p.total_mass,
        layout.leg_length,
        shoe_lift,
    )
    return model, layout
