"""Planar articulated-chain description.

Every joint owns exactly one link (its child body), so joint ``i`` moves link
``i`` and the coordinate vector ``q`` is ordered like ``joints``. Frames are
(x, z, pitch) with z up; a link frame is rotated by its world pitch with the
usual 2-D rotation acting on (x, z).
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import tomli
from pydantic import BaseModel, field_validator

from core.types import JointKind


class DimensionError(ValueError):
    pass


class AttachmentError(ValueError):
    pass


@dataclass(frozen=True)
class Link:
    name: str
    mass: float  # kg; 0 for virtual frames (floating-base sliders)
    inertia_zz: float  # kg m^2 about the COM
    com_offset: tuple[float, float] = (0.0, 0.0)
    length: float = 0.0


@dataclass(frozen=True)
class Joint:
    name: str
    kind: JointKind
    parent: int  # link index, -1 for world
    offset: tuple[float, float] = (0.0, 0.0)  # in the parent link frame


@dataclass(frozen=True)
class Attachment:
    link: int
    point: tuple[float, float] = (0.0, 0.0)  # in the link frame


@dataclass(frozen=True)
class PlanarModel:
    links: tuple[Link, ...]
    joints: tuple[Joint, ...]
    actuation_map: tuple[bool, ...]
    gravity: tuple[float, float] = (0.0, -9.81)
    # Derived in __post_init__
    parents: np.ndarray = field(init=False, repr=False, compare=False)
    support: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    B: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = len(self.joints)
        if len(self.links) != n:
            raise DimensionError(f"{len(self.links)} links for {n} joints")
        if len(self.actuation_map) != n:
            raise DimensionError(f"actuation map has {len(self.actuation_map)} entries for {n} joints")
        for link in self.links:
            if link.mass < 0 or link.inertia_zz < 0:
                raise ValueError(f"link {link.name}: mass and inertia must be >= 0")
        parents = np.array([j.parent for j in self.joints], dtype=int)
        support: list[tuple[int, ...]] = []
        for i, joint in enumerate(self.joints):
            if not -1 <= joint.parent < i:
                raise ValueError(f"joint {joint.name}: parent {joint.parent} must precede it")
            chain = [i]
            p = joint.parent
            while p >= 0:
                chain.append(p)
                p = self.joints[p].parent
            support.append(tuple(reversed(chain)))
        actuated = [i for i, a in enumerate(self.actuation_map) if a]
        B = np.zeros((n, len(actuated)))
        for col, i in enumerate(actuated):
            B[i, col] = 1.0
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "support", tuple(support))
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return len(self.joints)

    @property
    def n_inputs(self) -> int:
        return self.B.shape[1]

    @property
    def total_mass(self) -> float:
        return float(sum(link.mass for link in self.links))

    def index(self, name: str) -> int:
        for i, joint in enumerate(self.joints):
            if joint.name == name:
                return i
        raise KeyError(f"no joint named {name}")

    def check_q(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.n,):
            raise DimensionError(f"expected coordinates of shape ({self.n},), got {q.shape}")
        return q

    def check_attachment(self, attachment: Attachment) -> None:
        if not 0 <= attachment.link < self.n:
            raise AttachmentError(f"link index {attachment.link} out of range for {self.n} links")
        if len(attachment.point) != 2 or not np.all(np.isfinite(attachment.point)):
            raise AttachmentError(f"invalid local point {attachment.point}")


# --- Structured-text model files -------------------------------------------


class _LinkSpec(BaseModel):
    name: str = ""
    mass: float
    inertia_zz: float = 0.0
    com_offset: list[float] = [0.0, 0.0]
    length: float = 0.0


class _JointSpec(BaseModel):
    name: str
    kind: JointKind
    parent: int = -1
    offset: list[float] = [0.0, 0.0]
    actuated: bool = False
    link: _LinkSpec

    @field_validator("offset")
    @classmethod
    def _planar(cls, v: list[float]) -> list[float]:
        if len(v) != 2:
            raise ValueError("offset must have 2 entries (x, z)")
        return v


class _ModelSpec(BaseModel):
    gravity: list[float] = [0.0, -9.81]
    joints: list[_JointSpec]


def model_from_dict(data: dict) -> PlanarModel:
    spec = _ModelSpec(**data)
    links = tuple(
        Link(
            name=j.link.name or j.name,
            mass=j.link.mass,
            inertia_zz=j.link.inertia_zz,
            com_offset=(j.link.com_offset[0], j.link.com_offset[1]),
            length=j.link.length,
        )
        for j in spec.joints
    )
    joints = tuple(Joint(j.name, j.kind, j.parent, (j.offset[0], j.offset[1])) for j in spec.joints)
    return PlanarModel(
        links=links,
        joints=joints,
        actuation_map=tuple(j.actuated for j in spec.joints),
        gravity=(spec.gravity[0], spec.gravity[1]),
    )


def load_model(path: str | Path) -> PlanarModel:
    """Load a model file (TOML, see docs/file_formats.md)."""
    with open(path, "rb") as f:
        return model_from_dict(tomli.load(f))
