"""Ground models. The surface is the plane z = 0.

Rigid terrain pins the stance sole through a holonomic constraint (handled by
the integrator); compliant terrain produces point forces at the heel and toe
of both feet with a Hunt-Crossley normal law and a stick spring tangentially.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from core.config import TerrainPreset
from core.types import TerrainKind


@dataclass
class ContactForce:
    fx: float = 0.0
    fz: float = 0.0
    slipping: bool = False  # |fx| > mu fz, reported only

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.fx, self.fz])


class Terrain(ABC):
    kind: TerrainKind
    friction: float

    @property
    def rigid(self) -> bool:
        return self.kind == TerrainKind.RIGID

    @abstractmethod
    def contact_force(self, position: np.ndarray, velocity: np.ndarray, anchor_x: float | None) -> ContactForce:
        """Force on a contact point at ``position`` (x, z) moving at ``velocity``."""


class RigidTerrain(Terrain):
    kind = TerrainKind.RIGID

    def __init__(self, friction: float = 0.8):
        self.friction = friction

    def contact_force(self, position: np.ndarray, velocity: np.ndarray, anchor_x: float | None) -> ContactForce:
        # Stance forces come out of the constraint solve.
        return ContactForce()


class CompliantTerrain(Terrain):
    kind = TerrainKind.COMPLIANT

    def __init__(self, preset: TerrainPreset):
        self.stiffness = preset.stiffness
        self.exponent = preset.exponent
        self.damping = preset.damping
        self.tangential_stiffness = preset.tangential_stiffness
        self.tangential_damping = preset.tangential_damping
        self.friction = preset.friction

    def normal_force(self, penetration: float, rate: float) -> float:
        """k d^p (1 + c d'), clipped at zero."""
        if penetration <= 0.0:
            return 0.0
        return max(0.0, self.stiffness * penetration**self.exponent * (1.0 + self.damping * rate))

    def rest_penetration(self, load: float) -> float:
        """Penetration carrying ``load`` newtons at rest."""
        return (load / self.stiffness) ** (1.0 / self.exponent)

    def contact_force(self, position: np.ndarray, velocity: np.ndarray, anchor_x: float | None) -> ContactForce:
        fz = self.normal_force(-position[1], -velocity[1])
        if fz == 0.0:
            return ContactForce()
        x0 = position[0] if anchor_x is None else anchor_x
        fx = -self.tangential_stiffness * (position[0] - x0) - self.tangential_damping * velocity[0]
        return ContactForce(fx=float(fx), fz=float(fz), slipping=bool(abs(fx) > self.friction * fz))


def create_terrain(preset: TerrainPreset) -> Terrain:
    if preset.kind == TerrainKind.RIGID:
        return RigidTerrain(preset.friction)
    return CompliantTerrain(preset)
