from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np


class JointKind(StrEnum):
    REVOLUTE_PITCH = "revolute-pitch"
    PRISMATIC_X = "prismatic-x"
    PRISMATIC_Z = "prismatic-z"


class DomainId(StrEnum):
    PS = "ps"  # prosthesis stance
    PNS = "pns"  # prosthesis non-stance


class ControllerKind(StrEnum):
    FORCE_SENSING = "force-sensing-idclfqp"
    NO_SENSOR = "no-sensor-idclfqp"
    FORCE_ESTIMATING = "force-estimating-idclfqp"
    PD = "pd"


class TerrainKind(StrEnum):
    RIGID = "rigid"
    COMPLIANT = "compliant"


class QpStatus(StrEnum):
    OPTIMAL = "optimal"
    MAX_ITER = "max-iter"
    INFEASIBLE = "infeasible"


def next_domain(domain: DomainId) -> DomainId:
    """Directed cycle ps -> pns -> ps."""
    return DomainId.PNS if domain == DomainId.PS else DomainId.PS


@dataclass
class SensedForces:
    """Socket wrench (load cell) and insole ground channels seen by the controller."""

    F_f: np.ndarray = field(default_factory=lambda: np.zeros(3))
    F_gz: float = 0.0
    M_gy: float = 0.0
    F_f_valid: bool = True
    F_gz_valid: bool = True
    M_gy_valid: bool = True
    saturated: bool = False


@dataclass
class ImuReading:
    pitch: float = 0.0
    pitch_rate: float = 0.0
