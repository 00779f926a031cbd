from pathlib import Path

import tomli
from pydantic import BaseModel, ValidationError, field_validator

CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"
DEFAULT_PROSTHESIS = CONFIG_DIR / "prosthesis.toml"
DEFAULT_ANTHROPOMETRY = CONFIG_DIR / "anthropometry.toml"


class ModelError(ValueError):
    pass


class Anthropometry(BaseModel):
    height: float  # m
    weight: float  # kg

    @field_validator("height", "weight")
    @classmethod
    def _positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("must be > 0")
        return v


class SegmentFractions(BaseModel):
    mass: float
    length: float
    com: float
    gyration: float


class FootFractions(SegmentFractions):
    height: float
    heel: float


class SegmentTable(BaseModel):
    torso: SegmentFractions
    thigh: SegmentFractions
    shank: SegmentFractions
    foot: FootFractions
    residual: SegmentFractions

    @property
    def mass_sum(self) -> float:
        return self.torso.mass + self.thigh.mass + self.shank.mass + self.foot.mass + self.residual.mass


class ProsthesisLink(BaseModel):
    mass: float
    length: float
    com: float
    inertia: float

    @field_validator("mass", "length")
    @classmethod
    def _positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("must be > 0")
        return v


class ProsthesisFoot(BaseModel):
    mass: float
    length: float
    height: float
    heel: float
    com_x: float
    com_z: float
    inertia: float


class ProsthesisParams(BaseModel):
    upper: ProsthesisLink
    shank: ProsthesisLink
    foot: ProsthesisFoot

    @property
    def total_mass(self) -> float:
        return self.upper.mass + self.shank.mass + self.foot.mass

    @property
    def leg_length(self) -> float:
        """Socket to sole."""
        return self.upper.length + self.shank.length + self.foot.height


def _read_toml(path: str | Path) -> dict:
    try:
        with open(path, "rb") as f:
            return tomli.load(f)
    except FileNotFoundError as e:
        raise ModelError(f"parameter file not found: {path}") from e
    except tomli.TOMLDecodeError as e:
        raise ModelError(f"invalid TOML in {path}: {e}") from e


def load_prosthesis(path: str | Path = DEFAULT_PROSTHESIS) -> ProsthesisParams:
    try:
        return ProsthesisParams(**_read_toml(path))
    except ValidationError as e:
        raise ModelError(f"{path}: {e}") from e


def load_segment_table(path: str | Path = DEFAULT_ANTHROPOMETRY) -> SegmentTable:
    try:
        table = SegmentTable(**_read_toml(path))
    except ValidationError as e:
        raise ModelError(f"{path}: {e}") from e
    if abs(table.mass_sum - 1.0) > 1e-9:
        raise ModelError(f"{path}: segment mass fractions sum to {table.mass_sum:.6f}, expected 1")
    return table
