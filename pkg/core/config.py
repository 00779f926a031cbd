from pathlib import Path

import tomli
from pydantic import BaseModel, ValidationError, field_validator, model_validator

from core.types import ControllerKind, TerrainKind


class ConfigError(ValueError):
    pass


class PhysicsConfig(BaseModel):
    dt_us: int = 500
    control_every: int = 12  # 12 x 0.5 ms = 6 ms, ~166 Hz
    baumgarte_omega: float = 50.0
    max_duration_s: float = 120.0

    @field_validator("dt_us", "control_every")
    @classmethod
    def _positive_int(cls, v: int) -> int:
        if v <= 0:
            raise ValueError("must be > 0")
        return v


class ModelFilesConfig(BaseModel):
    prosthesis: str = "config/prosthesis.toml"
    anthropometry: str = "config/anthropometry.toml"
    gait: str = "config/gait.yaml"


class InsoleConfig(BaseModel):
    rate_hz: float = 200.0
    accuracy: float = 0.10
    repeatability: float = 0.02
    hysteresis: float = 0.05
    delay_ms: float = 5.0
    gaussian_sigma: float = 1.0  # samples; 0 disables smoothing
    gaussian_taps: int = 4
    moving_average: int = 3
    noise: bool = True

    @field_validator("rate_hz")
    @classmethod
    def _rate(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("rate must be > 0")
        return v

    @field_validator("delay_ms")
    @classmethod
    def _delay(cls, v: float) -> float:
        if v < 0:
            raise ValueError("delay must be >= 0")
        return v


class LoadCellConfig(BaseModel):
    range_fx: float = 2500.0
    range_fz: float = 5000.0
    range_my: float = 200.0
    noise_force: float = 5.0
    noise_moment: float = 0.5
    noise: bool = True


class ImuConfig(BaseModel):
    rate_hz: float = 750.0
    noise_pitch: float = 0.002
    noise_rate: float = 0.01
    noise: bool = True


class SensorsConfig(BaseModel):
    insole: InsoleConfig = InsoleConfig()
    load_cell: LoadCellConfig = LoadCellConfig()
    imu: ImuConfig = ImuConfig()


class TerrainPreset(BaseModel):
    kind: TerrainKind = TerrainKind.COMPLIANT
    stiffness: float = 1.0e6  # N/m^p
    exponent: float = 1.5
    damping: float = 1.5  # Hunt-Crossley c, s/m
    tangential_stiffness: float = 2.0e5
    tangential_damping: float = 2.0e3
    friction: float = 0.8

    @model_validator(mode="after")
    def _check(self) -> "TerrainPreset":
        if self.kind == TerrainKind.COMPLIANT and (self.stiffness <= 0 or self.damping <= 0):
            raise ValueError("compliant terrain needs stiffness > 0 and damping > 0")
        return self


def _default_presets() -> dict[str, TerrainPreset]:
    return {
        "rigid": TerrainPreset(kind=TerrainKind.RIGID),
        "rubber": TerrainPreset(stiffness=2.0e5, damping=2.0),
        "grass": TerrainPreset(stiffness=4.0e5, damping=2.5),
        "track": TerrainPreset(stiffness=8.0e5, damping=1.5),
        "sidewalk": TerrainPreset(stiffness=2.0e6, damping=1.0),
    }


class ControllerConfig(BaseModel):
    kind: ControllerKind = ControllerKind.FORCE_SENSING
    kp: float = 250.0
    kd: float = 20.0
    epsilon: float = 0.1
    q_diag: list[float] = [1.0, 1.0]
    sigma: float = 1.0e-3
    rho: float = 25.0
    u_max_knee: float = 120.0
    u_max_ankle: float = 175.0
    window: int = 30

    @field_validator("kp", "kd", "sigma", "rho")
    @classmethod
    def _positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("must be > 0")
        return v

    @field_validator("u_max_knee", "u_max_ankle")
    @classmethod
    def _torque_limit(cls, v: float) -> float:
        if v < 0:
            raise ValueError("torque limit must be >= 0")
        return v

    @field_validator("epsilon")
    @classmethod
    def _epsilon(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        return v

    @field_validator("window")
    @classmethod
    def _window(cls, v: int) -> int:
        if v < 1:
            raise ValueError("window must be >= 1")
        return v


class SupportConfig(BaseModel):
    """Hand support at the hip: a pacing spring along x and a catch below ``catch_height``."""

    enabled: bool = True
    kx: float = 1500.0
    bx: float = 300.0
    kz: float = 8000.0
    bz: float = 400.0
    catch_height: float = 0.9  # fraction of leg length

    @field_validator("kx", "bx", "kz", "bz")
    @classmethod
    def _non_negative(cls, v: float) -> float:
        if v < 0:
            raise ValueError("support gains must be >= 0")
        return v

    @field_validator("catch_height")
    @classmethod
    def _catch(cls, v: float) -> float:
        if not 0.0 < v <= 1.0:
            raise ValueError("catch_height must lie in (0, 1]")
        return v


class HumanConfig(BaseModel):
    kp: float = 400.0
    kd: float = 30.0
    torso_kp: float = 800.0
    torso_kd: float = 80.0
    torso_pitch: float = 0.05
    strength: float = 150.0
    gravity_compensation: bool = True
    support: SupportConfig = SupportConfig()


class QpConfig(BaseModel):
    max_iter: int = 200
    regularization: float = 1.0e-8
    tolerance: float = 1.0e-9


class FallConfig(BaseModel):
    max_torso_pitch: float = 1.0
    min_hip_height: float = 0.55  # fraction of leg length


class SubjectConfig(BaseModel):
    name: str = "subject1"
    height: float = 1.70
    weight: float = 62.0

    @field_validator("height", "weight")
    @classmethod
    def _positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("anthropometry must be > 0")
        return v


class ExperimentConfig(BaseModel):
    subjects: list[SubjectConfig] = [SubjectConfig()]
    terrains: list[str] = ["rubber"]
    controllers: list[ControllerConfig] = [ControllerConfig()]
    steps: int = 40
    seed: int = 0
    output_dir: str = "runs"

    @field_validator("subjects", "terrains", "controllers")
    @classmethod
    def _non_empty(cls, v: list) -> list:
        if not v:
            raise ValueError("list must not be empty")
        return v

    @field_validator("steps")
    @classmethod
    def _steps(cls, v: int) -> int:
        if v < 1:
            raise ValueError("steps must be >= 1")
        return v


class Config(BaseModel):
    physics: PhysicsConfig = PhysicsConfig()
    model: ModelFilesConfig = ModelFilesConfig()
    sensors: SensorsConfig = SensorsConfig()
    terrain: dict[str, TerrainPreset] = _default_presets()
    controller: ControllerConfig = ControllerConfig()
    human: HumanConfig = HumanConfig()
    qp: QpConfig = QpConfig()
    fall: FallConfig = FallConfig()
    experiment: ExperimentConfig = ExperimentConfig()

    @model_validator(mode="after")
    def _check_terrains(self) -> "Config":
        for name in self.experiment.terrains:
            if name not in self.terrain:
                raise ValueError(f"unknown terrain preset: {name}")
        return self

    def terrain_preset(self, name: str) -> TerrainPreset:
        if name not in self.terrain:
            raise ConfigError(f"unknown terrain preset: {name}")
        return self.terrain[name]


def load_config(path: str | Path = "config/default.toml") -> Config:
    """Load config from TOML file, validate with Pydantic."""
    try:
        with open(path, "rb") as f:
            data = tomli.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except tomli.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML in {path}: {e}") from e
    # Presets named in the file extend the built-in ones.
    presets = {name: p.model_dump() for name, p in _default_presets().items()}
    for name, preset in data.get("terrain", {}).items():
        presets[name] = {**presets.get(name, {}), **preset}
    data["terrain"] = presets
    # Experiment controllers inherit the [controller] gains and override per entry.
    base = data.get("controller", {})
    experiment = data.setdefault("experiment", {})
    experiment["controllers"] = [{**base, **c} for c in experiment.get("controllers", [base])]
    try:
        return Config(**data)
    except ValidationError as e:
        raise ConfigError(str(e)) from e
