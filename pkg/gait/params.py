"""Gait parameter files (YAML, see docs/file_formats.md).

Each domain carries the prosthesis knee Bézier coefficients, the phase
normalization, the ankle set-point schedule and the human-side trajectories
that the simulated walker follows on a per-domain clock.
"""

from pathlib import Path

import numpy as np
import yaml
from pydantic import BaseModel, ValidationError, field_validator, model_validator

from core.types import DomainId
from gait.bezier import GaitError, fit_bezier

MIN_DEGREE = 3


class AnkleSchedule(BaseModel):
    kp: float
    kd: float
    setpoints: list[tuple[float, float]]  # (tau, angle), piecewise constant

    @field_validator("setpoints")
    @classmethod
    def _ordered(cls, v: list[tuple[float, float]]) -> list[tuple[float, float]]:
        if not v or v[0][0] != 0.0:
            raise ValueError("first set-point must start at tau = 0")
        taus = [t for t, _ in v]
        if taus != sorted(taus):
            raise ValueError("set-points must be sorted by tau")
        return v

    def setpoint(self, tau: float) -> float:
        angle = self.setpoints[0][1]
        for t, a in self.setpoints:
            if tau >= t:
                angle = a
        return angle


class HumanTrajectories(BaseModel):
    """Bézier coefficients over the domain clock s in [0, 1].

    swing_thigh: world pitch of the swinging thigh (left in ps, residual in pns)
    knee: left knee (swing in ps, stance in pns)
    ankle: left ankle in pns; in ps the swing foot is held level instead
    """

    swing_thigh: list[float]
    knee: list[float]
    ankle: list[float] | None = None


class DomainGait(BaseModel):
    p0: float
    pf: float
    knee: list[float]
    ankle: AnkleSchedule
    human: HumanTrajectories

    @model_validator(mode="after")
    def _check(self) -> "DomainGait":
        if self.pf == self.p0:
            raise ValueError("phase normalization needs pf != p0")
        if not np.all(np.isfinite(self.knee)):
            raise ValueError("knee coefficients must be finite")
        return self

    @property
    def alpha(self) -> np.ndarray:
        return np.array([self.knee], dtype=float)


class GaitParams(BaseModel):
    degree: int
    step_length: float
    duration: float
    domains: dict[DomainId, DomainGait]

    @model_validator(mode="after")
    def _check(self) -> "GaitParams":
        if self.degree < MIN_DEGREE:
            raise ValueError(f"degree must be >= {MIN_DEGREE}")
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        missing = set(DomainId) - set(self.domains)
        if missing:
            raise ValueError(f"missing domains: {sorted(missing)}")
        for name, d in self.domains.items():
            curves = [d.knee, d.human.swing_thigh, d.human.knee] + ([d.human.ankle] if d.human.ankle else [])
            if any(len(c) != self.degree + 1 for c in curves):
                raise ValueError(f"domain {name}: every curve needs {self.degree + 1} coefficients")
        return self

    def domain(self, domain: DomainId) -> DomainGait:
        return self.domains[domain]

    def to_dict(self) -> dict:
        out: dict = {
            "degree": self.degree,
            "step_length": float(self.step_length),
            "duration": float(self.duration),
            "domains": {},
        }
        for d in DomainId:
            g = self.domains[d]
            human: dict = {
                "swing_thigh": [float(c) for c in g.human.swing_thigh],
                "knee": [float(c) for c in g.human.knee],
            }
            if g.human.ankle is not None:
                human["ankle"] = [float(c) for c in g.human.ankle]
            out["domains"][str(d)] = {
                "p0": float(g.p0),
                "pf": float(g.pf),
                "knee": [float(c) for c in g.knee],
                "ankle": {
                    "kp": float(g.ankle.kp),
                    "kd": float(g.ankle.kd),
                    "setpoints": [[float(t), float(a)] for t, a in g.ankle.setpoints],
                },
                "human": human,
            }
        return out


def _read_yaml(path: str | Path) -> dict:
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except FileNotFoundError as e:
        raise GaitError(f"gait file not found: {path}") from e
    except yaml.YAMLError as e:
        raise GaitError(f"invalid YAML in {path}: {e}") from e
    if not isinstance(data, dict):
        raise GaitError(f"{path}: expected a mapping at top level")
    return data


def load_gait(path: str | Path) -> GaitParams:
    try:
        return GaitParams(**_read_yaml(path))
    except ValidationError as e:
        raise GaitError(f"{path}: {e}") from e


def dump_gait(gait: GaitParams, header: str = "") -> str:
    body = yaml.safe_dump(gait.to_dict(), sort_keys=False, default_flow_style=None)
    return header + body


def save_gait(gait: GaitParams, path: str | Path, header: str = "") -> None:
    Path(path).write_text(dump_gait(gait, header))


def format_residual(residual: float) -> str:
    return "below 1e-10" if residual < 1e-10 else f"{residual:.6e}"


def fit_gait(samples_path: str | Path, degree: int) -> tuple[GaitParams, float]:
    """Fit the knee samples of every domain; returns the gait and the largest residual.

    The samples file has the layout of a gait file with ``samples: {tau, knee}``
    in place of each domain's ``knee`` coefficients.
    """
    if degree < MIN_DEGREE:
        raise GaitError(f"degree must be >= {MIN_DEGREE}, got {degree}")
    data = _read_yaml(samples_path)
    worst = 0.0
    domains = {}
    for name, spec in (data.get("domains") or {}).items():
        spec = dict(spec)
        samples = spec.pop("samples", None)
        if not samples or "tau" not in samples or "knee" not in samples:
            raise GaitError(f"{samples_path}: domain {name} has no tau/knee samples")
        alpha, residual = fit_bezier(np.asarray(samples["tau"]), np.asarray(samples["knee"]), degree)
        worst = max(worst, residual)
        # +0.0 turns a rounded -0.0 into 0.0 so reruns print identically
        spec["knee"] = [round(float(c), 8) + 0.0 for c in alpha]
        domains[name] = spec
    try:
        gait = GaitParams(
            degree=degree,
            step_length=data.get("step_length", 0.0),
            duration=data.get("duration", 0.0),
            domains=domains,
        )
    except ValidationError as e:
        raise GaitError(f"{samples_path}: {e}") from e
    return gait, worst


def fit_header(samples_path: str | Path, degree: int, residual: float) -> str:
    return (
        "# Nominal walking gait. Prosthesis knee coefficients are fitted by\n"
        f"# `kneeqp fit-gait` from {Path(samples_path).name} (degree {degree}, residual {format_residual(residual)}).\n"
        "# Human trajectories and ankle schedules are copied from the samples file.\n"
    )
