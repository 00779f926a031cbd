"""Episode records: one row per control tick plus step events.

CSV columns are listed in ``COLUMNS`` and documented in docs/file_formats.md.
Floats are written with ``repr`` so a log read back is bit-identical.
"""

import csv
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from core.types import DomainId


@dataclass
class TickRecord:
    t: float
    domain: DomainId
    step: int
    cycle: int  # prosthesis strides completed before this tick
    tau: float
    knee: float
    knee_rate: float
    knee_desired: float
    y: float
    ydot: float
    ankle: float
    u_knee: float
    u_ankle: float
    V: float
    Vdot: float
    bound: float
    delta: float
    lam_hx: float
    qp_status: str
    fallback: bool
    sensed_fx: float
    sensed_fz: float
    sensed_my: float
    sensed_gz: float
    sensed_gy: float
    true_fx: float
    true_fz: float
    true_my: float
    true_gx: float
    true_gz: float
    true_gy: float
    cop_x: float  # insole centre of pressure along the sole, nan off the ground
    liftoff: bool
    slipping: bool


COLUMNS = tuple(f.name for f in fields(TickRecord))
_BOOL = {f.name for f in fields(TickRecord) if f.type is bool}
_INT = {"step", "cycle"}
_STR = {"domain", "qp_status"}


@dataclass
class StepEvent:
    t: float
    step: int
    domain: DomainId  # domain entered
    impact_noop: bool = False


@dataclass
class EpisodeLog:
    subject: str = ""
    terrain: str = ""
    controller: str = ""
    seed: int = 0
    records: list[TickRecord] = field(default_factory=list)
    steps: list[StepEvent] = field(default_factory=list)
    fell: bool = False
    fall_reason: str = ""
    duration: float = 0.0

    def log(self, record: TickRecord) -> None:
        self.records.append(record)

    @property
    def step_count(self) -> int:
        return len(self.steps)

    @property
    def name(self) -> str:
        return f"{self.subject}_{self.terrain}_{self.controller}_s{self.seed}"

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(COLUMNS)
            for r in self.records:
                writer.writerow(_cell(getattr(r, c)) for c in COLUMNS)

    def summary(self) -> dict:
        # Imported here, report depends on this module.
        from report.rmse import phase_rmse

        stance, swing, cycles = phase_rmse(self.records)
        return {
            "subject": self.subject,
            "terrain": self.terrain,
            "controller": self.controller,
            "seed": self.seed,
            "steps": self.step_count,
            "fell": self.fell,
            "fall_reason": self.fall_reason,
            "duration": self.duration,
            "ticks": len(self.records),
            "cycles_used": cycles,
            "rmse": {"stance": stance, "swing": swing},
            "fallback_ticks": sum(r.fallback for r in self.records),
            "step_events": [asdict(s) for s in self.steps],
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2, default=str) + "\n")

    def save(self, out_dir: str | Path) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = out / f"{self.name}.csv", out / f"{self.name}.json"
        self.write_csv(csv_path)
        self.write_json(json_path)
        return csv_path, json_path


def _cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(name: str, text: str):
    if name in _BOOL:
        return text == "1"
    if name in _INT:
        return int(text)
    if name == "domain":
        return DomainId(text)
    if name in _STR:
        return text
    return float(text)


def read_csv(path: str | Path) -> list[TickRecord]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != COLUMNS:
            raise ValueError(f"{path}: unexpected columns")
        return [TickRecord(**{c: _parse(c, v) for c, v in zip(COLUMNS, row, strict=True)}) for row in reader]
