"""RMSE tables and the report command back-end.

Reports are a pure function of the episode artifacts: each ``*.csv`` log is
read back and the stance and swing RMSE recomputed from its rows.
"""

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from report.plots import clf_trace, phase_portrait, torque_plot
from report.rmse import CYCLES, phase_rmse
from sim.log import read_csv

logger = logging.getLogger(__name__)

HEADER = f"Knee tracking RMSE (rad) over the last {CYCLES} complete step cycles"
REFERENCE_FOOTER = (
    "Reference hardware values (rubber floor, prosthesis stance): "
    "force sensing 0.0409 rad, no sensor 0.0797 rad; "
    "force sensing stance RMSE 0.0237 / 0.0409 rad for the two subjects."
)


@dataclass
class Row:
    subject: str
    terrain: str
    controller: str
    seed: int
    steps: int
    fell: bool
    stance: float
    swing: float
    cycles: int


@dataclass
class Report:
    rows: list[Row] = field(default_factory=list)
    problems: list[str] = field(default_factory=list)


def _row(csv_path: Path) -> Row:
    records = read_csv(csv_path)
    meta = json.loads(csv_path.with_suffix(".json").read_text())
    stance, swing, cycles = phase_rmse(records)
    return Row(
        subject=meta["subject"],
        terrain=meta["terrain"],
        controller=meta["controller"],
        seed=int(meta["seed"]),
        steps=int(meta["steps"]),
        fell=bool(meta["fell"]),
        stance=stance,
        swing=swing,
        cycles=cycles,
    )


def format_table(rows: list[Row]) -> str:
    head = ("subject", "terrain", "controller", "seed", "steps", "fell", "stance", "swing", "cycles")
    body = [
        (r.subject, r.terrain, r.controller, str(r.seed), str(r.steps), "yes" if r.fell else "no",
         f"{r.stance:.4f}", f"{r.swing:.4f}", str(r.cycles))
        for r in rows
    ]
    widths = [max(len(x) for x in col) for col in zip(head, *body, strict=False)]
    lines = [HEADER, ""]
    lines.append("  ".join(h.ljust(w) for h, w in zip(head, widths, strict=True)))
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(c.ljust(w) for c, w in zip(b, widths, strict=True)) for b in body)
    lines += ["", REFERENCE_FOOTER]
    return "\n".join(lines) + "\n"


def write_table_csv(rows: list[Row], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["subject", "terrain", "controller", "seed", "steps", "fell", "stance_rmse", "swing_rmse", "cycles"])
        for r in rows:
            writer.writerow([r.subject, r.terrain, r.controller, r.seed, r.steps, int(r.fell), repr(r.stance), repr(r.swing), r.cycles])


def build_report(in_dir: str | Path, out_dir: str | Path, plots: bool = True) -> Report:
    in_dir, out_dir = Path(in_dir), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = Report()
    for csv_path in sorted(in_dir.glob("*.csv")):
        if csv_path.name == "rmse.csv":
            continue
        try:
            row = _row(csv_path)
        except (OSError, ValueError, KeyError, TypeError) as e:
            logger.warning("skipping %s: %s", csv_path.name, e)
            report.problems.append(f"{csv_path.name}: {e}")
            continue
        report.rows.append(row)
        if plots:
            records = read_csv(csv_path)
            stem = csv_path.stem
            phase_portrait(records, out_dir / f"{stem}_phase.svg", stem)
            clf_trace(records, out_dir / f"{stem}_clf.svg", stem)
            torque_plot(records, out_dir / f"{stem}_torque.svg", stem)
    text = format_table(report.rows)
    if report.problems:
        text += "\nMissing or corrupt artifacts:\n" + "".join(f"  {p}\n" for p in report.problems)
    (out_dir / "rmse.txt").write_text(text)
    write_table_csv(report.rows, out_dir / "rmse.csv")
    return report
