"""Knee tracking RMSE per phase over the last complete step cycles."""

import math
from collections.abc import Sequence

from core.types import DomainId
from sim.log import TickRecord

CYCLES = 11


def complete_cycles(records: Sequence[TickRecord]) -> list[int]:
    """Cycle indices that were followed by a later cycle (the last one may be cut short)."""
    seen = sorted({r.cycle for r in records})
    return seen[:-1]


def select_cycles(records: Sequence[TickRecord], cycles: int = CYCLES) -> list[int]:
    return complete_cycles(records)[-cycles:]


def rmse(values: Sequence[float]) -> float:
    if not values:
        return math.nan
    return math.sqrt(sum(v * v for v in values) / len(values))


def phase_rmse(records: Sequence[TickRecord], cycles: int = CYCLES) -> tuple[float, float, int]:
    """(stance RMSE, swing RMSE, cycles used) of y = knee - knee_desired, radians."""
    chosen = set(select_cycles(records, cycles))
    stance = [r.y for r in records if r.cycle in chosen and r.domain == DomainId.PS]
    swing = [r.y for r in records if r.cycle in chosen and r.domain == DomainId.PNS]
    return rmse(stance), rmse(swing), len(chosen)
