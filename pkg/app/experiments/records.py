"""
Per-repetition records and their aggregation
"""
from collections import defaultdict
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class RepetitionStatus(str, Enum):
    """Outcome of one method on one repetition; errors carry their error code instead"""

    OK = "ok"
    INFEASIBLE = "infeasible"


class RepetitionRecord(BaseModel):
    """Measured errors of one method on one repetition"""

    model_config = ConfigDict(extra="forbid")

    method: str
    rep_index: int
    n0: int
    n1: int
    p: int
    alpha: float
    delta: float
    threshold: Optional[float] = None
    type1_emp: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    type2_emp: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    type1_pop: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    type2_pop: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    status: str = RepetitionStatus.OK.value
    axis_value: int = Field(default=0, exclude=True)

    @property
    def ok(self) -> bool:
        return self.status == RepetitionStatus.OK.value

    def sort_key(self) -> Tuple[str, int, int]:
        return (self.method, self.axis_value, self.rep_index)


RECORD_COLUMNS = [name for name, info in RepetitionRecord.model_fields.items() if not info.exclude]


class AggregateRow(BaseModel):
    """
    Summary of one method at one grid point

    ``violation_rate`` uses population type I errors when they exist and falls
    back to empirical ones; ``violation_rate_emp`` always uses empirical errors.
    Both are computed over ok repetitions only.
    """

    model_config = ConfigDict(extra="forbid")

    method: str
    axis_value: int
    mean_type1: Optional[float] = None
    mean_type2: Optional[float] = None
    violation_rate: Optional[float] = None
    violation_rate_emp: Optional[float] = None
    feasible_fraction: float

    def sort_key(self) -> Tuple[str, int]:
        return (self.method, self.axis_value)


AGGREGATE_COLUMNS = list(AggregateRow.model_fields)

# the oracle sits exactly at alpha up to roundoff
VIOLATION_TOL = 1e-12


def _mean(values: List[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def aggregate(records: Iterable[RepetitionRecord], alpha: float) -> List[AggregateRow]:
    """Per method and grid point summaries, independent of record order"""
    groups: Dict[Tuple[str, int], List[RepetitionRecord]] = defaultdict(list)
    for record in sorted(records, key=RepetitionRecord.sort_key):
        groups[(record.method, record.axis_value)].append(record)

    rows = []
    for (method, axis_value), group in sorted(groups.items()):
        ok = [rec for rec in group if rec.ok]
        emp1 = [rec.type1_emp for rec in ok]
        pop1 = [rec.type1_pop for rec in ok if rec.type1_pop is not None]
        violation_emp = _mean([float(v > alpha + VIOLATION_TOL) for v in emp1])
        violation = _mean([float(v > alpha + VIOLATION_TOL) for v in pop1]) if pop1 and len(pop1) == len(ok) else violation_emp
        rows.append(
            AggregateRow(
                method=method,
                axis_value=axis_value,
                mean_type1=_mean(emp1),
                mean_type2=_mean([rec.type2_emp for rec in ok]),
                violation_rate=violation,
                violation_rate_emp=violation_emp,
                feasible_fraction=len(ok) / len(group),
            )
        )
    return rows
