"""Scalar analytics: wasted-effort fraction, the indication-probability
decomposition, and RMSE comparison of candidate queueing models."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ValidationError
from .simulator.types import PerfMeasures


@dataclass(frozen=True)
class Segment:
    """One workload segment: its share of inquiries, mean handling time in
    minutes, and the fraction of that time that is actual agent work."""

    share: float
    los: float
    work_fraction: float
    is_sab: bool

    def __post_init__(self) -> None:
        if not 0.0 <= self.share <= 1.0:
            raise ValidationError(f"share must be a probability, got {self.share}")
        if self.los < 0:
            raise ValidationError(f"los must be nonnegative, got {self.los}")
        if not 0.0 < self.work_fraction <= 1.0:
            raise ValidationError(f"work_fraction must be in (0, 1], got {self.work_fraction}")
        if self.is_sab and self.work_fraction != 1.0:
            raise ValidationError("silent-abandonment time is pure agent work: work_fraction must be 1")


@dataclass(frozen=True)
class EffortInputs:
    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        if abs(sum(s.share for s in self.segments) - 1.0) > 1e-9:
            raise ValidationError("segment shares must sum to 1 within 1e-9")


def effort(inputs: EffortInputs) -> float:
    """Fraction of total agent work time spent on silent-abandonment chats."""
    numerator = sum(s.share * s.los for s in inputs.segments if s.is_sab)
    denominator = sum(s.share * s.los * s.work_fraction for s in inputs.segments)
    if denominator <= 0.0:
        raise ValidationError("effort is undefined: total work time is zero")
    return numerator / denominator


def q_from_proportions(p_c2: float, p_m0: float, p_c3_given_m0: float) -> float:
    """Indication probability from observable class proportions.

    q = P{known ab.} / (P{silent ab. | uncertain} P{uncertain} + P{known ab.}).
    """
    for name, v in (("p_c2", p_c2), ("p_m0", p_m0), ("p_c3_given_m0", p_c3_given_m0)):
        if not 0.0 <= v <= 1.0:
            raise ValidationError(f"{name} must be a probability, got {v}")
    denominator = p_c3_given_m0 * p_m0 + p_c2
    if denominator <= 0.0:
        raise ValidationError("q is undefined: no abandonment in the proportions")
    return p_c2 / denominator


def rmse_compare(
    reference: Sequence[PerfMeasures],
    candidates: Mapping[str, Sequence[PerfMeasures]],
) -> list[tuple[str, str, float]]:
    """Per-measure RMSE of each candidate series against the reference.

    Series must be aligned and of equal length (e.g. hourly, or one entry
    per replication).  Returns (model_id, measure, rmse) rows.
    """
    rows: list[tuple[str, str, float]] = []
    for model_id, series in candidates.items():
        if len(series) != len(reference):
            raise ValidationError(
                f"candidate {model_id!r} has {len(series)} entries, reference has {len(reference)}"
            )
        for measure in PerfMeasures.MEASURE_NAMES:
            sq = 0.0
            count = 0
            for ref, cand in zip(reference, series):
                a = getattr(ref, measure)
                b = getattr(cand, measure)
                if math.isnan(a) or math.isnan(b):
                    continue
                sq += (a - b) ** 2
                count += 1
            if count:
                rows.append((model_id, measure, math.sqrt(sq / count)))
    return rows
