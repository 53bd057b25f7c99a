"""CSV ingestion and emission for every file format the toolkit speaks.

All files are UTF-8 with LF line endings.  Observation durations are stored
in hours; ingestion can convert from declared units.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .domain import Observation
from .errors import ValidationError
from .simulator.types import CustomerRecord, PerfMeasures

OBSERVATION_HEADER = ["u_hours", "y", "delta", "pi"]
ESTIMATE_HEADER = ["method", "theta", "q", "gamma", "iterations", "converged", "loglik"]
RECORD_HEADER = ["arrival", "patience", "y", "outcome", "wait", "service_start", "service_dur"]
PERF_HEADER = ["replication", "p_wait", "p_ab", "e_queue", "e_wait", "e_wait_served", "e_queue_true"]

_UNIT_TO_HOURS = {"hours": 1.0, "minutes": 1.0 / 60.0, "seconds": 1.0 / 3600.0}


def _open_write(path: Path):
    return open(path, "w", encoding="utf-8", newline="\n")


def ingest_observations(path: str | Path, units: str = "hours") -> list[Observation]:
    """Read and validate an Observation CSV; errors carry row numbers."""
    if units not in _UNIT_TO_HOURS:
        raise ValidationError(f"units must be one of {sorted(_UNIT_TO_HOURS)}, got {units!r}")
    factor = _UNIT_TO_HOURS[units]
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no such file: {path}")

    observations: list[Observation] = []
    problems: list[str] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != OBSERVATION_HEADER:
            raise ValidationError(
                f"{path}: expected header {','.join(OBSERVATION_HEADER)}, got {header}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                if len(row) != 4:
                    raise ValidationError(f"expected 4 fields, got {len(row)}")
                u = float(row[0]) * factor
                y = int(row[1])
                delta: Optional[int] = None if row[2].strip() == "" else int(row[2])
                pi: Optional[float] = None if row[3].strip() == "" else float(row[3])
                observations.append(Observation(u=u, y=y, delta=delta, pi=pi))
            except (ValueError, ValidationError) as exc:
                problems.append(f"row {lineno}: {exc}")
    if problems:
        raise ValidationError(f"{path}: " + "; ".join(problems))
    return observations


def write_observations(path: str | Path, observations: Sequence[Observation]) -> None:
    with _open_write(Path(path)) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(OBSERVATION_HEADER)
        for obs in observations:
            writer.writerow(
                [
                    repr(obs.u),
                    obs.y,
                    "" if obs.delta is None else obs.delta,
                    "" if obs.pi is None else repr(obs.pi),
                ]
            )


def write_estimates(path: str | Path, rows: Iterable[dict]) -> None:
    """Rows with keys method, theta, q, gamma, iterations, converged, loglik."""
    with _open_write(Path(path)) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ESTIMATE_HEADER)
        for row in rows:
            writer.writerow([row.get(k, "") for k in ESTIMATE_HEADER])


def _fmt_time(v: Optional[float]) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return format(v, ".9g")


def write_customer_records(path: str | Path, records: Sequence[CustomerRecord]) -> None:
    with _open_write(Path(path)) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_HEADER)
        for rec in records:
            writer.writerow(
                [
                    _fmt_time(rec.arrival_time),
                    _fmt_time(rec.patience_draw),
                    rec.indication_draw,
                    rec.outcome.name,
                    _fmt_time(rec.wait),
                    _fmt_time(rec.service_start),
                    _fmt_time(rec.service_duration),
                ]
            )


def write_perf_measures(path: str | Path, measures: Sequence[PerfMeasures]) -> None:
    with _open_write(Path(path)) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PERF_HEADER)
        for i, m in enumerate(measures):
            writer.writerow(
                [
                    i,
                    _fmt_time(m.p_wait),
                    _fmt_time(m.p_ab),
                    _fmt_time(m.e_queue),
                    _fmt_time(m.e_wait),
                    _fmt_time(m.e_wait_served),
                    _fmt_time(m.e_queue_true),
                ]
            )


def write_rmse_table(path: str | Path, rows: Sequence[tuple[str, str, float]]) -> None:
    with _open_write(Path(path)) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model", "measure", "rmse"])
        for model_id, measure, rmse in rows:
            writer.writerow([model_id, measure, repr(rmse)])
