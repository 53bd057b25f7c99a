"""Core data model: censored conversation records and customer-class taxonomy.

A conversation is summarised by the triple (U, Y, delta): the observed time,
whether the customer signalled an abandonment, and whether she abandoned at
all.  `delta` may be missing, which is exactly the uncertainty this package
exists to handle.  All durations are stored in hours.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError


class CompleteClass(enum.Enum):
    """Customer classes when the abandonment indicator is fully observed."""

    C1_SERVICE = 1
    C2_KNOWN_ABANDONMENT = 2
    C3_SILENT_ABANDONMENT = 3


class MissingClass(enum.Enum):
    """Customer classes as the recording system sees them.

    M0 collapses served-but-silent ("short service") conversations and
    silent abandonments into one uncertain group.
    """

    M1_SERVICE = 1
    M2_KNOWN_ABANDONMENT = 2
    M0_UNCERTAIN = 0


@dataclass(frozen=True)
class Observation:
    """One conversation's censoring record.

    Attributes
    ----------
    u : float
        Observed time in hours (wait time for served / silent-abandonment
        customers, realised patience for known abandonments).  Must be > 0.
    y : int
        1 if the customer signalled the abandonment (closed the window).
    delta : int or None
        1 if the customer abandoned, 0 if served, None if unknown.
    pi : float or None
        External classifier score P{silent abandonment | uncertain}.
        Only allowed when delta is missing.
    """

    u: float
    y: int
    delta: Optional[int]
    pi: Optional[float] = None

    def __post_init__(self) -> None:
        if not (isinstance(self.u, (int, float)) and math.isfinite(self.u)):
            raise ValidationError(f"u must be a finite number, got {self.u!r}")
        if self.u <= 0:
            raise ValidationError(f"u must be > 0, got {self.u}")
        if self.y not in (0, 1):
            raise ValidationError(f"y must be 0 or 1, got {self.y!r}")
        if self.delta not in (0, 1, None):
            raise ValidationError(f"delta must be 0, 1 or missing, got {self.delta!r}")
        if self.y == 1 and self.delta != 1:
            raise ValidationError("y=1 requires delta=1 (an indicated abandonment is an abandonment)")
        if self.delta is None and self.y != 0:
            raise ValidationError("missing delta requires y=0")
        if self.pi is not None:
            if self.delta is not None:
                raise ValidationError("pi is only meaningful when delta is missing")
            if not 0.0 <= self.pi <= 1.0:
                raise ValidationError(f"pi must be in [0, 1], got {self.pi}")

    @property
    def missing_class(self) -> MissingClass:
        """How a recording system without the delta flag would file this record.

        A complete silent abandonment (delta=1, y=0) leaves no indication, so
        its missing-data view is the uncertain class.
        """
        if self.delta == 0:
            return MissingClass.M1_SERVICE
        if self.y == 1:
            return MissingClass.M2_KNOWN_ABANDONMENT
        return MissingClass.M0_UNCERTAIN


@dataclass(frozen=True)
class ParamSet:
    """The estimand triple: patience rate, indication probability, wait rate.

    `gamma` may legitimately sit at the 0 boundary on degenerate data
    (every observation a known abandonment); callers that need a usable
    wait-time distribution should check for that.
    """

    theta: float
    q: float
    gamma: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.theta) and self.theta > 0):
            raise ValidationError(f"theta must be a positive rate, got {self.theta}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ValidationError(f"gamma must be a nonnegative rate, got {self.gamma}")
        if not 0.0 <= self.q <= 1.0:
            raise ValidationError(f"q must be a probability, got {self.q}")


@dataclass(frozen=True)
class ClassWeights:
    """Per-observation membership probabilities over (C1, C2, C3)."""

    c1: float
    c2: float
    c3: float

    def __post_init__(self) -> None:
        for name, v in (("c1", self.c1), ("c2", self.c2), ("c3", self.c3)):
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {v}")
        if abs(self.c1 + self.c2 + self.c3 - 1.0) > 1e-12:
            raise ValidationError(
                f"class weights must sum to 1 within 1e-12, got {self.c1 + self.c2 + self.c3!r}"
            )


def classify_complete(delta: int, y: int) -> CompleteClass:
    """Map a complete (delta, y) pair to its customer class.

    Raises ValidationError for the impossible combination delta=0, y=1.
    """
    if delta not in (0, 1) or y not in (0, 1):
        raise ValidationError(f"delta and y must be binary, got delta={delta!r}, y={y!r}")
    if delta == 0:
        if y == 1:
            raise ValidationError("delta=0 with y=1 is not a valid class")
        return CompleteClass.C1_SERVICE
    return CompleteClass.C2_KNOWN_ABANDONMENT if y == 1 else CompleteClass.C3_SILENT_ABANDONMENT


def mask(
    complete_records: Sequence[tuple[Observation, CompleteClass]],
    p_ss: float,
    seed: int,
) -> list[Observation]:
    """Degrade complete labels into the observable missing-data view.

    Every silent abandonment loses its delta (becomes M=0); each served
    record independently loses its delta with probability `p_ss`, which
    models served conversations that look like short service.  Known
    abandonments are never masked.  Deterministic under (seed, input order).
    """
    if not 0.0 <= p_ss <= 1.0:
        raise ValidationError(f"p_ss must be a probability, got {p_ss}")
    rng = np.random.default_rng(seed)
    draws = rng.random(len(complete_records))
    out: list[Observation] = []
    for (obs, cls), r in zip(complete_records, draws):
        if obs.delta is None:
            raise ValidationError("mask() expects complete records (delta present)")
        hide = cls is CompleteClass.C3_SILENT_ABANDONMENT or (
            cls is CompleteClass.C1_SERVICE and r < p_ss
        )
        if hide:
            out.append(Observation(u=obs.u, y=obs.y, delta=None, pi=obs.pi))
        else:
            out.append(obs)
    return out


def scope_report(p_kab: float, p_m0: float, pi_bar: float) -> tuple[float, float]:
    """Total abandonment probability and the silent share of it.

    Given the observed known-abandonment fraction, the uncertain fraction,
    and the mean classifier score over the uncertain group, returns
    (p_ab_total, sab_share).
    """
    for name, v in (("p_kab", p_kab), ("p_m0", p_m0), ("pi_bar", pi_bar)):
        if not 0.0 <= v <= 1.0:
            raise ValidationError(f"{name} must be a probability, got {v}")
    if p_kab + p_m0 > 1.0 + 1e-12:
        raise ValidationError(f"p_kab + p_m0 must not exceed 1, got {p_kab + p_m0}")
    p_ab_total = p_kab + p_m0 * pi_bar
    if p_ab_total == 0.0:
        raise ValidationError("no abandonment at all: silent share is undefined")
    return p_ab_total, (p_m0 * pi_bar) / p_ab_total
