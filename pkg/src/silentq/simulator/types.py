"""Simulator configuration and result types."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from ..errors import ValidationError


class Outcome(enum.Enum):
    SERVED = 0
    KAB = 1
    SAB = 2
    CENSORED_AT_END = 3


@dataclass(frozen=True)
class SimConfig:
    """Parameters of the queueing model with silent abandonment.

    `mu_sab = math.inf` means phantom customers release their slot
    instantaneously (the no-capacity-loss variant).  All rates are per hour,
    all durations in hours.
    """

    lam: float
    theta: float
    q: float
    n_slots: int
    mu_sr: float
    mu_sab: float
    horizon: float = 720.0
    warmup: float = 2.0
    seed: int = 0

    def __post_init__(self) -> None:
        for name, v in (("lam", self.lam), ("theta", self.theta), ("mu_sr", self.mu_sr)):
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be a positive finite rate, got {v}")
        if not (self.mu_sab > 0):
            raise ValidationError(f"mu_sab must be positive (math.inf allowed), got {self.mu_sab}")
        if not 0.0 <= self.q <= 1.0:
            raise ValidationError(f"q must be a probability, got {self.q}")
        if self.n_slots < 1:
            raise ValidationError(f"n_slots must be >= 1, got {self.n_slots}")
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise ValidationError(f"horizon must be positive and finite, got {self.horizon}")
        if not 0.0 <= self.warmup < self.horizon:
            raise ValidationError("warmup must satisfy 0 <= warmup < horizon")

    @property
    def sab_instantaneous(self) -> bool:
        return math.isinf(self.mu_sab)


@dataclass(frozen=True)
class CustomerRecord:
    """One customer's path through the system."""

    arrival_time: float
    patience_draw: float
    indication_draw: int
    wait: float
    outcome: Outcome
    service_start: Optional[float] = None
    service_duration: Optional[float] = None


@dataclass(frozen=True)
class PerfMeasures:
    """Aggregate performance measures of one run or one reference series.

    `e_queue` counts phantoms while they sit in the queue (the queue the
    system believes it has); `e_queue_true` excludes customers already past
    their patience.  `e_wait_served` is nan when no customer was served.
    """

    p_wait: float
    p_ab: float
    e_queue: float
    e_wait: float
    e_wait_served: float
    e_queue_true: Optional[float] = None

    def __post_init__(self) -> None:
        for name, v in (("p_wait", self.p_wait), ("p_ab", self.p_ab)):
            if math.isfinite(v) and not 0.0 <= v <= 1.0 + 1e-12:
                raise ValidationError(f"{name} must be a probability, got {v}")

    MEASURE_NAMES = ("p_wait", "p_ab", "e_queue", "e_wait", "e_wait_served")
