"""I.i.d. synthetic sampler for the estimator accuracy studies.

Draws patience, virtual wait and the indication flag directly from the model
distributions (no queue dynamics), so every estimator assumption holds by
construction.
"""

from __future__ import annotations

import numpy as np

from ..domain import CompleteClass, Observation
from ..errors import ValidationError


def sample_iid(
    theta: float, gamma: float, q: float, n_records: int, seed: int
) -> list[tuple[Observation, CompleteClass]]:
    """Draw complete-data (Observation, class) pairs.

    A customer abandons when her patience ends before the virtual wait; she
    indicates it with probability q.  Observed time is the wait for served
    and silent-abandonment customers, the patience for known abandonments.
    """
    if not (theta > 0 and gamma > 0):
        raise ValidationError("theta and gamma must be positive rates")
    if not 0.0 <= q <= 1.0:
        raise ValidationError(f"q must be a probability, got {q}")
    if n_records < 1:
        raise ValidationError(f"n_records must be >= 1, got {n_records}")

    rng = np.random.default_rng(seed)
    t = rng.exponential(scale=1.0 / theta, size=n_records)
    w = rng.exponential(scale=1.0 / gamma, size=n_records)
    tiny = np.finfo(float).tiny
    t[t == 0.0] = tiny
    w[w == 0.0] = tiny
    y = rng.random(n_records) < q

    out: list[tuple[Observation, CompleteClass]] = []
    for ti, wi, yi in zip(t, w, y):
        if ti > wi:
            out.append((Observation(u=float(wi), y=0, delta=0), CompleteClass.C1_SERVICE))
        elif yi:
            out.append(
                (Observation(u=float(ti), y=1, delta=1), CompleteClass.C2_KNOWN_ABANDONMENT)
            )
        else:
            out.append(
                (Observation(u=float(wi), y=0, delta=1), CompleteClass.C3_SILENT_ABANDONMENT)
            )
    return out
