"""Discrete-event simulation of a queue with silent abandonment.

The hot event loop runs as a compiled Cython kernel when the extension built,
with a pure-Python fallback selected at import (see `BACKEND`).
"""

from .engine import (
    BACKEND,
    available_backends,
    extract_labeled,
    extract_observations,
    simulate,
)
from .erlang import erlang_a_oracle
from .sampling import sample_iid
from .types import CustomerRecord, Outcome, PerfMeasures, SimConfig

__all__ = [
    "BACKEND",
    "CustomerRecord",
    "Outcome",
    "PerfMeasures",
    "SimConfig",
    "available_backends",
    "erlang_a_oracle",
    "extract_labeled",
    "extract_observations",
    "sample_iid",
    "simulate",
]
