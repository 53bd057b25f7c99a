"""Simulation driver: randomness, backend selection, and measure extraction.

The event loop itself lives in a compiled Cython kernel when available, with
a pure-Python fallback selected at import time.  All randomness is pre-drawn
here with numpy so both backends replay the exact same sample path.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from ..domain import CompleteClass, Observation, mask as mask_records
from ..errors import ValidationError
from . import _kernel_py
from .types import CustomerRecord, Outcome, PerfMeasures, SimConfig

try:
    from . import _kernel  # compiled extension

    _DEFAULT_BACKEND = _kernel
except ImportError:  # pragma: no cover - depends on build environment
    _kernel = None
    _DEFAULT_BACKEND = _kernel_py

BACKEND = _DEFAULT_BACKEND.BACKEND_NAME

_CHUNK = 1024


def available_backends() -> dict[str, object]:
    backends: dict[str, object] = {"python": _kernel_py}
    if _kernel is not None:
        backends["cython"] = _kernel
    return backends


def draw_inputs(config: SimConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Pre-draw arrivals, patience, indication flags and service uniforms."""
    rng = np.random.default_rng(config.seed)
    chunks = []
    total = 0.0
    while total <= config.horizon:
        chunk = rng.exponential(scale=1.0 / config.lam, size=_CHUNK)
        chunks.append(chunk)
        total += float(np.sum(chunk))
    arrival = np.cumsum(np.concatenate(chunks))
    arrival = arrival[arrival <= config.horizon]
    n = len(arrival)
    patience = rng.exponential(scale=1.0 / config.theta, size=n)
    # exponential draws of exactly 0 are astronomically rare but invalid downstream
    patience[patience == 0.0] = np.finfo(float).tiny
    indication = (rng.random(n) < config.q).astype(np.int64)
    svc_uniform = 1.0 - rng.random(n)  # in (0, 1], keeps log() finite
    return arrival, patience, indication, svc_uniform


def simulate(
    config: SimConfig, backend: Optional[str] = None
) -> tuple[list[CustomerRecord], PerfMeasures]:
    """Simulate the queue with silent abandonment.

    Returns per-customer records (in arrival order) and aggregate measures
    computed over customers arriving after the warmup, excluding those still
    in the system at the horizon.
    """
    if backend is None:
        kernel = _DEFAULT_BACKEND
    else:
        try:
            kernel = available_backends()[backend]
        except KeyError:
            raise ValidationError(f"unknown simulation backend {backend!r}") from None

    arrival, patience, indication, svc_uniform = draw_inputs(config)
    wait, outcome, sstart, sdur = kernel.run_queue_loop(
        arrival,
        patience,
        indication,
        svc_uniform,
        config.n_slots,
        config.mu_sr,
        0.0 if config.sab_instantaneous else config.mu_sab,
        config.sab_instantaneous,
        config.horizon,
    )

    # customers whose service outlives the horizon are still in the system
    in_service_past_end = np.isfinite(sstart) & (sstart + sdur > config.horizon)
    outcome = np.where(in_service_past_end, _kernel_py.CENSORED, outcome)

    records = [
        CustomerRecord(
            arrival_time=float(arrival[i]),
            patience_draw=float(patience[i]),
            indication_draw=int(indication[i]),
            wait=float(wait[i]),
            outcome=Outcome(int(outcome[i])),
            service_start=float(sstart[i]) if math.isfinite(sstart[i]) else None,
            service_duration=float(sdur[i]) if math.isfinite(sdur[i]) else None,
        )
        for i in range(len(arrival))
    ]
    measures = _compute_measures(config, arrival, patience, wait, outcome, sstart)
    return records, measures


def _compute_measures(
    config: SimConfig,
    arrival: np.ndarray,
    patience: np.ndarray,
    wait: np.ndarray,
    outcome: np.ndarray,
    sstart: np.ndarray,
) -> PerfMeasures:
    counted = (outcome != _kernel_py.CENSORED) & (arrival >= config.warmup)
    if np.any(counted):
        w = wait[counted]
        p_wait = float(np.mean(w > 0))
        p_ab = float(np.mean(np.isin(outcome[counted], (_kernel_py.KAB, _kernel_py.SAB))))
        e_wait = float(np.mean(w))
        served = counted & (outcome == _kernel_py.SERVED)
        e_wait_served = float(np.mean(wait[served])) if np.any(served) else float("nan")
    else:
        p_wait = p_ab = e_wait = e_wait_served = float("nan")

    # time-average queue lengths over [warmup, horizon]; every customer
    # occupies the observed queue from arrival until assignment or departure
    queue_exit = np.where(
        outcome == _kernel_py.CENSORED,
        np.where(np.isfinite(sstart), sstart, config.horizon),
        arrival + wait,
    )
    window = config.horizon - config.warmup
    start = np.maximum(arrival, config.warmup)
    overlap = np.clip(np.minimum(queue_exit, config.horizon) - start, 0.0, None)
    e_queue = float(np.sum(overlap)) / window

    true_exit = np.minimum(queue_exit, arrival + patience)
    overlap_true = np.clip(np.minimum(true_exit, config.horizon) - start, 0.0, None)
    e_queue_true = float(np.sum(overlap_true)) / window

    return PerfMeasures(
        p_wait=p_wait,
        p_ab=p_ab,
        e_queue=e_queue,
        e_wait=e_wait,
        e_wait_served=e_wait_served,
        e_queue_true=e_queue_true,
    )


def extract_labeled(
    records: Sequence[CustomerRecord],
) -> list[tuple[Observation, CompleteClass]]:
    """Complete-data observations from simulator records.

    Served customers with a zero wait carry no patience information and would
    violate the positive-duration contract, so they are dropped.
    """
    labeled: list[tuple[Observation, CompleteClass]] = []
    for rec in records:
        if rec.outcome is Outcome.CENSORED_AT_END:
            raise ValidationError("records must exclude customers censored at the horizon")
        if rec.outcome is Outcome.SERVED:
            if rec.wait <= 0.0:
                continue
            labeled.append(
                (Observation(u=rec.wait, y=0, delta=0), CompleteClass.C1_SERVICE)
            )
        elif rec.outcome is Outcome.KAB:
            labeled.append(
                (
                    Observation(u=rec.patience_draw, y=1, delta=1),
                    CompleteClass.C2_KNOWN_ABANDONMENT,
                )
            )
        else:
            labeled.append(
                (Observation(u=rec.wait, y=0, delta=1), CompleteClass.C3_SILENT_ABANDONMENT)
            )
    return labeled


def extract_observations(
    records: Sequence[CustomerRecord],
    mode: str = "complete",
    p_ss: float = 0.15,
    seed: int = 0,
) -> list[Observation]:
    """Observations from simulator records, complete or masked.

    In "masked" mode the complete labels are degraded exactly as the masking
    rule specifies: all silent abandonments and a p_ss fraction of served
    customers lose their delta.
    """
    labeled = extract_labeled(records)
    if mode == "complete":
        return [obs for obs, _ in labeled]
    if mode == "masked":
        return mask_records(labeled, p_ss=p_ss, seed=seed)
    raise ValidationError(f"mode must be 'complete' or 'masked', got {mode!r}")
