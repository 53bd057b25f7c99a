"""Pure-Python event loop for the silent-abandonment queue.

Reference implementation of the hot kernel.  The Cython extension
(`_kernel.pyx`) mirrors this logic operation-for-operation, including event
tie-breaking, so the two backends produce bit-identical outputs from the
same pre-drawn randomness.
"""

from __future__ import annotations

import heapq
from collections import deque
from math import log, nan

import numpy as np

# outcome codes
SERVED, KAB, SAB, CENSORED = 0, 1, 2, 3
# event priorities at equal times: abandonment first, then completions, then arrivals
_P_KAB, _P_DONE, _P_ARR = 0, 1, 2

BACKEND_NAME = "python"


def run_queue_loop(
    arrival: np.ndarray,
    patience: np.ndarray,
    indication: np.ndarray,
    svc_uniform: np.ndarray,
    n_slots: int,
    mu_sr: float,
    mu_sab: float,
    sab_instant: bool,
    horizon: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Run the FCFS loop; returns (wait, outcome, service_start, service_dur).

    Entries are nan where undefined (no service, or still in system at the
    horizon).  Customers in system at the horizon keep outcome CENSORED.
    """
    n = len(arrival)
    wait = np.full(n, nan)
    outcome = np.full(n, CENSORED, dtype=np.int64)
    sstart = np.full(n, nan)
    sdur = np.full(n, nan)

    waiting = np.zeros(n, dtype=bool)
    queue: deque[int] = deque()
    heap: list[tuple[float, int, int, int]] = []
    seq = 0
    busy = 0

    def push(t: float, prio: int, cid: int) -> None:
        nonlocal seq
        heapq.heappush(heap, (t, prio, seq, cid))
        seq += 1

    def start_service(cid: int, t: float, w: float) -> None:
        nonlocal busy
        wait[cid] = w
        sstart[cid] = t
        if indication[cid] == 0 and patience[cid] <= w:
            outcome[cid] = SAB
            if sab_instant:
                sdur[cid] = 0.0
                return
            dur = -log(svc_uniform[cid]) / mu_sab
        else:
            outcome[cid] = SERVED
            dur = -log(svc_uniform[cid]) / mu_sr
        sdur[cid] = dur
        busy += 1
        push(t + dur, _P_DONE, cid)

    def assign_from_queue(t: float) -> None:
        while busy < n_slots and queue:
            j = queue.popleft()
            if not waiting[j]:
                continue  # already left as a known abandonment
            waiting[j] = False
            start_service(j, t, t - arrival[j])

    if n > 0:
        push(arrival[0], _P_ARR, 0)

    while heap:
        t, prio, _, cid = heapq.heappop(heap)
        if t > horizon:
            break
        if prio == _P_ARR:
            nxt = cid + 1
            if nxt < n:
                push(arrival[nxt], _P_ARR, nxt)
            if busy < n_slots:
                start_service(cid, t, 0.0)
            else:
                queue.append(cid)
                waiting[cid] = True
                if indication[cid]:
                    push(t + patience[cid], _P_KAB, cid)
        elif prio == _P_KAB:
            if waiting[cid]:
                waiting[cid] = False
                outcome[cid] = KAB
                wait[cid] = patience[cid]
        else:  # completion
            busy -= 1
            assign_from_queue(t)

    return wait, outcome, sstart, sdur
