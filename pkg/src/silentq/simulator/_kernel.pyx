# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled event loop for the silent-abandonment queue.

Mirrors `_kernel_py.run_queue_loop` operation-for-operation (same event
tie-breaking, same floating-point expression order) so both backends return
bit-identical outputs from the same pre-drawn randomness.
"""

from libc.math cimport log, NAN
from libc.stdlib cimport malloc, free

import numpy as np
cimport numpy as cnp

cnp.import_array()

# outcome codes
cdef int SERVED = 0
cdef int KAB = 1
cdef int SAB = 2
cdef int CENSORED = 3

# event priorities at equal times
cdef int P_KAB = 0
cdef int P_DONE = 1
cdef int P_ARR = 2

BACKEND_NAME = "cython"


cdef struct Heap:
    double* t
    long* prio
    long* seq
    long* cid
    long size
    long cap


cdef inline bint _less(Heap* h, long i, long j) nogil:
    if h.t[i] != h.t[j]:
        return h.t[i] < h.t[j]
    if h.prio[i] != h.prio[j]:
        return h.prio[i] < h.prio[j]
    return h.seq[i] < h.seq[j]


cdef inline void _swap(Heap* h, long i, long j) nogil:
    cdef double td = h.t[i]
    cdef long tp = h.prio[i], ts = h.seq[i], tc = h.cid[i]
    h.t[i] = h.t[j]; h.prio[i] = h.prio[j]; h.seq[i] = h.seq[j]; h.cid[i] = h.cid[j]
    h.t[j] = td; h.prio[j] = tp; h.seq[j] = ts; h.cid[j] = tc


cdef inline void _heap_push(Heap* h, double t, long prio, long seq, long cid) nogil:
    cdef long i = h.size, parent
    h.t[i] = t; h.prio[i] = prio; h.seq[i] = seq; h.cid[i] = cid
    h.size += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _less(h, i, parent):
            _swap(h, i, parent)
            i = parent
        else:
            break


cdef inline void _heap_pop(Heap* h) nogil:
    # caller reads the root before popping
    cdef long i = 0, left, right, smallest
    h.size -= 1
    if h.size == 0:
        return
    h.t[0] = h.t[h.size]; h.prio[0] = h.prio[h.size]
    h.seq[0] = h.seq[h.size]; h.cid[0] = h.cid[h.size]
    while True:
        left = 2 * i + 1
        right = left + 1
        smallest = i
        if left < h.size and _less(h, left, smallest):
            smallest = left
        if right < h.size and _less(h, right, smallest):
            smallest = right
        if smallest == i:
            break
        _swap(h, i, smallest)
        i = smallest


def run_queue_loop(
    cnp.ndarray[cnp.float64_t, ndim=1] arrival,
    cnp.ndarray[cnp.float64_t, ndim=1] patience,
    cnp.ndarray[cnp.int64_t, ndim=1] indication,
    cnp.ndarray[cnp.float64_t, ndim=1] svc_uniform,
    long n_slots,
    double mu_sr,
    double mu_sab,
    bint sab_instant,
    double horizon,
):
    """Run the FCFS loop; returns (wait, outcome, service_start, service_dur)."""
    cdef long n = arrival.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wait = np.full(n, np.nan)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] outcome = np.full(n, CENSORED, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sstart = np.full(n, np.nan)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sdur = np.full(n, np.nan)

    cdef double[:] wait_v = wait
    cdef long[:] outcome_v = outcome
    cdef double[:] sstart_v = sstart
    cdef double[:] sdur_v = sdur
    cdef double[:] arr_v = arrival
    cdef double[:] pat_v = patience
    cdef long[:] ind_v = indication
    cdef double[:] svc_v = svc_uniform

    if n == 0:
        return wait, outcome, sstart, sdur

    cdef Heap h
    cdef long cap = n + n + n_slots + 8
    h.t = <double*> malloc(cap * sizeof(double))
    h.prio = <long*> malloc(cap * sizeof(long))
    h.seq = <long*> malloc(cap * sizeof(long))
    h.cid = <long*> malloc(cap * sizeof(long))
    h.size = 0
    h.cap = cap

    # FIFO queue (ring buffer) of waiting customers, lazy deletion for Kab
    cdef long* q = <long*> malloc(n * sizeof(long))
    cdef char* waiting = <char*> malloc(n * sizeof(char))
    cdef long q_head = 0, q_tail = 0, q_len = 0

    if h.t == NULL or h.prio == NULL or h.seq == NULL or h.cid == NULL or q == NULL or waiting == NULL:
        raise MemoryError()

    cdef long i
    for i in range(n):
        waiting[i] = 0

    cdef long seq = 0, busy = 0
    cdef double t, w, dur
    cdef long prio, cid, nxt, j

    _heap_push(&h, arr_v[0], P_ARR, seq, 0)
    seq += 1

    try:
        while h.size > 0:
            t = h.t[0]; prio = h.prio[0]; cid = h.cid[0]
            _heap_pop(&h)
            if t > horizon:
                break
            if prio == P_ARR:
                nxt = cid + 1
                if nxt < n:
                    _heap_push(&h, arr_v[nxt], P_ARR, seq, nxt)
                    seq += 1
                if busy < n_slots:
                    # start service with zero wait
                    wait_v[cid] = 0.0
                    sstart_v[cid] = t
                    if ind_v[cid] == 0 and pat_v[cid] <= 0.0:
                        outcome_v[cid] = SAB
                        if sab_instant:
                            sdur_v[cid] = 0.0
                            continue
                        dur = -log(svc_v[cid]) / mu_sab
                    else:
                        outcome_v[cid] = SERVED
                        dur = -log(svc_v[cid]) / mu_sr
                    sdur_v[cid] = dur
                    busy += 1
                    _heap_push(&h, t + dur, P_DONE, seq, cid)
                    seq += 1
                else:
                    q[q_tail] = cid
                    q_tail = (q_tail + 1) % n
                    q_len += 1
                    waiting[cid] = 1
                    if ind_v[cid] != 0:
                        _heap_push(&h, t + pat_v[cid], P_KAB, seq, cid)
                        seq += 1
            elif prio == P_KAB:
                if waiting[cid]:
                    waiting[cid] = 0
                    outcome_v[cid] = KAB
                    wait_v[cid] = pat_v[cid]
            else:
                # completion frees a slot; assign FCFS from the queue
                busy -= 1
                while busy < n_slots and q_len > 0:
                    j = q[q_head]
                    q_head = (q_head + 1) % n
                    q_len -= 1
                    if not waiting[j]:
                        continue
                    waiting[j] = 0
                    w = t - arr_v[j]
                    wait_v[j] = w
                    sstart_v[j] = t
                    if ind_v[j] == 0 and pat_v[j] <= w:
                        outcome_v[j] = SAB
                        if sab_instant:
                            sdur_v[j] = 0.0
                            continue
                        dur = -log(svc_v[j]) / mu_sab
                    else:
                        outcome_v[j] = SERVED
                        dur = -log(svc_v[j]) / mu_sr
                    sdur_v[j] = dur
                    busy += 1
                    _heap_push(&h, t + dur, P_DONE, seq, j)
                    seq += 1
    finally:
        free(h.t); free(h.prio); free(h.seq); free(h.cid)
        free(q); free(waiting)

    return wait, outcome, sstart, sdur
