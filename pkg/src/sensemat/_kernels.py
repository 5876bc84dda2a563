"""Hot numeric kernels: the stochastic slot walk and the exact-throughput
enumeration.

Both kernels are compiled with numba when it is available.  Setting the
environment variable ``SENSEMAT_NO_NUMBA=1`` (or running without numba
installed) selects the pure-Python/numpy fallback, which executes the same
source and therefore produces bit-identical results.  ``*_py`` names always
refer to the uncompiled versions so the two paths can be compared directly
(see benchmarks/bench_kernels.py).

The two kernels deliberately do not share their inner walk: the exact
enumeration acts as an independent oracle for the simulator, so agreement
between them under error-free settings is a real cross-check.
"""

from __future__ import annotations

import os

import numpy as np


def _flag_disabled() -> bool:
    return os.environ.get("SENSEMAT_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}


USING_NUMBA = False
if not _flag_disabled():
    try:
        from numba import njit as _njit

        USING_NUMBA = True
    except ImportError:  # pragma: no cover - environment dependent
        USING_NUMBA = False


def _compile(fn):
    if USING_NUMBA:
        return _njit(cache=True)(fn)
    return fn


# searcher states inside a slot
_SEARCHING = 0
_TRANSMITTING = 1
_DEAD = 2


def simulate_slots_py(
    matrices,      # (n_variants, n_su, n_ch) int64
    variant_idx,   # (n_slots,) int64
    p0,            # (n_ch,) float64
    p_fa, p_d, persistence,
    b,             # (n_ch,) float64  per-slot rate by mini-slot
    pu_u,          # (n_slots, n_ch) uniforms for the primary states
    persist_u,     # (n_slots, n_su, n_ch) uniforms for the persistence draws
    sense_u,       # (n_slots, n_su, n_ch) uniforms for the sensing outcomes
    tp_out,        # (n_slots, n_su) float64
    sens_out,      # (n_slots, n_su) int64
    ho_out,        # (n_slots, n_su) int64
    coll_out,      # (n_slots, n_su) int64 0/1
    intf_out,      # (n_slots, n_su) int64 0/1
    chan_out,      # (n_slots, n_su) int64, -1 = never transmitted
    mslot_out,     # (n_slots, n_su) int64, -1 = never transmitted
    events_out,    # (n_slots,) int64 collision events
):
    n_slots = variant_idx.shape[0]
    n_su = matrices.shape[1]
    n_ch = matrices.shape[2]

    state = np.empty(n_su, np.int64)
    txc = np.empty(n_su, np.int64)
    txm = np.empty(n_su, np.int64)
    last_att = np.empty(n_su, np.int64)
    newc = np.empty(n_su, np.int64)
    pu_busy = np.empty(n_ch, np.bool_)
    su_occ = np.empty(n_ch + 1, np.bool_)
    starts = np.empty(n_ch + 1, np.int64)

    for s in range(n_slots):
        sm = matrices[variant_idx[s]]
        for c in range(n_ch):
            pu_busy[c] = pu_u[s, c] < (1.0 - p0[c])
        for i in range(n_su):
            state[i] = _SEARCHING
            txc[i] = -1
            txm[i] = -1
            last_att[i] = -1
        for c in range(n_ch + 1):
            su_occ[c] = False
        events = 0

        for m in range(n_ch):
            # phase 1: everyone still searching senses simultaneously,
            # against the channel occupancy as of the previous mini-slot
            for i in range(n_su):
                newc[i] = -1
                if state[i] != _SEARCHING:
                    continue
                c = sm[i, m]
                if c == 0:
                    continue
                if persist_u[s, i, m] >= persistence:
                    continue
                sens_out[s, i] += 1
                if last_att[i] >= 0:
                    ho_out[s, i] += 1
                last_att[i] = m
                truly_busy = pu_busy[c - 1] or su_occ[c]
                u = sense_u[s, i, m]
                reads_busy = (u < p_d) if truly_busy else (u < p_fa)
                if not reads_busy:
                    newc[i] = c

            # phase 2: resolve simultaneous transmission starts per channel
            for c in range(n_ch + 1):
                starts[c] = 0
            for i in range(n_su):
                if newc[i] > 0:
                    starts[newc[i]] += 1
            for c in range(1, n_ch + 1):
                if starts[c] == 0:
                    continue
                if starts[c] >= 2 or su_occ[c]:
                    events += 1
                    for i in range(n_su):
                        if newc[i] == c:
                            state[i] = _DEAD
                            coll_out[s, i] = 1
                            txc[i] = c
                            txm[i] = m
                        elif state[i] == _TRANSMITTING and txc[i] == c:
                            state[i] = _DEAD
                            coll_out[s, i] = 1
                    su_occ[c] = True
                else:
                    for i in range(n_su):
                        if newc[i] == c:
                            state[i] = _TRANSMITTING
                            txc[i] = c
                            txm[i] = m
                    su_occ[c] = True

        for i in range(n_su):
            if txc[i] >= 1:
                chan_out[s, i] = txc[i]
                mslot_out[s, i] = txm[i]
                if pu_busy[txc[i] - 1]:
                    intf_out[s, i] = 1
                if state[i] == _TRANSMITTING and not pu_busy[txc[i] - 1]:
                    tp_out[s, i] = b[txm[i]]
        events_out[s] = events


def exact_network_throughput_py(sm, p0, b):
    """Expected error-free network throughput by enumerating the 2^n_ch
    joint primary states and walking all users deterministically."""
    n_su = sm.shape[0]
    n_ch = sm.shape[1]
    state = np.empty(n_su, np.int64)
    txm = np.empty(n_su, np.int64)
    txc = np.empty(n_su, np.int64)
    newc = np.empty(n_su, np.int64)
    pu_busy = np.empty(n_ch, np.bool_)
    su_occ = np.empty(n_ch + 1, np.bool_)
    starts = np.empty(n_ch + 1, np.int64)

    total = 0.0
    for pattern in range(1 << n_ch):
        w = 1.0
        for c in range(n_ch):
            if (pattern >> c) & 1:
                pu_busy[c] = True
                w *= 1.0 - p0[c]
            else:
                pu_busy[c] = False
                w *= p0[c]
        if w == 0.0:
            continue

        for i in range(n_su):
            state[i] = _SEARCHING
            txm[i] = -1
            txc[i] = -1
        for c in range(n_ch + 1):
            su_occ[c] = False

        value = 0.0
        for m in range(n_ch):
            for i in range(n_su):
                newc[i] = -1
                if state[i] != _SEARCHING:
                    continue
                c = sm[i, m]
                if c == 0:
                    continue
                if not pu_busy[c - 1] and not su_occ[c]:
                    newc[i] = c
            for c in range(n_ch + 1):
                starts[c] = 0
            for i in range(n_su):
                if newc[i] > 0:
                    starts[newc[i]] += 1
            for c in range(1, n_ch + 1):
                if starts[c] == 0:
                    continue
                if starts[c] >= 2:
                    for i in range(n_su):
                        if newc[i] == c:
                            state[i] = _DEAD
                else:
                    for i in range(n_su):
                        if newc[i] == c:
                            state[i] = _TRANSMITTING
                            txm[i] = m
                            value += b[m]
                su_occ[c] = True

        total += w * value
    return total


simulate_slots = _compile(simulate_slots_py)
exact_network_throughput = _compile(exact_network_throughput_py)
