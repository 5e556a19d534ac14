"""Compiled batch engines for replica simulation.

Two numba kernels back the Monte Carlo layer:

* :func:`simulate_batch` - the raw per-step process on an arbitrary CSR
  graph, all four update rules.  Replica i consumes the splitmix64 stream
  keyed by seed + i with exactly two draws per step (plus one or two for
  placement), with the same index-set bookkeeping as
  :func:`evograph.dynamics.run_to_absorption`; the two implementations
  produce bit-identical trajectories and event hashes.

* :func:`superstar_batch` - an exact event-driven condensation of the Bd
  process on superstars.  Per raw step, only type-changing replacements
  alter the state; their total probability q is computed from the
  branch-structured state, the number of quiet steps is drawn
  geometrically, and one change event is selected.  This makes runs on
  large superstars (where q ~ 1/N^2) tractable while remaining
  distributionally exact, including the step counter against the cap.

Replicas are independent (own stream, own state), so the prange loops are
deterministic regardless of scheduling.
"""

from __future__ import annotations

import math
import os

# The bundled TBB is too old on some hosts and numba warns loudly while
# probing it; prefer omp unless the user chose a layer explicitly.
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

import numpy as np
from numba import config as _numba_config
from numba import njit, prange, set_num_threads

_env_threads = os.environ.get("EVOGRAPH_THREADS")
if _env_threads:
    set_num_threads(max(1, min(int(_env_threads), _numba_config.NUMBA_NUM_THREADS)))

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1DD3E7B9)
_MIX2 = U64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0

RES_EXTINCTION = 0
RES_FIXATION = 1
RES_STEP_CAP = 2


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(inline="always")
def _draw(state):
    s = state + _GOLDEN
    return s, (_mix(s) >> U64(11)) * _INV_2_53


@njit(cache=True, parallel=True)
def simulate_batch(
    out_indptr,
    out_idx,
    out_w,
    out_cum,
    in_indptr,
    in_src,
    in_w,
    in_cum,
    in_total,
    n,
    r,
    rule,
    placement,
    reservoir_ids,
    seed,
    n_trials,
    max_steps,
):
    results = np.empty(n_trials, dtype=np.int8)
    steps_out = np.empty(n_trials, dtype=np.int64)
    init_out = np.empty(n_trials, dtype=np.int32)
    hash_out = np.empty(n_trials, dtype=np.uint64)

    for trial in prange(n_trials):
        state = U64(seed + trial)

        # placement
        if placement == 0:  # uniform_node
            state, u0 = _draw(state)
            init_node = int(u0 * n)
            if init_node >= n:
                init_node = n - 1
        elif placement == 1:  # reservoir_only
            state, u0 = _draw(state)
            k = int(u0 * reservoir_ids.shape[0])
            if k >= reservoir_ids.shape[0]:
                k = reservoir_ids.shape[0] - 1
            init_node = int(reservoir_ids[k])
        else:  # fecundity_weighted: one all-resident reproduction event
            state, u0 = _draw(state)
            j = int(u0 * n)
            if j >= n:
                j = n - 1
            state, t0 = _draw(state)
            lo = out_indptr[j]
            hi = out_indptr[j + 1] - 1
            while lo < hi:
                mid = (lo + hi) // 2
                if out_cum[mid] <= t0:
                    lo = mid + 1
                else:
                    hi = mid
            init_node = int(out_idx[lo])

        is_mut = np.zeros(n, dtype=np.uint8)
        mutants = np.empty(n, dtype=np.int32)
        residents = np.empty(n, dtype=np.int32)
        pos = np.empty(n, dtype=np.int32)
        is_mut[init_node] = 1
        mutants[0] = init_node
        nm = 1
        nr = 0
        for v in range(n):
            if v == init_node:
                pos[v] = 0
            else:
                residents[nr] = v
                pos[v] = nr
                nr += 1

        m = 1
        steps = 0
        h = U64(0)
        u = 0
        v = 0
        while 0 < m < n and steps < max_steps:
            F = n + m * (r - 1.0)
            if rule == 0:  # Bd
                state, u1 = _draw(state)
                x = u1 * F
                if x < m * r:
                    k = int(x / r)
                    u = mutants[k if k < m else m - 1]
                else:
                    k = int(x - m * r)
                    u = residents[k if k < n - m else n - m - 1]
                state, t = _draw(state)
                lo = out_indptr[u]
                hi = out_indptr[u + 1] - 1
                while lo < hi:
                    mid = (lo + hi) // 2
                    if out_cum[mid] <= t:
                        lo = mid + 1
                    else:
                        hi = mid
                v = int(out_idx[lo])
            elif rule == 1:  # bD
                state, u1 = _draw(state)
                k = int(u1 * n)
                u = k if k < n else n - 1
                s0 = out_indptr[u]
                e0 = out_indptr[u + 1]
                total = 0.0
                for i in range(s0, e0):
                    if is_mut[out_idx[i]]:
                        total += out_w[i] / r
                    else:
                        total += out_w[i]
                state, u2 = _draw(state)
                t = u2 * total
                acc = 0.0
                v = int(out_idx[e0 - 1])
                for i in range(s0, e0):
                    if is_mut[out_idx[i]]:
                        acc += out_w[i] / r
                    else:
                        acc += out_w[i]
                    if acc > t:
                        v = int(out_idx[i])
                        break
            elif rule == 2:  # dB
                state, u1 = _draw(state)
                k = int(u1 * n)
                v = k if k < n else n - 1
                s0 = in_indptr[v]
                e0 = in_indptr[v + 1]
                total = 0.0
                for i in range(s0, e0):
                    if is_mut[in_src[i]]:
                        total += in_w[i] * r
                    else:
                        total += in_w[i]
                state, u2 = _draw(state)
                t = u2 * total
                acc = 0.0
                u = int(in_src[e0 - 1])
                for i in range(s0, e0):
                    if is_mut[in_src[i]]:
                        acc += in_w[i] * r
                    else:
                        acc += in_w[i]
                    if acc > t:
                        u = int(in_src[i])
                        break
            else:  # Db
                state, u1 = _draw(state)
                x = u1 * (m / r + (n - m))
                if x < m / r:
                    k = int(x * r)
                    v = mutants[k if k < m else m - 1]
                else:
                    k = int(x - m / r)
                    v = residents[k if k < n - m else n - m - 1]
                state, u2 = _draw(state)
                t = u2 * in_total[v]
                lo = in_indptr[v]
                hi = in_indptr[v + 1] - 1
                while lo < hi:
                    mid = (lo + hi) // 2
                    if in_cum[mid] <= t:
                        lo = mid + 1
                    else:
                        hi = mid
                u = int(in_src[lo])

            if is_mut[v] != is_mut[u]:
                if is_mut[u]:
                    p = pos[v]
                    nr -= 1
                    last = residents[nr]
                    residents[p] = last
                    pos[last] = p
                    mutants[nm] = v
                    pos[v] = nm
                    nm += 1
                    m += 1
                    is_mut[v] = 1
                else:
                    p = pos[v]
                    nm -= 1
                    last = mutants[nm]
                    mutants[p] = last
                    pos[last] = p
                    residents[nr] = v
                    pos[v] = nr
                    nr += 1
                    m -= 1
                    is_mut[v] = 0
            h = _mix(h ^ U64(u * n + v + 1))
            steps += 1

        if m == n:
            results[trial] = RES_FIXATION
        elif m == 0:
            results[trial] = RES_EXTINCTION
        else:
            results[trial] = RES_STEP_CAP
        steps_out[trial] = steps
        init_out[trial] = init_node
        hash_out[trial] = h

    return results, steps_out, init_out, hash_out


MODE_ABSORPTION = 0
MODE_ONE_TO_TWO = 1


@njit(cache=True, parallel=True)
def superstar_batch(B, L, H, r, placement, mode, seed, n_trials, max_steps):
    """Event-driven Bd process on a superstar (exact condensation).

    mode 0: run to fixation/extinction.  mode 1: stop when the reservoir
    mutant count first hits 0 (failure) or 2 (success).
    """
    n = B * (L + H) + 1
    BL = B * L
    results = np.empty(n_trials, dtype=np.int8)
    steps_out = np.empty(n_trials, dtype=np.int64)
    init_out = np.empty(n_trials, dtype=np.int32)

    ev_cap = B * (H + 1) + 4
    for trial in prange(n_trials):
        state = U64(seed + trial)

        m_res = np.zeros(B, dtype=np.int64)
        stem = np.zeros(B * H, dtype=np.uint8)
        bm = np.zeros(B, dtype=np.int64)  # branch mutants: reservoir + stem
        act = np.empty(B, dtype=np.int32)
        act_pos = np.full(B, -1, dtype=np.int32)
        n_act = 0
        root = 0
        sum_res = 0
        end_mut = 0  # branches whose last stem node is a mutant
        m = 0

        # --- placement ---
        if placement == 0:  # uniform over all nodes
            state, u0 = _draw(state)
            k = int(u0 * n)
            if k >= n:
                k = n - 1
            init_node = k
        elif placement == 1:  # uniform over reservoirs
            state, u0 = _draw(state)
            k = int(u0 * BL)
            if k >= BL:
                k = BL - 1
            init_node = 1 + k
        else:  # fecundity: one all-resident Bd reproduction event
            state, u0 = _draw(state)
            j = int(u0 * n)
            if j >= n:
                j = n - 1
            state, u2 = _draw(state)
            if j == 0:  # root reproduces into a uniform reservoir
                t = int(u2 * BL)
                if t >= BL:
                    t = BL - 1
                init_node = 1 + t
            elif j <= BL:  # reservoir feeds its stem node 1
                b = (j - 1) // L
                init_node = 1 + BL + b * H
            else:  # stem node feeds downstream (or the root at the end)
                idx = j - 1 - BL
                b = idx // H
                i = idx % H
                init_node = 0 if i == H - 1 else 1 + BL + b * H + i + 1

        if init_node == 0:
            root = 1
        elif init_node <= BL:
            b = (init_node - 1) // L
            m_res[b] = 1
            sum_res = 1
            bm[b] = 1
            act[0] = b
            act_pos[b] = 0
            n_act = 1
        else:
            idx = init_node - 1 - BL
            b = idx // H
            i = idx % H
            stem[b * H + i] = 1
            bm[b] = 1
            act[0] = b
            act_pos[b] = 0
            n_act = 1
            if i == H - 1:
                end_mut = 1
        m = 1

        ev_w = np.empty(ev_cap, dtype=np.float64)
        ev_kind = np.empty(ev_cap, dtype=np.int8)
        ev_branch = np.empty(ev_cap, dtype=np.int32)
        ev_posn = np.empty(ev_cap, dtype=np.int32)

        steps = 0
        res = RES_STEP_CAP
        done = False

        # immediate stop states (placement outside the probe's support)
        if mode == MODE_ONE_TO_TWO:
            if sum_res == 0:
                res = RES_EXTINCTION
                done = True
            elif sum_res >= 2:
                res = RES_FIXATION
                done = True

        while not done:
            # --- enumerate type-changing events ---
            ne = 0
            W = 0.0
            for a in range(n_act):
                b = act[a]
                base = b * H
                if stem[base] == 0:
                    if m_res[b] > 0:
                        w = r * m_res[b]
                        ev_w[ne] = w
                        ev_kind[ne] = 0
                        ev_branch[ne] = b
                        ev_posn[ne] = 0
                        W += w
                        ne += 1
                else:
                    w = float(L - m_res[b])
                    if w > 0.0:
                        ev_w[ne] = w
                        ev_kind[ne] = 1
                        ev_branch[ne] = b
                        ev_posn[ne] = 0
                        W += w
                        ne += 1
                for i in range(1, H):
                    up = stem[base + i - 1]
                    cur = stem[base + i]
                    if up == 1 and cur == 0:
                        ev_w[ne] = r
                        ev_kind[ne] = 0
                        ev_branch[ne] = b
                        ev_posn[ne] = i
                        W += r
                        ne += 1
                    elif up == 0 and cur == 1:
                        ev_w[ne] = 1.0
                        ev_kind[ne] = 1
                        ev_branch[ne] = b
                        ev_posn[ne] = i
                        W += 1.0
                        ne += 1
            if root == 0:
                if end_mut > 0:
                    w = r * end_mut
                    ev_w[ne] = w
                    ev_kind[ne] = 2
                    ev_branch[ne] = -1
                    ev_posn[ne] = -1
                    W += w
                    ne += 1
                if sum_res > 0:
                    w = sum_res / float(BL)
                    ev_w[ne] = w
                    ev_kind[ne] = 5
                    ev_branch[ne] = -1
                    ev_posn[ne] = -1
                    W += w
                    ne += 1
            else:
                if end_mut < B:
                    w = float(B - end_mut)
                    ev_w[ne] = w
                    ev_kind[ne] = 3
                    ev_branch[ne] = -1
                    ev_posn[ne] = -1
                    W += w
                    ne += 1
                if sum_res < BL:
                    w = r * (BL - sum_res) / float(BL)
                    ev_w[ne] = w
                    ev_kind[ne] = 4
                    ev_branch[ne] = -1
                    ev_posn[ne] = -1
                    W += w
                    ne += 1

            F = n + m * (r - 1.0)
            q = W / F
            state, ug = _draw(state)
            if q >= 1.0:
                dt = 1
            elif ug <= 0.0:
                dt = max_steps  # astronomically unlikely; forces the cap
            else:
                dt = 1 + int(math.log(ug) / math.log1p(-q))
            if steps + dt > max_steps:
                steps = max_steps
                res = RES_STEP_CAP
                break
            steps += dt

            # --- select the change event ---
            state, us = _draw(state)
            t = us * W
            acc = 0.0
            sel = ne - 1
            for i in range(ne):
                acc += ev_w[i]
                if acc > t:
                    sel = i
                    break
            kind = ev_kind[sel]

            if kind == 0:  # stem gain
                b = ev_branch[sel]
                i = ev_posn[sel]
                stem[b * H + i] = 1
                bm[b] += 1
                m += 1
                if i == H - 1:
                    end_mut += 1
            elif kind == 1:  # stem loss
                b = ev_branch[sel]
                i = ev_posn[sel]
                stem[b * H + i] = 0
                bm[b] -= 1
                m -= 1
                if i == H - 1:
                    end_mut -= 1
                if bm[b] == 0:
                    p = act_pos[b]
                    n_act -= 1
                    last = act[n_act]
                    act[p] = last
                    act_pos[last] = p
                    act_pos[b] = -1
            elif kind == 2:  # root gain
                root = 1
                m += 1
            elif kind == 3:  # root loss
                root = 0
                m -= 1
            elif kind == 4:  # reservoir gain: branch by resident count
                state, ub = _draw(state)
                tb = ub * (BL - sum_res)
                accb = 0.0
                bsel = B - 1
                for b in range(B):
                    accb += L - m_res[b]
                    if accb > tb:
                        bsel = b
                        break
                m_res[bsel] += 1
                sum_res += 1
                bm[bsel] += 1
                m += 1
                if act_pos[bsel] < 0:
                    act[n_act] = bsel
                    act_pos[bsel] = n_act
                    n_act += 1
            else:  # kind == 5, reservoir loss: branch by mutant count
                state, ub = _draw(state)
                tb = ub * sum_res
                accb = 0.0
                bsel = act[n_act - 1]
                for a in range(n_act):
                    b = act[a]
                    accb += m_res[b]
                    if accb > tb:
                        bsel = b
                        break
                m_res[bsel] -= 1
                sum_res -= 1
                bm[bsel] -= 1
                m -= 1
                if bm[bsel] == 0:
                    p = act_pos[bsel]
                    n_act -= 1
                    last = act[n_act]
                    act[p] = last
                    act_pos[last] = p
                    act_pos[bsel] = -1

            if mode == MODE_ONE_TO_TWO:
                if sum_res == 0:
                    res = RES_EXTINCTION
                    done = True
                elif sum_res >= 2:
                    res = RES_FIXATION
                    done = True
            else:
                if m == 0:
                    res = RES_EXTINCTION
                    done = True
                elif m == n:
                    res = RES_FIXATION
                    done = True

        results[trial] = res
        steps_out[trial] = steps
        init_out[trial] = init_node
    return results, steps_out, init_out
