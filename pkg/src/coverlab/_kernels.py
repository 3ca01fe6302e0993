"""Jitted inner loops. Everything here is deterministic given the uint64 seed.

The in-kernel RNG is splitmix64; direction draws use the high-bits multiply
trick (bias < 2d/2^32, far below any tolerance used by the tests).
"""

from __future__ import annotations

import numpy as np
from numba import int64, njit, types, uint64
from numba.typed import Dict

_GAMMA = uint64(0x9E3779B97F4A7C15)


@njit(uint64(uint64), cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> uint64(27))) * uint64(0x94D049BB133111EB)
    return z ^ (z >> uint64(31))


@njit(cache=True, inline="always")
def _next_u64(state):
    state = state + _GAMMA
    return state, _mix(state)


@njit(cache=True, inline="always")
def _rand_below(state, n):
    state, r = _next_u64(state)
    return state, int64((uint64(r) >> uint64(32)) * uint64(n) >> uint64(32))


@njit(cache=True)
def walk_cover(d, N, start_lab, seed, budget, first_visit):
    """Torus walk from start_lab until everything is visited or budget steps.

    first_visit must be an int64[N^d] array pre-filled with -1; entry x gets the
    first time the walk sits at x (start counts as time 0). Returns
    (cover_time, end_label, steps_done); cover_time is -1 when the budget ran
    out first.
    """
    state = uint64(seed)
    coords = np.empty(d, dtype=np.int64)
    lab = start_lab
    for i in range(d - 1, -1, -1):
        coords[i] = lab % N
        lab //= N
    strides = np.empty(d, dtype=np.int64)
    s = int64(1)
    for i in range(d - 1, -1, -1):
        strides[i] = s
        s *= N
    lab = start_lab
    unvisited = int64(0)
    for i in range(first_visit.shape[0]):
        if first_visit[i] < 0:
            unvisited += 1
    if first_visit[lab] < 0:
        first_visit[lab] = 0
        unvisited -= 1
    t = int64(0)
    while unvisited > 0 and t < budget:
        state, code = _rand_below(state, 2 * d)
        axis = code >> 1
        sign = 1 - 2 * (code & 1)
        c = coords[axis]
        cn = (c + sign) % N
        coords[axis] = cn
        lab += (cn - c) * strides[axis]
        t += 1
        if first_visit[lab] < 0:
            first_visit[lab] = t
            unvisited -= 1
    cover_time = t if unvisited == 0 else int64(-1)
    return cover_time, lab, t


@njit(cache=True)
def walk_record(d, N, start_lab, seed, n_steps, out_labels):
    """Torus walk writing the full label path; out_labels has length n_steps+1."""
    state = uint64(seed)
    coords = np.empty(d, dtype=np.int64)
    lab = start_lab
    for i in range(d - 1, -1, -1):
        coords[i] = lab % N
        lab //= N
    strides = np.empty(d, dtype=np.int64)
    s = int64(1)
    for i in range(d - 1, -1, -1):
        strides[i] = s
        s *= N
    lab = start_lab
    out_labels[0] = lab
    for t in range(n_steps):
        state, code = _rand_below(state, 2 * d)
        axis = code >> 1
        sign = 1 - 2 * (code & 1)
        c = coords[axis]
        cn = (c + sign) % N
        coords[axis] = cn
        lab += (cn - c) * strides[axis]
        out_labels[t + 1] = lab
    return lab


@njit(cache=True)
def steps_to_labels(d, N, start_lab, codes, out_labels):
    """Replay direction codes (2*axis for +e, 2*axis+1 for -e) into labels."""
    coords = np.empty(d, dtype=np.int64)
    lab = start_lab
    for i in range(d - 1, -1, -1):
        coords[i] = lab % N
        lab //= N
    strides = np.empty(d, dtype=np.int64)
    s = int64(1)
    for i in range(d - 1, -1, -1):
        strides[i] = s
        s *= N
    lab = start_lab
    out_labels[0] = lab
    for t in range(codes.shape[0]):
        code = codes[t]
        axis = code >> 1
        sign = 1 - 2 * (code & 1)
        c = coords[axis]
        cn = (c + sign) % N
        coords[axis] = cn
        lab += (cn - c) * strides[axis]
        out_labels[t + 1] = lab


@njit(cache=True)
def zd_escape(d, seed, r2_exit, max_steps):
    """Z^d walk from the origin until |x|_2^2 >= r2_exit.

    Returns (visits_to_origin, exit_norm2, steps); visits counts time 0.
    steps == max_steps flags a budget overflow (exit_norm2 is then the
    current norm, not an exit norm).
    """
    state = uint64(seed)
    coords = np.zeros(d, dtype=np.int64)
    visits = int64(1)
    norm2 = int64(0)
    t = int64(0)
    while norm2 < r2_exit and t < max_steps:
        state, code = _rand_below(state, 2 * d)
        axis = code >> 1
        sign = 1 - 2 * (code & 1)
        c = coords[axis]
        norm2 += 2 * sign * c + 1
        coords[axis] = c + sign
        t += 1
        if norm2 == 0:
            visits += 1
    return visits, norm2, t


@njit(cache=True)
def zd_escape_batch(d, seed, n_walks, r2_exit, max_steps, cd, tail_exp):
    """Batch of zd_escape walks folded into the method-B estimator.

    Per walk accumulates visits_to_origin + cd * exit_norm2^tail_exp.
    Returns (sum, sum_of_squares, overflow_count).
    """
    total = 0.0
    total_sq = 0.0
    overflow = int64(0)
    for i in range(n_walks):
        # mix the per-walk seed so walk streams do not overlap
        wseed = _mix(uint64(seed) + _GAMMA * uint64(i + 1))
        visits, norm2, steps = zd_escape(d, wseed, r2_exit, max_steps)
        if steps >= max_steps:
            overflow += 1
            continue
        est = visits + cd * float(norm2) ** tail_exp
        total += est
        total_sq += est * est
    return total, total_sq, overflow


@njit(cache=True)
def zd_max_local_time(d, seed, n_steps):
    """Max number of visits to a single site by an n-step Z^d walk."""
    state = uint64(seed)
    coords = np.zeros(d, dtype=np.int64)
    counts = Dict.empty(key_type=types.int64, value_type=types.int64)
    # pack coordinates into one int64 key; 21 bits per axis is ample for any
    # walk short enough to simulate
    key = int64(0)
    shift = int64(0)
    for i in range(d):
        key += (coords[i] + (1 << 20)) << shift
        shift += 21
    counts[key] = 1
    best = int64(1)
    for _ in range(n_steps):
        state, code = _rand_below(state, 2 * d)
        axis = code >> 1
        sign = 1 - 2 * (code & 1)
        coords[axis] += sign
        key = int64(0)
        shift = int64(0)
        for i in range(d):
            key += (coords[i] + (1 << 20)) << shift
            shift += 21
        if key in counts:
            c = counts[key] + 1
        else:
            c = int64(1)
        counts[key] = c
        if c > best:
            best = c
    return best


@njit(cache=True)
def interlace_leg(coords, trunc_lo, trunc_hi, box_lo, box_dims, kmask, visited, state_io, max_steps):
    """One Z^d walk leg for the interlacement sampler.

    Walks from coords (modified in place) until it leaves the truncation box
    [trunc_lo, trunc_hi], marking visited[i] for window cells it sits on.
    kmask/visited are flat row-major arrays over the window bounding box
    (box_lo, box_dims). state_io is a 1-element uint64 RNG state, updated in
    place so a trajectory can be continued across calls with a widened box.
    Returns steps taken, or -1 on budget overflow.
    """
    d = coords.shape[0]
    state = state_io[0]

    inside_box = True
    for i in range(d):
        if coords[i] < box_lo[i] or coords[i] >= box_lo[i] + box_dims[i]:
            inside_box = False
            break
    if inside_box:
        idx = int64(0)
        for i in range(d):
            idx = idx * box_dims[i] + (coords[i] - box_lo[i])
        if kmask[idx]:
            visited[idx] = True

    t = int64(0)
    while t < max_steps:
        state, code = _rand_below(state, 2 * d)
        axis = code >> 1
        sign = 1 - 2 * (code & 1)
        coords[axis] += sign
        t += 1
        c = coords[axis]
        if c < trunc_lo[axis] or c > trunc_hi[axis]:
            state_io[0] = state
            return t
        inside_box = True
        for i in range(d):
            if coords[i] < box_lo[i] or coords[i] >= box_lo[i] + box_dims[i]:
                inside_box = False
                break
        if inside_box:
            idx = int64(0)
            for i in range(d):
                idx = idx * box_dims[i] + (coords[i] - box_lo[i])
            if kmask[idx]:
                visited[idx] = True
    state_io[0] = state
    return int64(-1)
