"""Numba kernels for the simulation and learning hot paths.

Everything here is called thousands of times per training run; keep the
Python-facing wrappers in the sibling modules and the loops in here.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def layer_forward(pre_spikes, weights, v_init, pending, v_rest, v_reset,
                  v_thresh, dt, tau, cap):
    """Propagate one layer boundary for a full presentation.

    pre_spikes: (T, n_pre) uint8 spike raster of the presynaptic layer.
    weights:    (n_pre, n_post, n_delay); delay of slot s is (s + 1) steps.
    v_init:     (n_post,) membrane potentials at step 0.
    pending:    (n_delay, n_post) currents already scheduled for the first
                steps of the window (consumed by this call).

    Returns (spikes (T, n_post) uint8, v_final (n_post,)). Deliveries that
    would land at or beyond T are dropped.
    """
    T, n_pre = pre_spikes.shape
    n_post = weights.shape[1]
    n_delay = weights.shape[2]

    currents = np.zeros((T, n_post))
    h = min(n_delay, T)
    for s in range(h):
        for q in range(n_post):
            currents[s, q] += pending[s, q]

    for t in range(T):
        for p in range(n_pre):
            if pre_spikes[t, p]:
                for s in range(n_delay):
                    ta = t + s + 1
                    if ta < T:
                        for q in range(n_post):
                            currents[ta, q] += weights[p, q, s]

    spikes = np.zeros((T, n_post), np.uint8)
    v = v_init.copy()
    for t in range(T):
        for q in range(n_post):
            vq = v[q] + dt * (-(v[q] - v_rest) / tau + currents[t, q] / cap)
            if vq >= v_thresh:
                spikes[t, q] = 1
                vq = v_reset
            v[q] = vq
    return spikes, v


@njit(cache=True)
def accumulate_pair_deltas(pre_spikes, desired, actual, n_delay, table,
                           offset, out):
    """Add the per-synapse STDP/anti-STDP weight changes of one presentation.

    table[d + offset] holds the desired-train pair contribution for an
    integer time difference d = t_out - (t_pre + delay); contributions from
    the actual train enter with opposite sign. out has shape
    (n_pre, n_delay) and is accumulated in place.
    """
    T, n_pre = pre_spikes.shape
    kd = desired.shape[0]
    ka = actual.shape[0]
    for t in range(T):
        for p in range(n_pre):
            if pre_spikes[t, p]:
                for s in range(1, n_delay + 1):
                    base = offset - t - s
                    acc = 0.0
                    for j in range(kd):
                        acc += table[desired[j] + base]
                    for j in range(ka):
                        acc -= table[actual[j] + base]
                    out[p, s - 1] += acc


@njit(cache=True)
def base_train(rng, rate, min_isi, duration):
    """Bernoulli spike train with suppressed slots after each spike.

    One uniform is consumed per slot regardless of eligibility; a candidate
    is kept only if more than min_isi slots passed since the last spike,
    so all inter-spike intervals exceed min_isi.
    """
    times = np.empty(duration, np.int64)
    n = 0
    last = -(1 << 30)
    for t in range(duration):
        u = rng.random()
        if u < rate and t - last > min_isi:
            times[n] = t
            n += 1
            last = t
    return times[:n].copy()


@njit(cache=True)
def sample_constrained_pair(rng, rate, min_isi, duration, quiet_head,
                            spike_count, max_attempts):
    """Rejection-sample a train pair for the output neuron.

    Each attempt regenerates a base train and a random split, consuming the
    same stream as base_train followed by one uniform per base spike, and is
    accepted when both halves have exactly spike_count spikes none of which
    fall before quiet_head. Returns (s_true, s_false, attempts); attempts is
    -1 when the budget is exhausted.
    """
    empty = np.empty(0, np.int64)
    for attempt in range(max_attempts):
        base = base_train(rng, rate, min_isi, duration)
        n = base.shape[0]
        s_true = np.empty(n, np.int64)
        s_false = np.empty(n, np.int64)
        nt = 0
        nf = 0
        for i in range(n):
            if rng.random() < 0.5:
                s_true[nt] = base[i]
                nt += 1
            else:
                s_false[nf] = base[i]
                nf += 1
        if nt != spike_count or nf != spike_count:
            continue
        if n > 0 and base[0] < quiet_head:
            continue
        return s_true[:nt].copy(), s_false[:nf].copy(), attempt + 1
    return empty, empty, -1
