"""Numba-compiled SOM training loop.

The kernel mirrors the SplitMix64 stream from :mod:`blockmorph.rng` bit for
bit (asserted by tests): the caller draws the initial weights from the
stream in Python and hands over the post-init state; the kernel continues
the stream for the per-epoch Fisher-Yates shuffles.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, uint64

_GAMMA = uint64(0x9E3779B97F4A7C15)
_MIX1 = uint64(0xBF58476D1CE4E5B9)
_MIX2 = uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def _next(state):
    state = state + _GAMMA
    z = state
    z = (z ^ (z >> uint64(30))) * _MIX1
    z = (z ^ (z >> uint64(27))) * _MIX2
    z = z ^ (z >> uint64(31))
    return state, z


@njit(cache=True, inline="always")
def _next_double(state):
    state, z = _next(state)
    return state, np.float64(z >> uint64(11)) * _INV_2_53


@njit(cache=True)
def rng_doubles(seed, n):
    """Probe used by tests to compare the kernel RNG with the Python one."""
    out = np.empty(n, dtype=np.float64)
    state = uint64(seed)
    for i in range(n):
        state, out[i] = _next_double(state)
    return out


@njit(cache=True)
def train_som(weights, samples, state, iterations, alpha0, sigma0, rows, cols):
    """Online SOM training over ``iterations`` full epochs.

    Per epoch t: alpha = alpha0*(1 - t/T), sigma = max(0.5, sigma0*(1 - t/T));
    the visiting order is reshuffled in place (Fisher-Yates on the running
    permutation); for each sample the BMU is the lowest-index nearest neuron
    and every neuron moves by alpha * exp(-g^2 / (2 sigma^2)) * (x - w),
    g being the Euclidean distance between (row, col) grid positions.
    """
    k, dim = weights.shape
    n = samples.shape[0]
    grid_r = np.empty(k, dtype=np.float64)
    grid_c = np.empty(k, dtype=np.float64)
    for j in range(k):
        grid_r[j] = j // cols
        grid_c[j] = j % cols
    order = np.arange(n)
    influence = np.empty((k, k), dtype=np.float64)
    st = uint64(state)
    for t in range(iterations):
        frac = 1.0 - t / iterations
        alpha = alpha0 * frac
        sigma = sigma0 * frac
        if sigma < 0.5:
            sigma = 0.5
        denom = 2.0 * sigma * sigma
        for b in range(k):
            for j in range(k):
                dr = grid_r[j] - grid_r[b]
                dc = grid_c[j] - grid_c[b]
                influence[b, j] = math.exp(-(dr * dr + dc * dc) / denom)
        for i in range(n - 1, 0, -1):
            st, u = _next_double(st)
            j = int(u * (i + 1))
            if j > i:
                j = i
            tmp = order[i]
            order[i] = order[j]
            order[j] = tmp
        for i in range(n):
            x = samples[order[i]]
            best = 0
            best_d = np.inf
            for j in range(k):
                acc = 0.0
                for m in range(dim):
                    d = x[m] - weights[j, m]
                    acc += d * d
                if acc < best_d:
                    best_d = acc
                    best = j
            h = influence[best]
            for j in range(k):
                step = alpha * h[j]
                if step > 0.0:
                    for m in range(dim):
                        weights[j, m] += step * (x[m] - weights[j, m])
    return st
