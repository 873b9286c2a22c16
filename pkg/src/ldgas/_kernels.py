"""Metropolis sweep kernels.

One sweep proposes a move for every particle in turn:

    y = lam[i] + step * (2 u - 1),

rejecting proposals outside the walls or closer than ``eps`` to another
particle, and otherwise accepting with probability min(1, exp(-beta dE)),
where dE is the energy increment

    dE = -sum_{j != i} log|y - lam_j| / |x - lam_j| + n_scale (W(y) - W(x)).

Two implementations share this contract: a scalar-loop kernel compiled with
numba, and a vectorized numpy fallback.  Setting the environment variable
LDGAS_DISABLE_NUMBA=1 (or any nonempty value) before import forces the numpy
path; both consume the same pre-drawn uniform block ``u`` of shape (n, 2),
so a fixed seed reproduces a chain bit for bit on either path.
"""

from __future__ import annotations

import math
import os

import numpy as np


def sweep_numpy(lam, wc, lo, hi, n_scale, beta, step, u, eps):
    """One Metropolis sweep, vectorized over the pair interactions.

    Mutates ``lam`` in place; returns (accepted, wall_rejects, coincidence
    rejects, total energy change).
    """
    n = lam.shape[0]
    acc = 0
    wall = 0
    coinc = 0
    de_total = 0.0
    for i in range(n):
        x = lam[i]
        y = x + step * (2.0 * u[i, 0] - 1.0)
        if y < lo or y > hi:
            wall += 1
            continue
        d_y = y - lam
        d_x = x - lam
        d_y[i] = 1.0
        d_x[i] = 1.0
        if np.min(np.abs(d_y)) < eps:
            coinc += 1
            continue
        s_pairs = float(np.sum(np.log(np.abs(d_y))) - np.sum(np.log(np.abs(d_x))))
        wy = 0.0
        wx = 0.0
        for k in range(len(wc) - 1, -1, -1):
            wy = wy * y + wc[k]
            wx = wx * x + wc[k]
        de = -s_pairs + n_scale * (wy - wx)
        if de <= 0.0 or u[i, 1] < math.exp(-beta * de):
            lam[i] = y
            acc += 1
            de_total += de
    return acc, wall, coinc, de_total


def _sweep_scalar(lam, wc, lo, hi, n_scale, beta, step, u, eps):
    n = lam.shape[0]
    acc = 0
    wall = 0
    coinc = 0
    de_total = 0.0
    for i in range(n):
        x = lam[i]
        y = x + step * (2.0 * u[i, 0] - 1.0)
        if y < lo or y > hi:
            wall += 1
            continue
        ok = True
        s_pairs = 0.0
        for j in range(n):
            if j == i:
                continue
            dy = y - lam[j]
            if -eps < dy < eps:
                ok = False
                break
            s_pairs += math.log(abs(dy / (x - lam[j])))
        if not ok:
            coinc += 1
            continue
        wy = 0.0
        wx = 0.0
        for k in range(len(wc) - 1, -1, -1):
            wy = wy * y + wc[k]
            wx = wx * x + wc[k]
        de = -s_pairs + n_scale * (wy - wx)
        if de <= 0.0 or u[i, 1] < math.exp(-beta * de):
            lam[i] = y
            acc += 1
            de_total += de
    return acc, wall, coinc, de_total


NUMBA_ENABLED = False
sweep_numba = None

if not os.environ.get("LDGAS_DISABLE_NUMBA"):
    try:
        import numba

        sweep_numba = numba.njit(cache=True, nogil=True)(_sweep_scalar)
        NUMBA_ENABLED = True
    except ImportError:
        pass

default_sweep = sweep_numba if NUMBA_ENABLED else sweep_numpy


def full_energy(lam, wc, n_scale):
    """Total gas energy: -sum_{i<j} log|lam_i - lam_j| + n_scale sum_i W(lam_i)."""
    lam = np.asarray(lam)
    diffs = np.abs(lam[:, None] - lam[None, :])
    iu = np.triu_indices(len(lam), k=1)
    pair = -float(np.sum(np.log(diffs[iu])))
    wvals = np.zeros_like(lam)
    for k in range(len(wc) - 1, -1, -1):
        wvals = wvals * lam + wc[k]
    return pair + n_scale * float(np.sum(wvals))
