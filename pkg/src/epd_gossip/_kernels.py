"""Numba stencil kernels for the gossip update on 1-, 2- and 3-d boxes.

One step computes out = a * (omega * x) + b * x - c * x_prev on the box
grown by the filter radius, together with per-slab partial sums for the
round metrics.  Each output cell is an independent gather with a fixed
summation order, so results are bitwise reproducible for any thread count.
Values with magnitude below ``tiny`` are flushed to zero (subnormal guard
for long runs); pass tiny = 0.0 to disable.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

DENORMAL_FLOOR = 1e-280


@njit(parallel=True, cache=True)
def _step_1d(x, xprev, offs, wts, R, a, b, c, tiny):
    nx = x.shape[0]
    npv = xprev.shape[0]
    no = nx + 2 * R
    po = (no - npv) // 2
    out = np.zeros(no)
    part_mass = np.zeros(no)
    part_l2 = np.zeros(no)
    part_sup = np.zeros(no)
    for i in prange(no):
        acc = 0.0
        for k in range(wts.shape[0]):
            s = i - R - offs[k, 0]
            if 0 <= s < nx:
                acc += wts[k] * x[s]
        acc *= a
        s = i - R
        if b != 0.0 and 0 <= s < nx:
            acc += b * x[s]
        s = i - po
        if c != 0.0 and 0 <= s < npv:
            acc -= c * xprev[s]
        if -tiny < acc < tiny:
            acc = 0.0
        out[i] = acc
        part_mass[i] = acc
        part_l2[i] = acc * acc
        part_sup[i] = -acc if acc < 0.0 else acc
    return out, part_mass, part_l2, part_sup


@njit(parallel=True, cache=True)
def _step_2d(x, xprev, offs, wts, R, a, b, c, tiny):
    nx = x.shape[0]
    npv = xprev.shape[0]
    no = nx + 2 * R
    po = (no - npv) // 2
    out = np.zeros((no, no))
    part_mass = np.zeros(no)
    part_l2 = np.zeros(no)
    part_sup = np.zeros(no)
    for i in prange(no):
        rm = 0.0
        rl = 0.0
        rs = 0.0
        for j in range(no):
            acc = 0.0
            for k in range(wts.shape[0]):
                s0 = i - R - offs[k, 0]
                s1 = j - R - offs[k, 1]
                if 0 <= s0 < nx and 0 <= s1 < nx:
                    acc += wts[k] * x[s0, s1]
            acc *= a
            s0 = i - R
            s1 = j - R
            if b != 0.0 and 0 <= s0 < nx and 0 <= s1 < nx:
                acc += b * x[s0, s1]
            s0 = i - po
            s1 = j - po
            if c != 0.0 and 0 <= s0 < npv and 0 <= s1 < npv:
                acc -= c * xprev[s0, s1]
            if -tiny < acc < tiny:
                acc = 0.0
            out[i, j] = acc
            rm += acc
            rl += acc * acc
            aa = -acc if acc < 0.0 else acc
            if aa > rs:
                rs = aa
        part_mass[i] = rm
        part_l2[i] = rl
        part_sup[i] = rs
    return out, part_mass, part_l2, part_sup


@njit(parallel=True, cache=True)
def _step_3d(x, xprev, offs, wts, R, a, b, c, tiny):
    nx = x.shape[0]
    npv = xprev.shape[0]
    no = nx + 2 * R
    po = (no - npv) // 2
    out = np.zeros((no, no, no))
    part_mass = np.zeros(no)
    part_l2 = np.zeros(no)
    part_sup = np.zeros(no)
    for i in prange(no):
        rm = 0.0
        rl = 0.0
        rs = 0.0
        for j in range(no):
            for l in range(no):
                acc = 0.0
                for k in range(wts.shape[0]):
                    s0 = i - R - offs[k, 0]
                    s1 = j - R - offs[k, 1]
                    s2 = l - R - offs[k, 2]
                    if 0 <= s0 < nx and 0 <= s1 < nx and 0 <= s2 < nx:
                        acc += wts[k] * x[s0, s1, s2]
                acc *= a
                s0 = i - R
                s1 = j - R
                s2 = l - R
                if b != 0.0 and 0 <= s0 < nx and 0 <= s1 < nx and 0 <= s2 < nx:
                    acc += b * x[s0, s1, s2]
                s0 = i - po
                s1 = j - po
                s2 = l - po
                if c != 0.0 and 0 <= s0 < npv and 0 <= s1 < npv and 0 <= s2 < npv:
                    acc -= c * xprev[s0, s1, s2]
                if -tiny < acc < tiny:
                    acc = 0.0
                out[i, j, l] = acc
                rm += acc
                rl += acc * acc
                aa = -acc if acc < 0.0 else acc
                if aa > rs:
                    rs = aa
        part_mass[i] = rm
        part_l2[i] = rl
        part_sup[i] = rs
    return out, part_mass, part_l2, part_sup


_STEPS = {1: _step_1d, 2: _step_2d, 3: _step_3d}


def _step_generic(x, xprev, offs, wts, R, a, b, c, tiny):
    # plain-numpy fallback for dimensions above 3
    dim = x.ndim
    nx = x.shape[0]
    npv = xprev.shape[0]
    no = nx + 2 * R
    po = (no - npv) // 2
    out = np.zeros((no,) * dim)
    conv_view = tuple(slice(0, nx) for _ in range(dim))
    for k in range(wts.shape[0]):
        target = tuple(
            slice(R + offs[k, i], R + offs[k, i] + nx) for i in range(dim)
        )
        out[target] += (a * wts[k]) * x[conv_view]
    if b != 0.0:
        center = tuple(slice(R, R + nx) for _ in range(dim))
        out[center] += b * x
    if c != 0.0:
        center = tuple(slice(po, po + npv) for _ in range(dim))
        out[center] -= c * xprev
    if tiny > 0.0:
        out[np.abs(out) < tiny] = 0.0
    flat = out.reshape(no, -1)
    return out, flat.sum(axis=1), (flat * flat).sum(axis=1), np.abs(flat).max(axis=1)


def gossip_step(x, xprev, offs, wts, R, a=1.0, b=0.0, c=0.0, tiny=0.0):
    """Apply one (possibly second-order) gossip update.

    Returns (out, mass, l2_sq, sup).  ``x`` and ``xprev`` are dense centered
    boxes; ``xprev`` is ignored when c == 0 (pass ``x`` itself as a dummy).
    """
    step = _STEPS.get(x.ndim, _step_generic)
    out, pm, pl, ps = step(
        x, xprev, offs, wts, R, float(a), float(b), float(c), float(tiny)
    )
    return out, float(pm.sum()), float(pl.sum()), float(ps.max())
