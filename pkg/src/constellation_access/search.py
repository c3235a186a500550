"""Vectorised bracketing searches used for window edges and closest approach.

Each routine refines many independent brackets at once; ``fn(index, t)``
evaluates the objective for bracket owners ``index`` at times ``t``.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

Objective = Callable[[np.ndarray, np.ndarray], np.ndarray]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def bisect_sign_change(
    fn: Objective,
    index: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    lo_nonnegative: np.ndarray,
    tolerance: float,
) -> np.ndarray:
    """Locate where ``fn >= 0`` flips inside each ``[lo, hi]``; returns bracket midpoints."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    lo_nonnegative = np.asarray(lo_nonnegative, dtype=bool)
    active = np.nonzero(hi - lo > tolerance)[0]
    while active.size:
        mid = 0.5 * (lo[active] + hi[active])
        same_as_lo = (fn(index[active], mid) >= 0.0) == lo_nonnegative[active]
        lo[active[same_as_lo]] = mid[same_as_lo]
        hi[active[~same_as_lo]] = mid[~same_as_lo]
        active = active[hi[active] - lo[active] > tolerance]
    return 0.5 * (lo + hi)


def golden_minimize(
    fn: Objective, index: np.ndarray, a: np.ndarray, b: np.ndarray, tolerance: float
) -> tuple[np.ndarray, np.ndarray]:
    """Golden-section search for the minimum of a unimodal ``fn`` on each ``[a, b]``.

    Returns the best evaluated ``(t, value)`` per bracket; ties keep the
    earliest-evaluated point so results do not depend on batch composition.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = fn(index, c)
    fd = fn(index, d)
    take_d = fd < fc
    best_t = np.where(take_d, d, c)
    best_f = np.where(take_d, fd, fc)

    active = np.nonzero(b - a > tolerance)[0]
    while active.size:
        left = fc[active] <= fd[active]  # minimum lies in [a, d]
        ia, ib = active[left], active[~left]

        b[ia] = d[ia]
        d[ia] = c[ia]
        fd[ia] = fc[ia]
        c[ia] = b[ia] - _INV_PHI * (b[ia] - a[ia])

        a[ib] = c[ib]
        c[ib] = d[ib]
        fc[ib] = fd[ib]
        d[ib] = a[ib] + _INV_PHI * (b[ib] - a[ib])

        probe = np.where(left, c[active], d[active])
        value = fn(index[active], probe)
        fc[ia] = value[left]
        fd[ib] = value[~left]

        better = value < best_f[active]
        best_t[active[better]] = probe[better]
        best_f[active[better]] = value[better]
        active = active[b[active] - a[active] > tolerance]
    return best_t, best_f
