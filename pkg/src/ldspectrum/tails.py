"""Finite-n surrogates for liminf/limsup along an increasing n-schedule.

The convention is shared by every estimator in the package so that quantities
compared in the theorem checks are like-for-like: the liminf (limsup)
surrogate is the min (max) over the last ``w`` schedule entries, and its
stability is how much the surrogate moves when the window is doubled.  A
stable surrogate is the criterion for calling a point "converged".
"""

import numpy as np


def _stability(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # |a - b| with identical infinities counting as perfectly stable
    with np.errstate(invalid="ignore"):
        diff = np.abs(a - b)
    return np.where(a == b, 0.0, diff)


def tail_surrogates(values, w: int):
    """(lower, upper, stab_lower, stab_upper) of a sequence along the schedule.

    ``values`` is indexed by schedule position on axis 0 (any trailing shape)
    and may contain +-inf.  Stability compares the window of size ``w``
    against the window of size ``2w`` (clipped to the available history).
    """
    arr = np.asarray(values, dtype=float)
    if arr.shape[0] < w:
        raise ValueError("schedule shorter than the tail window")
    wide = min(2 * w, arr.shape[0])
    lo_w = np.min(arr[-w:], axis=0)
    hi_w = np.max(arr[-w:], axis=0)
    lo_2w = np.min(arr[-wide:], axis=0)
    hi_2w = np.max(arr[-wide:], axis=0)
    stab_lo = _stability(lo_w, lo_2w)
    stab_hi = _stability(hi_w, hi_2w)
    if arr.ndim == 1:
        return float(lo_w), float(hi_w), float(stab_lo), float(stab_hi)
    return lo_w, hi_w, stab_lo, stab_hi
