"""Pure learning-curve measurements."""

from __future__ import annotations

import numpy as np

from .exceptions import InvalidValueError
from .models import LearningCurve
from .stream_gen import FloatArray


def _tail(alpha: FloatArray, y: FloatArray, alpha_min: float) -> tuple[FloatArray, FloatArray]:
    mask = alpha >= alpha_min
    if np.count_nonzero(mask) < 3:
        raise InvalidValueError(f"fewer than 3 points beyond alpha={alpha_min}")
    return alpha[mask], y[mask]


def dominant_period(alpha: FloatArray, y: FloatArray, alpha_min: float = 0.0) -> float:
    """Return the mean spacing of upward mean-crossings of y beyond alpha_min."""
    a, v = _tail(alpha, y, alpha_min)
    centered = v - v.mean()
    up = np.flatnonzero((centered[:-1] < 0) & (centered[1:] >= 0))
    if len(up) < 2:
        raise InvalidValueError("need at least two upward crossings to estimate a period")
    # Linear interpolation of each crossing inside its interval.
    frac = -centered[up] / (centered[up + 1] - centered[up])
    crossings = a[up] + frac * (a[up + 1] - a[up])
    return float(np.mean(np.diff(crossings)))


def oscillation_amplitude(alpha: FloatArray, y: FloatArray, alpha_min: float = 0.0) -> float:
    """Return half the peak-to-peak range of y beyond alpha_min."""
    _, v = _tail(alpha, y, alpha_min)
    return 0.5 * float(np.ptp(v))


def ordering_swap_alpha(curve: LearningCurve, after: float) -> float | None:
    """Return the first alpha >= after where eps+ - eps- changes sign.

    The reference sign is the one at the last grid point before ``after``.
    None if the ordering never swaps.
    """
    diff = curve.values["eps_plus"] - curve.values["eps_minus"]
    before = np.flatnonzero(curve.alpha < after)
    if len(before) == 0:
        raise InvalidValueError(f"no grid point before alpha={after}")
    reference = np.sign(diff[before[-1]])
    for i in np.flatnonzero(curve.alpha >= after):
        current = np.sign(diff[i])
        if current != 0 and current != reference:
            return float(curve.alpha[i])
    return None


def window_range(curve: LearningCurve, key: str, lo: float, hi: float) -> float:
    """Return max - min of a column over lo <= alpha <= hi."""
    values = curve.window(lo, hi).column(key)
    return float(np.ptp(values))
