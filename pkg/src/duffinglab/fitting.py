"""Log-log decay fitting and envelope extraction."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FitDegenerateError


@dataclass(frozen=True)
class DecayFit:
    """Least-squares line through (ln x, ln |v|): |v| ~ exp(intercept) * x^slope."""

    slope: float
    intercept: float
    rms_residual: float
    n_points: int
    x_range: tuple


def loglog_fit(xs, vs) -> DecayFit:
    """Fit ln|v| = slope * ln x + intercept by least squares.

    Points with v = 0 cannot be placed on a log scale; fewer than two
    usable points is degenerate.
    """
    xs = np.asarray(xs, dtype=float)
    vs = np.asarray(vs, dtype=float)
    if xs.shape != vs.shape or xs.ndim != 1:
        raise ValueError("xs and vs must be equal-length 1-d arrays")
    if np.any(xs <= 0.0):
        raise ValueError("abscissae must be positive")
    keep = vs != 0.0
    xs, vs = xs[keep], vs[keep]
    if xs.size < 2 or np.unique(xs).size < 2:
        raise FitDegenerateError(
            "need at least two distinct points with nonzero values",
            usable=int(xs.size),
        )
    lx = np.log(xs)
    lv = np.log(np.abs(vs))
    lx_mean = lx.mean()
    lv_mean = lv.mean()
    dx = lx - lx_mean
    slope = float(np.dot(dx, lv - lv_mean) / np.dot(dx, dx))
    intercept = float(lv_mean - slope * lx_mean)
    resid = lv - (slope * lx + intercept)
    rms = float(math.sqrt(np.mean(resid * resid)))
    return DecayFit(
        slope=slope,
        intercept=intercept,
        rms_residual=rms,
        n_points=int(xs.size),
        x_range=(float(xs.min()), float(xs.max())),
    )


def envelope_points(xs, vs, window_factor):
    """Windowed maxima of |v| on a geometric partition of the x range.

    Returns (window_midpoints, window_maxima); windows with no samples or a
    zero maximum are dropped.
    """
    if window_factor < 2.0:
        raise ValueError("window_factor must be >= 2")
    xs = np.asarray(xs, dtype=float)
    vs = np.abs(np.asarray(vs, dtype=float))
    if xs.shape != vs.shape or xs.ndim != 1 or xs.size == 0:
        raise ValueError("xs and vs must be equal-length non-empty 1-d arrays")
    if np.any(xs <= 0.0):
        raise ValueError("abscissae must be positive")
    order = np.argsort(xs, kind="stable")
    xs, vs = xs[order], vs[order]
    lo = xs[0]
    hi = xs[-1]
    mids = []
    maxima = []
    left = lo
    while left <= hi:
        right = left * window_factor
        inside = (xs >= left) & (xs < right)
        if left * window_factor > hi:  # last window: include the endpoint
            inside = (xs >= left) & (xs <= hi)
        if np.any(inside):
            peak = float(vs[inside].max())
            if peak > 0.0:
                mids.append(math.sqrt(left * min(right, hi * (1 + 1e-12))))
                maxima.append(peak)
        left = right
    return np.asarray(mids), np.asarray(maxima)


def envelope_fit(xs, vs, window_factor) -> DecayFit:
    """Decay fit of the windowed envelope of |v| (for sign-changing data)."""
    mids, maxima = envelope_points(xs, vs, window_factor)
    if mids.size < 4:
        raise FitDegenerateError(
            "need at least four non-empty windows for an envelope fit",
            windows=int(mids.size),
        )
    return loglog_fit(mids, maxima)


def geometric_grid(lo, hi, n_points):
    """n_points geometrically spaced values from lo to hi inclusive."""
    if not (0.0 < lo < hi):
        raise ValueError("need 0 < lo < hi")
    if n_points < 2:
        raise ValueError("need at least two grid points")
    return np.geomspace(lo, hi, int(n_points))
