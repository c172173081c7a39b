"""Least-squares power-law fits on log-log data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

__all__ = ["LogLogFit", "fit_loglog"]


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    residual: float  # RMS of log10 residuals


def fit_loglog(xs, ys) -> LogLogFit:
    """Fit log10 y = slope * log10 x + intercept.

    Requires positive data; the residual is the root-mean-square misfit
    in log10, the scale the acceptance thresholds are stated in.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2:
        raise ValueError("power-law fit needs at least two points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("power-law fit needs positive data")
    lx = np.log10(xs)
    ly = np.log10(ys)
    res = stats.linregress(lx, ly)
    pred = res.slope * lx + res.intercept
    rms = float(np.sqrt(np.mean((ly - pred) ** 2)))
    return LogLogFit(slope=float(res.slope), intercept=float(res.intercept), residual=rms)
