"""Least-squares lifetime extrapolation from remaining-energy samples."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_FIT_POINTS = 10_000
DEFAULT_DISCARD_MIN = 10.0


class NoDecayError(ValueError):
    """The fitted line does not decrease: the battery outlives the projection."""


@dataclass(frozen=True)
class EnergySample:
    t: float
    remaining: float
    unit: str = "pct"


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    rms: float
    n: int


def _as_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(samples, tuple) and len(samples) == 2 and np.ndim(samples[0]) == 1:
        return np.asarray(samples[0], dtype=float), np.asarray(samples[1], dtype=float)
    t = np.array([s.t for s in samples], dtype=float)
    y = np.array([s.remaining for s in samples], dtype=float)
    return t, y


def decimate(t: np.ndarray, y: np.ndarray, limit: int = MAX_FIT_POINTS):
    if len(t) <= limit:
        return t, y
    idx = np.unique(np.linspace(0, len(t) - 1, limit).round().astype(int))
    return t[idx], y[idx]


def fit_line(samples: Sequence[EnergySample] | tuple[np.ndarray, np.ndarray],
             limit: int = MAX_FIT_POINTS) -> LineFit:
    """Ordinary least squares of remaining energy against time.

    Accepts a sequence of :class:`EnergySample` or a ``(t, y)`` pair of
    arrays. Long inputs are decimated to ``limit`` points; sums are formed
    about the means with :func:`math.fsum`.
    """
    t, y = _as_arrays(samples)
    if len(t) and np.any(np.diff(t) < 0):
        raise ValueError("samples must be time-ordered")
    if len(np.unique(t)) < 2:
        raise ValueError("need at least 2 samples with distinct times")
    t, y = decimate(t, y, limit)
    tm = math.fsum(t) / len(t)
    ym = math.fsum(y) / len(y)
    dt, dy = t - tm, y - ym
    sxx = math.fsum(dt * dt)
    sxy = math.fsum(dt * dy)
    slope = sxy / sxx
    intercept = ym - slope * tm
    resid = y - (intercept + slope * t)
    rms = math.sqrt(math.fsum(resid * resid) / len(t))
    return LineFit(slope=slope, intercept=intercept, rms=rms, n=len(t))


def project_zero(fit: LineFit) -> float:
    """Time at which the fitted line reaches zero remaining energy."""
    if not fit.slope < 0:
        raise NoDecayError("no decay: battery outlives projection")
    return -fit.intercept / fit.slope


def project_lifetime(t_min: np.ndarray, remaining: np.ndarray,
                     discard_min: float = DEFAULT_DISCARD_MIN) -> tuple[LineFit, float]:
    """Fit after dropping the first ``discard_min`` minutes; returns (fit, t0 in min)."""
    t_min = np.asarray(t_min, dtype=float)
    remaining = np.asarray(remaining, dtype=float)
    keep = t_min >= discard_min
    if keep.sum() < 2:
        keep = np.ones_like(t_min, dtype=bool)
    fit = fit_line((t_min[keep], remaining[keep]))
    return fit, project_zero(fit)
