"""Run a trace through one estimator tier and write RunReport CSVs."""

from __future__ import annotations

import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from wsnbattery.core import Config, CurrentProfile, precompute
from wsnbattery.estimator import run_float, run_linear
from wsnbattery.fixedpoint import METRIC_FULL, UNITS_PER_MAMIN, alpha_units, run_int
from wsnbattery.oracle import DEFAULT_M_MAX, exact_sigma_series
from wsnbattery.workload import as_array

TIERS = ("float", "int", "linear", "oracle")
REPORT_HEADER = "t_min,sigma_mAmin,remaining_metric,remaining_pct"


@dataclass
class RunReport:
    """Per-window trajectory of one tier plus the metadata that reproduces it."""

    t_min: np.ndarray
    sigma: np.ndarray
    metric: np.ndarray
    tier: str
    meta: dict = field(default_factory=dict)

    @property
    def pct(self) -> np.ndarray:
        return self.metric / (METRIC_FULL / 100.0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(REPORT_HEADER + "\n")
        metric_fmt = "{:d}" if self.tier == "int" else "{:.3f}"
        for t, s, m, p in zip(self.t_min.tolist(), self.sigma.tolist(),
                              self.metric.tolist(), self.pct.tolist()):
            buf.write(f"{t:.6f},{s:.6f},{metric_fmt.format(m)},{p:.6f}\n")
        return buf.getvalue()


def run_tier(windows, tier: str, profile: CurrentProfile, config: Config,
             m_max_oracle: int = DEFAULT_M_MAX) -> RunReport:
    """Evaluate ``windows`` with the requested estimator tier."""
    if tier not in TIERS:
        raise ValueError(f"unknown estimator {tier!r}; expected one of {', '.join(TIERS)}")
    arr = as_array(windows)
    params = config.params
    derived = precompute(params, config.idle_fraction)
    t = (np.arange(1, len(arr) + 1) * params.delta)
    if tier == "int":
        run = run_int(arr, profile.milli(), derived.scaled, params.delta_ms)
        au = alpha_units(params)
        sigma = run.sigma_u / UNITS_PER_MAMIN
        metric = run.metric(au)
    else:
        if tier == "float":
            sigma = run_float(arr, profile, params, derived).sigma
        elif tier == "linear":
            sigma = run_linear(arr, profile, params).sigma
        else:
            sigma = exact_sigma_series(arr, profile, params.delta_ms, params.beta, m_max_oracle)
        metric = np.maximum(params.alpha - sigma, 0.0) / params.alpha * METRIC_FULL
    return RunReport(t_min=t, sigma=np.asarray(sigma, dtype=float),
                     metric=np.asarray(metric), tier=tier)


def read_report(text: str) -> RunReport:
    """Parse a RunReport CSV back into arrays."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != REPORT_HEADER:
        raise ValueError(f"not a run report: expected header {REPORT_HEADER!r}")
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]]).reshape(-1, 4)
    return RunReport(t_min=rows[:, 0], sigma=rows[:, 1], metric=rows[:, 2], tier="file")


def write_atomic(path: str | Path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_meta(path: str | Path, meta: dict) -> None:
    write_atomic(str(path) + ".meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")


def drift_slope(d: np.ndarray, start: int = 100) -> float:
    """Least-squares slope of ``d`` against window index, per window."""
    d = np.asarray(d, dtype=float)[start:]
    if len(d) < 2:
        return 0.0
    n = np.arange(len(d), dtype=float)
    n -= n.mean()
    return float(np.dot(n, d - d.mean()) / np.dot(n, n))
