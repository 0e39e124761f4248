"""High-truncation evaluation of the analytical diffusion battery model.

For a load ``i(t)`` the apparent consumed charge at time ``L`` is

    sigma(L) = ∫_0^L i + 2 Σ_m ∫_0^L i(τ) exp(-β² m² (L - τ)) dτ

and the battery is empty once ``sigma(L)`` reaches the capacity. Loads are
piecewise constant, so every integral has a closed form. Nothing here uses
the windowed recursion of :mod:`wsnbattery.estimator`; this module is the
ground truth it is checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.signal import lfilter

from wsnbattery.core import MS_PER_MIN, BatteryParams, CurrentProfile
from wsnbattery.workload import as_array

DEFAULT_M_MAX = 1000
BISECTION_TOL_MIN = 1.0 / 60.0


class HorizonError(RuntimeError):
    """The battery outlives the evaluation horizon."""


@dataclass(frozen=True)
class PiecewiseLoad:
    """Piecewise-constant current, segments ``(start, end, current)`` in (min, min, mA).

    Gaps between segments carry zero current.
    """

    segments: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        segs = tuple((float(s), float(e), float(c)) for s, e, c in self.segments)
        object.__setattr__(self, "segments", segs)
        prev_end = -math.inf
        for s, e, c in segs:
            if not s < e:
                raise ValueError(f"segment [{s}, {e}] must have start < end")
            if c < 0:
                raise ValueError(f"negative current {c} mA in segment [{s}, {e}]")
            if s < prev_end - 1e-12:
                raise ValueError("segments must be sorted and non-overlapping")
            prev_end = e

    @classmethod
    def constant(cls, current: float, span: float, start: float = 0.0) -> "PiecewiseLoad":
        return cls(((start, start + span, current),))

    @property
    def total_span(self) -> float:
        return self.segments[-1][1] if self.segments else 0.0

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.segments:
            z = np.zeros(0)
            return z, z, z
        a = np.asarray(self.segments)
        return a[:, 0], a[:, 1], a[:, 2]

    def __add__(self, other: "PiecewiseLoad") -> "PiecewiseLoad":
        return PiecewiseLoad(tuple(sorted(self.segments + other.segments)))


def _modes(beta: float, m_max: int) -> np.ndarray:
    m = np.arange(1, m_max + 1, dtype=float)
    return beta * beta * m * m


def exact_A(L_n: float, t_hi: float, t_lo: float, beta: float, m_max: int = DEFAULT_M_MAX) -> float:
    """Σ_m [exp(-β²m²(L_n - t_hi)) - exp(-β²m²(L_n - t_lo))] / (β²m²)."""
    if not t_lo <= t_hi <= L_n:
        raise ValueError(f"need t_lo <= t_hi <= L_n, got {t_lo}, {t_hi}, {L_n}")
    if beta <= 0 or m_max < 1:
        raise ValueError("beta must be > 0 and m_max >= 1")
    k = _modes(beta, m_max)
    terms = (np.exp(-k * (L_n - t_hi)) - np.exp(-k * (L_n - t_lo))) / k
    return math.fsum(terms[::-1])


def exact_sigma(load: PiecewiseLoad, L: float, beta: float, m_max: int = DEFAULT_M_MAX) -> float:
    """Apparent consumed charge at time ``L``, mA·min.

    Segments are clipped at ``L``; ``m_max = 0`` disables the diffusion term.
    """
    if beta <= 0:
        raise ValueError("beta must be > 0")
    s, e, c = load.arrays()
    keep = s < L
    s, e, c = s[keep], np.minimum(e[keep], L), c[keep]
    if len(s) == 0:
        return 0.0
    plain = math.fsum(c * (e - s))
    if m_max == 0:
        return plain
    k = _modes(beta, m_max)
    # per-segment, per-mode: (exp(-k (L - e)) - exp(-k (L - s))) / k
    contrib = (np.exp(-np.outer(L - e, k)) - np.exp(-np.outer(L - s, k))) / k
    diffusion = math.fsum((c @ contrib)[::-1])
    return plain + 2.0 * diffusion


def unavailable_charge(load: PiecewiseLoad, L: float, beta: float, m_max: int = DEFAULT_M_MAX) -> float:
    """Diffusion part of :func:`exact_sigma`: charge present but not yet usable."""
    return exact_sigma(load, L, beta, m_max) - exact_sigma(load, L, beta, 0)


def window_segments(w, profile: CurrentProfile, delta_ms: int) -> list[tuple[float, float, float]]:
    """Serialize one window into piecewise-constant segments, ms offsets.

    CPU occupies the start of the window and LPM the rest; TX is laid from
    the start and RX right after it. This yields the order CPU+TX, CPU+RX,
    CPU, LPM, with radio time spilling into LPM when it exceeds the CPU time.
    """
    cpu, _, tx, rx = (int(v) for v in w)
    cuts = sorted({0, cpu, tx, tx + rx, delta_ms})
    out = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo or lo >= delta_ms:
            continue
        hi = min(hi, delta_ms)
        mid = 0.5 * (lo + hi)
        cur = profile.c_cpu if mid < cpu else profile.c_lpm
        if mid < tx:
            cur += profile.c_tx
        elif mid < tx + rx:
            cur += profile.c_rx
        out.append((lo, hi, cur))
    return out


def windows_to_load(windows, profile: CurrentProfile, delta_ms: int) -> PiecewiseLoad:
    """Concatenate serialized windows into one load (minutes)."""
    segs = []
    for n, w in enumerate(as_array(windows).tolist()):
        base = n * delta_ms
        for lo, hi, cur in window_segments(w, profile, delta_ms):
            if cur > 0:
                segs.append(((base + lo) / MS_PER_MIN, (base + hi) / MS_PER_MIN, cur))
    return PiecewiseLoad(tuple(segs))


def exact_sigma_series(windows, profile: CurrentProfile, delta_ms: int, beta: float,
                       m_max: int = DEFAULT_M_MAX, chunk: int = 4096) -> np.ndarray:
    """Exact sigma at every window boundary of a trace, mA·min.

    Each diffusion mode decays by exactly ``exp(-β²m²Δ)`` per window, so the
    mode amplitudes obey a first-order linear recurrence that is run with
    :func:`scipy.signal.lfilter`. This is the closed form of
    :func:`exact_sigma` regrouped by window, not an approximation.
    """
    arr = as_array(windows)
    n = len(arr)
    if n == 0:
        return np.zeros(0)
    delta = delta_ms / MS_PER_MIN
    k = _modes(beta, m_max) if m_max > 0 else np.zeros(0)
    decay = np.exp(-k * delta)
    # window layouts repeat heavily; cache per distinct window
    uniq, inverse = np.unique(arr, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    plain_u = np.zeros(len(uniq))
    contrib_u = np.zeros((len(uniq), len(k)))
    for j, w in enumerate(uniq.tolist()):
        for lo, hi, cur in window_segments(w, profile, delta_ms):
            s, e = lo / MS_PER_MIN, hi / MS_PER_MIN
            plain_u[j] += cur * (e - s)
            if len(k):
                contrib_u[j] += cur * (np.exp(-k * (delta - e)) - np.exp(-k * (delta - s))) / k
    plain = np.cumsum(plain_u[inverse])
    if len(k) == 0:
        return plain
    diffusion = np.empty(n)
    state = np.zeros(len(k))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        c = contrib_u[inverse[lo:hi]]
        amp, state = _mode_filter(c, decay, state)
        diffusion[lo:hi] = amp.sum(axis=1)
    return plain + 2.0 * diffusion


def _mode_filter(c: np.ndarray, decay: np.ndarray, state: np.ndarray):
    """Run amp_j = decay * amp_{j-1} + c_j per mode (column)."""
    out = np.empty_like(c)
    for col in range(c.shape[1]):
        y, zf = lfilter([1.0], [1.0, -decay[col]], c[:, col], zi=[decay[col] * state[col]])
        out[:, col] = y
    return out, out[-1]


def exact_lifetime(load: PiecewiseLoad | Callable[[float], PiecewiseLoad], params: BatteryParams,
                   m_max: int | None = DEFAULT_M_MAX, horizon: float | None = None,
                   grid: int = 512) -> float:
    """Smallest ``L`` with ``exact_sigma(L) >= alpha``, minutes, to 1 s.

    ``load`` is a load or a callable returning the load up to a given
    horizon. ``m_max = 0`` disables diffusion. Raises :class:`HorizonError`
    when the capacity is never reached.
    """
    if horizon is None:
        horizon = load.total_span if isinstance(load, PiecewiseLoad) else None
        if horizon is None:
            raise ValueError("horizon required for load generators")
    the_load = load if isinstance(load, PiecewiseLoad) else load(horizon)
    mm = DEFAULT_M_MAX if m_max is None else m_max

    def sigma(t: float) -> float:
        return exact_sigma(the_load, t, params.beta, mm)

    if horizon <= 0 or sigma(horizon) < params.alpha:
        raise HorizonError("battery outlives horizon")
    ts = np.linspace(0.0, horizon, grid + 1)
    lo = 0.0
    hi = horizon
    for t in ts[1:]:
        if sigma(t) >= params.alpha:
            hi = t
            break
        lo = t
    while hi - lo > BISECTION_TOL_MIN:
        mid = 0.5 * (lo + hi)
        if sigma(mid) >= params.alpha:
            hi = mid
        else:
            lo = mid
    return hi


def constant_lifetime_linear(current: float, params: BatteryParams) -> float:
    """Lifetime of a constant load without diffusion, minutes."""
    if current <= 0:
        raise HorizonError("battery outlives horizon")
    return params.alpha / current


def rel_error(estimate: Sequence[float], exact: Sequence[float]) -> np.ndarray:
    exact = np.asarray(exact, dtype=float)
    return (np.asarray(estimate, dtype=float) - exact) / exact
