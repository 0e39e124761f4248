"""Floating-point windowed recursion of the diffusion battery model.

Every window of length Δ updates the apparent consumed charge as

    sigma_n = S_n + lam * (sigma_{n-1} - S_{n-1}) + 2 I_n A_n

where ``S_n`` is the plain cumulative charge, ``lam = exp(-β²Δ)`` and
``A_n ≈ f(ν)/β² - c0`` is the recovery term for a window whose last ``ν``
minutes are idle. The window's charge is attributed to its active part, so
``I_n = charge / (Δ - ν)``.

Besides the step function this module runs whole traces (:func:`run_float`)
and the plain additive baseline (:func:`run_linear`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from wsnbattery.core import MS_PER_MIN, BatteryParams, CurrentProfile, DerivedParams
from wsnbattery.workload import DutyWindow, TraceError, as_array, idle_time, window_charge

WINDOW_TOL = 0.01
SQRT_PI = math.sqrt(math.pi)
PI2_6 = math.pi ** 2 / 6.0


@dataclass(frozen=True)
class ChargeState:
    """Estimator state after ``n`` windows (``t`` minutes)."""

    sigma: float = 0.0
    cum_load: float = 0.0
    n: int = 0
    t: float = 0.0

    @property
    def unavailable(self) -> float:
        return self.sigma - self.cum_load

    def exhausted(self, params: BatteryParams) -> bool:
        return self.sigma >= params.alpha


def f_over_beta2(nu, derived: DerivedParams, beta: float):
    """ν/2 - (√π/β)·√ν + π²/(6β²), with √ν linearised around ``a``."""
    sqrt_nu = derived.sqrt_a + (np.asarray(nu) - derived.a) * derived.inv_2sqrt_a
    out = np.asarray(nu) / 2.0 - (SQRT_PI / beta) * sqrt_nu + PI2_6 / (beta * beta)
    return float(out) if np.ndim(out) == 0 else out


def f_exact_sqrt(nu, beta: float):
    """Same closed form with the exact square root."""
    nu = np.asarray(nu, dtype=float)
    out = nu / 2.0 - (SQRT_PI / beta) * np.sqrt(nu) + PI2_6 / (beta * beta)
    return float(out) if np.ndim(out) == 0 else out


def _check_window(w, delta_ms: int) -> None:
    if min(w) < 0:
        raise TraceError(f"negative state time in window {tuple(w)}")
    if abs(w[0] + w[1] - delta_ms) > WINDOW_TOL * delta_ms:
        raise TraceError(f"CPU+LPM = {w[0] + w[1]} ms differs from the {delta_ms} ms window by > 1%")


def recovery_input(charge_mamin, nu_min, derived: DerivedParams, params: BatteryParams):
    """The ``2 I_n A_n`` term, mA·min; zero for fully idle windows.

    ``A_n`` is clamped at zero: the exact term is never negative, while the
    linearised ``f`` can dip marginally below ``c0`` for windows that are
    idle almost throughout, where ``I_n`` becomes large.
    """
    charge = np.asarray(charge_mamin, dtype=float)
    nu = np.asarray(nu_min, dtype=float)
    active = params.delta - nu
    A = np.maximum(f_over_beta2(nu, derived, params.beta) - derived.c0, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(active > 1e-12, 2.0 * charge * A / np.where(active > 1e-12, active, 1.0), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def step(state: ChargeState, window: DutyWindow, profile: CurrentProfile,
         params: BatteryParams, derived: DerivedParams) -> ChargeState:
    """Advance the estimator by one window."""
    delta_ms = params.delta_ms
    _check_window(window, delta_ms)
    q = window_charge(window, profile) / MS_PER_MIN
    nu = idle_time(window) / MS_PER_MIN
    cum = state.cum_load + q
    sigma = cum + derived.lam * (state.sigma - state.cum_load) + recovery_input(q, nu, derived, params)
    return ChargeState(sigma=sigma, cum_load=cum, n=state.n + 1, t=(state.n + 1) * params.delta)


def remaining_charge(state: ChargeState, params: BatteryParams) -> float:
    """``alpha - sigma`` clamped at zero (see :meth:`ChargeState.exhausted`)."""
    return max(params.alpha - state.sigma, 0.0)


@dataclass
class FloatRun:
    """Per-window trajectory of a run; index ``j`` is the end of window ``j``."""

    t: np.ndarray
    sigma: np.ndarray
    cum_load: np.ndarray
    final: ChargeState

    def remaining(self, params: BatteryParams) -> np.ndarray:
        return np.maximum(params.alpha - self.sigma, 0.0)

    def metric(self, params: BatteryParams) -> np.ndarray:
        """Remaining energy on the 0..255·10^5 scale (real valued)."""
        return self.remaining(params) / params.alpha * 255e5


def run_float(windows, profile: CurrentProfile, params: BatteryParams, derived: DerivedParams,
              state: ChargeState | None = None, validate: bool = True) -> FloatRun:
    """Fold :func:`step` over a trace, vectorised.

    The unavailable charge obeys ``u_n = lam·u_{n-1} + r_n``, a first-order
    linear filter, so the fold is evaluated with :func:`scipy.signal.lfilter`.
    """
    arr = as_array(windows)
    state = state or ChargeState()
    if len(arr) == 0:
        empty = np.zeros(0)
        return FloatRun(t=empty, sigma=empty, cum_load=empty, final=state)
    if validate:
        bad = (arr < 0).any(axis=1) | (np.abs(arr[:, 0] + arr[:, 1] - params.delta_ms)
                                       > WINDOW_TOL * params.delta_ms)
        if bad.any():
            j = int(np.argmax(bad))
            _check_window(tuple(arr[j]), params.delta_ms)
    q = window_charge(arr, profile) / MS_PER_MIN
    nu = idle_time(arr) / MS_PER_MIN
    r = np.atleast_1d(recovery_input(q, nu, derived, params))
    cum = state.cum_load + np.cumsum(q)
    u, _ = lfilter([1.0], [1.0, -derived.lam], r, zi=[derived.lam * state.unavailable])
    sigma = cum + u
    n = state.n + np.arange(1, len(arr) + 1)
    t = n * params.delta
    final = ChargeState(float(sigma[-1]), float(cum[-1]), int(n[-1]), float(t[-1]))
    return FloatRun(t=t, sigma=sigma, cum_load=cum, final=final)


def run_linear(windows, profile: CurrentProfile, params: BatteryParams,
               state: ChargeState | None = None) -> FloatRun:
    """Additive baseline: consumed charge is the plain sum, no diffusion."""
    arr = as_array(windows)
    state = state or ChargeState()
    q = window_charge(arr, profile) / MS_PER_MIN if len(arr) else np.zeros(0)
    cum = state.cum_load + np.cumsum(q)
    n = state.n + np.arange(1, len(arr) + 1)
    t = n * params.delta
    final = ChargeState(float(cum[-1]), float(cum[-1]), int(n[-1]), float(t[-1])) if len(arr) else state
    return FloatRun(t=t, sigma=cum.copy(), cum_load=cum, final=final)
