"""Integer-only estimator, as it would run on a microcontroller without FPU.

Scaling
-------
Offline constants come as integers (:class:`~wsnbattery.core.ScaledConstants`):
π², √π, c0, λ, a, √a and 1/(2√a) at ×1000, β at ×10. Idle times are turned
into ×1000 minutes (``nu_s = nu_ms * 1000 // 60000``) and the recovery curve
is evaluated at ×1000 as::

    f_s = (6e5·B²·nu_s + 2e7·PI2 - 12e3·B·SQPI·sqrt_s) / (12e5·B²)

with ``B`` the ×10 beta and ``sqrt_s`` the linearised ×1000 square root.
Dividing numerator and denominator of the real formula by the constant
scales gives exactly this; the numerator needs 64 bits.

Charge
------
A window's charge is computed in 10^-3 mA·ms (currents ×1000 times ms).
The persisted sums use 10^-4 mA·min (= 6000 raw units), which keeps a
3579 mAh battery inside a signed 32-bit word. Raw values are converted with
rounding half away from zero so that per-window quantisation does not accumulate a bias.

All divisions truncate toward zero, like C. Any intermediate outside the
signed 64-bit range, or any persisted field outside signed 32 bits, raises
:class:`NumericOverflow`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from wsnbattery.core import MS_PER_MIN, BatteryParams, CurrentProfile, ScaledConstants
from wsnbattery.workload import TraceError, as_array, idle_time

INT32_MAX = 2**31 - 1
INT32_MIN = -(2**31)
INT64_MAX = 2**63 - 1
INT64_MIN = -(2**63)

RAW_PER_UNIT = 6000            # 10^-3 mA·ms per 10^-4 mA·min
UNITS_PER_MAMIN = 10_000
METRIC_FULL = 255 * 10**5
MS_PER_SCALED_MIN = MS_PER_MIN // 1000


class NumericOverflow(ArithmeticError):
    """An integer left its declared width: a scaling bug, never a runtime condition."""


def _i64(x: int) -> int:
    if not INT64_MIN <= x <= INT64_MAX:
        raise NumericOverflow(f"64-bit overflow: {x}")
    return x


def _i32(name: str, x: int) -> int:
    if not INT32_MIN <= x <= INT32_MAX:
        raise NumericOverflow(f"persisted field {name} leaves 32 bits: {x}")
    return x


def tdiv(a: int, b: int) -> int:
    """Integer division truncating toward zero."""
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def rdiv(a: int, b: int) -> int:
    """Integer division rounding half away from zero (``b > 0``)."""
    return tdiv(a + (b // 2 if a >= 0 else -(b // 2)), b)


@dataclass(frozen=True)
class IntChargeState:
    """The six persisted words plus the window counter.

    ``sigma_u`` and ``cum_u`` are in 10^-4 mA·min; the ``t_*`` fields hold
    the previous window's state times in ms.
    """

    sigma_u: int = 0
    cum_u: int = 0
    n: int = 0
    t_cpu: int = 0
    t_lpm: int = 0
    t_tx: int = 0
    t_rx: int = 0

    @property
    def sigma_mamin(self) -> float:
        return self.sigma_u / UNITS_PER_MAMIN


def alpha_units(params: BatteryParams) -> int:
    return _i32("alpha", int(round(params.alpha * UNITS_PER_MAMIN)))


def profile_milli(profile: CurrentProfile) -> tuple[int, int, int, int]:
    return profile.milli()


def isqrt_scaled(nu_scaled: int, consts: ScaledConstants) -> int:
    """×1000 √ν by the tangent line at ``a`` (ν in ×1000 minutes)."""
    return consts.sqrt_a + tdiv((nu_scaled - consts.a) * consts.inv_2sqrt_a, 1000)


def f_scaled(nu_scaled: int, consts: ScaledConstants) -> int:
    """×1000 ``f(ν)/β²`` from integer constants only."""
    b2 = consts.beta * consts.beta
    sq = isqrt_scaled(nu_scaled, consts)
    num = _i64(_i64(600_000 * b2 * nu_scaled) + _i64(20_000_000 * consts.pi2)
               - _i64(12_000 * consts.beta * consts.sqrt_pi * sq))
    return tdiv(num, 1_200_000 * b2)


def recovery_raw(q_raw: int, nu_ms: int, delta_ms: int, consts: ScaledConstants) -> int:
    """``2 I_n A_n`` in 10^-3 mA·ms."""
    active_ms = delta_ms - nu_ms
    if active_ms <= 0:
        return 0
    nu_s = tdiv(nu_ms * 1000, MS_PER_MIN)
    A = max(f_scaled(nu_s, consts) - consts.c0, 0)
    # A_ms = A * 60 (×1000 min -> ms)
    return tdiv(_i64(2 * _i64(q_raw * A) * MS_PER_SCALED_MIN), active_ms)


def step_int(state: IntChargeState, window, current_milli: tuple[int, int, int, int],
             consts: ScaledConstants, delta_ms: int = 2000) -> IntChargeState:
    """Advance by one window of integer ms using integer arithmetic only."""
    cpu, lpm, tx, rx = (int(v) for v in window)
    if min(cpu, lpm, tx, rx) < 0:
        raise TraceError(f"negative state time in window {tuple(window)}")
    c_cpu, c_lpm, c_tx, c_rx = current_milli
    q_raw = _i64(c_cpu * cpu + c_lpm * lpm + c_tx * tx + c_rx * rx)
    nu_ms = max(lpm - (tx + rx), 0)
    r_raw = recovery_raw(q_raw, nu_ms, delta_ms, consts)
    u = state.sigma_u - state.cum_u
    u_new = tdiv(_i64(u * consts.lam), 1000) + rdiv(r_raw, RAW_PER_UNIT)
    cum = _i32("cum_u", state.cum_u + rdiv(q_raw, RAW_PER_UNIT))
    sigma = _i32("sigma_u", cum + u_new)
    return IntChargeState(sigma, cum, state.n + 1,
                          _i32("t_cpu", cpu), _i32("t_lpm", lpm), _i32("t_tx", tx), _i32("t_rx", rx))


def remaining_metric(state: IntChargeState | int, alpha_u: int) -> int:
    """Remaining energy with 255·10^5 as full, rounded down and clamped."""
    if alpha_u <= 0:
        raise ValueError("alpha_u must be > 0")
    sigma_u = state.sigma_u if isinstance(state, IntChargeState) else int(state)
    num = _i64((alpha_u - sigma_u) * METRIC_FULL)
    return min(max(num // alpha_u, 0), METRIC_FULL)


def metric_to_pct(metric) -> float:
    return metric / (255 * 10**3)


# --------------------------------------------------------------------------
# Vectorised run, bit-identical to folding step_int
# --------------------------------------------------------------------------

def _np_tdiv(a: np.ndarray, b) -> np.ndarray:
    return np.sign(a) * (np.abs(a) // b)


def _np_rdiv(a: np.ndarray, b: int) -> np.ndarray:
    return _np_tdiv(a + np.sign(a) * (b // 2), b)


def _guard(x: np.ndarray, label: str) -> None:
    if x.size and float(np.max(np.abs(x))) >= 2.0**62:
        raise NumericOverflow(f"64-bit overflow risk in {label}")


@dataclass
class IntRun:
    sigma_u: np.ndarray
    cum_u: np.ndarray
    final: IntChargeState

    def metric(self, alpha_u: int) -> np.ndarray:
        """Vectorised :func:`remaining_metric`."""
        num = (alpha_u - self.sigma_u) * METRIC_FULL
        return np.clip(num // alpha_u, 0, METRIC_FULL)


def run_int(windows, current_milli, consts: ScaledConstants, delta_ms: int = 2000,
            state: IntChargeState | None = None) -> IntRun:
    """Fold :func:`step_int` over a trace."""
    arr = as_array(windows)
    state = state or IntChargeState()
    n = len(arr)
    if n == 0:
        return IntRun(np.zeros(0, np.int64), np.zeros(0, np.int64), state)
    if (arr < 0).any():
        raise TraceError("negative state time in trace")
    cm = np.asarray(current_milli, dtype=np.int64)
    _guard(arr.astype(float) @ cm.astype(float), "window charge")
    q_raw = arr @ cm
    nu_ms = idle_time(arr)
    active = delta_ms - nu_ms
    nu_s = _np_tdiv(nu_ms * 1000, MS_PER_MIN)
    b2 = consts.beta * consts.beta
    sq = consts.sqrt_a + _np_tdiv((nu_s - consts.a) * consts.inv_2sqrt_a, 1000)
    num = 600_000 * b2 * nu_s + 20_000_000 * consts.pi2 - 12_000 * consts.beta * consts.sqrt_pi * sq
    _guard(num.astype(float), "recovery numerator")
    f = _np_tdiv(num, 1_200_000 * b2)
    A = np.maximum(f - consts.c0, 0)
    prod = 2 * q_raw.astype(float) * A * MS_PER_SCALED_MIN
    _guard(prod, "recovery product")
    r_raw = np.where(active > 0, _np_tdiv(2 * q_raw * A * MS_PER_SCALED_MIN, np.maximum(active, 1)), 0)
    r_u = _np_rdiv(r_raw, RAW_PER_UNIT).tolist()
    cum = state.cum_u + np.cumsum(_np_rdiv(q_raw, RAW_PER_UNIT))

    lam = consts.lam
    u = state.sigma_u - state.cum_u
    us = [0] * n
    for j in range(n):
        v = u * lam
        u = (v // 1000 if v >= 0 else -((-v) // 1000)) + r_u[j]
        us[j] = u
    sigma = cum + np.asarray(us, dtype=np.int64)
    for name, vals in (("cum_u", cum), ("sigma_u", sigma)):
        if vals.max() > INT32_MAX or vals.min() < INT32_MIN:
            raise NumericOverflow(f"persisted field {name} leaves 32 bits")
    last = arr[-1].tolist()
    final = IntChargeState(int(sigma[-1]), int(cum[-1]), state.n + n, *last)
    return IntRun(sigma, cum, final)
