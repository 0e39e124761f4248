"""Battery lifetime estimation for wireless sensor node workloads.

Three fidelity tiers of the diffusion battery model are provided:

* :mod:`wsnbattery.oracle` -- high-truncation analytical evaluation,
* :mod:`wsnbattery.estimator` -- the floating-point windowed recursion,
* :mod:`wsnbattery.fixedpoint` -- the integer-only, MCU-style recursion.

Duty-cycle workloads come from :mod:`wsnbattery.workload` and lifetimes are
extrapolated with :mod:`wsnbattery.projection`.
"""

from wsnbattery.core import (
    PROFILES,
    BatteryParams,
    CurrentProfile,
    DerivedParams,
    ScaledConstants,
    precompute,
    to_scaled,
)
from wsnbattery.estimator import ChargeState, f_over_beta2, remaining_charge, step
from wsnbattery.fixedpoint import IntChargeState, isqrt_scaled, remaining_metric, step_int
from wsnbattery.oracle import PiecewiseLoad, exact_A, exact_lifetime, exact_sigma
from wsnbattery.projection import EnergySample, LineFit, fit_line, project_zero
from wsnbattery.workload import (
    DutyWindow,
    Phase,
    Scenario,
    build_scenario,
    generate_rdc,
    idle_time,
    parse_trace,
    window_charge,
)

__version__ = "0.1.0"

__all__ = [
    "PROFILES",
    "BatteryParams",
    "ChargeState",
    "CurrentProfile",
    "DerivedParams",
    "DutyWindow",
    "EnergySample",
    "IntChargeState",
    "LineFit",
    "Phase",
    "PiecewiseLoad",
    "ScaledConstants",
    "Scenario",
    "build_scenario",
    "exact_A",
    "exact_lifetime",
    "exact_sigma",
    "f_over_beta2",
    "fit_line",
    "generate_rdc",
    "idle_time",
    "isqrt_scaled",
    "parse_trace",
    "precompute",
    "project_zero",
    "remaining_charge",
    "remaining_metric",
    "step",
    "step_int",
    "to_scaled",
    "window_charge",
]
