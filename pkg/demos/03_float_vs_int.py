# Floating point and integer estimators side by side on a long steady trace.
import numpy as np

from wsnbattery import PROFILES, BatteryParams, precompute
from wsnbattery.estimator import run_float
from wsnbattery.fixedpoint import METRIC_FULL, alpha_units, run_int
from wsnbattery.runs import drift_slope
from wsnbattery.workload import generate_rdc

params = BatteryParams.from_mah(880)
derived = precompute(params)
sky = PROFILES["sky"]

w = generate_rdc("contikimac", 1.0, duration=100_000 / 30, seed=0)   # 10^5 windows
f = run_float(w, sky, params, derived).metric(params)
i = run_int(w, sky.milli(), derived.scaled).metric(alpha_units(params))
d = f - i

# integers read a little lower and the gap stays put
print("mean gap", d.mean(), "of", METRIC_FULL)
print("gap as % full scale", 100 * np.abs(d).max() / METRIC_FULL)
print("drift per 1e5 windows", drift_slope(d) * 1e5)
for n in (1_000, 10_000, 50_000, 99_999):
    print(n, d[n])
