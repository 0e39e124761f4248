# Burst then idle: the diffusion estimators give charge back, the linear sum does not.
import numpy as np

from wsnbattery import PROFILES, BatteryParams, precompute
from wsnbattery.estimator import run_float, run_linear
from wsnbattery.fixedpoint import alpha_units, run_int
from wsnbattery.workload import build_scenario, named_scenario

params = BatteryParams.from_mah(880)
derived = precompute(params)
sky = PROFILES["sky"]

w = build_scenario(named_scenario("burst-idle"))   # 1 min boot, 2 min sleeping
fl = run_float(w, sky, params, derived)
it = run_int(w, sky.milli(), derived.scaled)
lin = run_linear(w, sky, params)

unavailable = fl.sigma - fl.cum_load
print("unavailable at end of burst  ", unavailable[29], "mA·min")
print("unavailable after 2 min idle ", unavailable[-1], "mA·min")

rem_f = fl.remaining(params)
rem_l = lin.remaining(params)
print("float gain during idle ", rem_f[-1] - rem_f[29])
print("linear gain during idle", rem_l[-1] - rem_l[29])
print("int metric: end of burst", it.metric(alpha_units(params))[29],
      "end of idle", it.metric(alpha_units(params))[-1])

# the recovered part decays geometrically by lam per window
print(np.round(unavailable[30:36] / unavailable[29:35], 4), derived.lam)
