# Lifetime projections from six simulated hours, by MAC layer and by traffic.
from wsnbattery import PROFILES, BatteryParams, precompute
from wsnbattery.estimator import run_float
from wsnbattery.projection import project_lifetime
from wsnbattery.workload import RDC_KINDS, average_current, generate_rdc, radio_duty

params = BatteryParams.from_mah(880)
derived = precompute(params)
sky = PROFILES["sky"]


def days(kind, rate):
    w = generate_rdc(kind, rate, "sender", 6 * 60, seed=0)
    run = run_float(w, sky, params, derived)
    fit, t0 = project_lifetime(run.t, run.remaining(params) / params.alpha * 100)
    return t0 / 1440, w


for kind in RDC_KINDS:
    d, w = days(kind, 1.0)
    print(f"{kind:11s} {d:8.2f} days  {average_current(w, sky):7.3f} mA  radio {radio_duty(w):.2%}")

# more packets, shorter life
for rate in (60, 20, 12, 2, 1):
    print(rate, "pkt/min", round(days("contikimac", rate)[0], 1), "days")

# the radio-always-on MAC sits right at capacity / current
print("880 mAh / 20 mA =", 880 / 20, "h;", round(days("sicslowmac", 1.0)[0] * 24, 2), "h projected")
