# Offline constants for the mote: real values and their integer twins.
import numpy as np

from wsnbattery import BatteryParams, precompute
from wsnbattery.core import SCALES, series_c0

params = BatteryParams.from_mah(880)       # beta = 1, delta = 2 s, alpha in mA·min
derived = precompute(params)               # idle fraction 0.9 of a window

for key, scaled in zip(SCALES, derived.scaled.as_tuple()):
    print(f"{key:12s} {derived.reals()[key]:10.6f} -> {scaled}")

# the c0 series settles after a handful of terms
for m in (1, 2, 5, 10, 100, 10_000):
    print(m, series_c0(params.beta, params.delta, m))

# lam is one step of decay of the slowest diffusion mode
print("lam", derived.lam, np.exp(-params.beta ** 2 * params.delta))
