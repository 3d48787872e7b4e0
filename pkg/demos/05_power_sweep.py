"""Sum-rate, energy efficiency and aerial share versus UAV transmit power."""

import numpy as np

from iabsim import SweepSpec, run_sweep, summarize
from iabsim.experiments import mean_curve

spec = SweepSpec(variable="power_dbw", values=tuple(np.linspace(-15, 5, 11)), trials=30,
                 methods=("closed-form", "sca", "fixed"))
summary = summarize(run_sweep(spec))

print(" P[dBW]  IAB[Gb/s]  SCA[Gb/s]  fixed[Gb/s]  EE_IAB[Gb/J]  mu_a")
x, iab = mean_curve(summary, "closed-form")
_, sca = mean_curve(summary, "sca")
_, fixed = mean_curve(summary, "fixed")
_, ee = mean_curve(summary, "closed-form", "ee_mean")
_, mu = mean_curve(summary, "closed-form", "mu_a_mean")
for row in zip(x, iab / 1e9, sca / 1e9, fixed / 1e9, ee / 1e9, mu):
    print("%7.1f %10.3f %10.3f %12.3f %13.3f %6.3f" % row)
print("EE peaks at", x[ee.argmax()], "dBW")
