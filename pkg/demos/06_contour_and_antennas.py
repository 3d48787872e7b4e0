"""Bandwidth x power grid, then the effect of a larger array."""

import numpy as np

from iabsim import ScenarioConfig, SweepSpec, run_sweep, summarize
from iabsim.experiments import mean_curve

spec = SweepSpec(variable="bandwidth_hz", values=tuple(np.linspace(300e6, 800e6, 6)),
                 variable2="power_dbw", values2=tuple(np.linspace(-15, 0, 6)), trials=10)
summary = summarize(run_sweep(spec))
grid = {(r["sweep_value"], r["sweep_value2"], r["method"]): r["rate_mean"] / 1e9 for r in summary}

print("IAB sum-rate [Gbit/s]; rows bandwidth, columns power")
print("        " + "".join(f"{p:8.0f}" for p in spec.values2))
for w in spec.values:
    print(f"{w / 1e6:6.0f}  " + "".join(f"{grid[w, p, 'closed-form']:8.2f}" for p in spec.values2))
gain = [grid[w, p, "closed-form"] - grid[w, p, "fixed"] for w in spec.values for p in spec.values2]
print("smallest IAB gain over the fixed split:", round(min(gain), 3), "Gbit/s")

# %% antennas at 0 dBW
ants = SweepSpec(variable="num_antennas", values=(16, 36, 64, 100), trials=20,
                 config=ScenarioConfig().with_power_dbw(0.0))
s = summarize(run_sweep(ants))
for m in ("closed-form", "fixed"):
    n, y = mean_curve(s, m)
    print(m, {int(k): round(float(v) / 1e9, 2) for k, v in zip(n, y)})
