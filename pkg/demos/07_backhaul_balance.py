"""Where the optimal split lands relative to the backhaul bottleneck."""

from iabsim import ScenarioConfig, backhaul_balance_report, run_drop

for trial in range(6):
    drop = run_drop(ScenarioConfig(), seed=0, trial=trial)
    for method in ("closed-form", "fixed"):
        b = backhaul_balance_report(drop, method)
        print(f"trial {trial} {method:11s} mu_a={b['mu_a']:.3f}  R={b['R'] / 1e9:5.2f}  "
              f"R_bh={b['R_bh'] / 1e9:5.2f}  R_t={b['R_t'] / 1e9:5.2f}  R_a={b['R_a'] / 1e9:5.2f} Gbit/s")
# With aerial users less efficient than terrestrial ones the backhaul and
# terrestrial bars match; otherwise the whole band goes to the aerial tier.
