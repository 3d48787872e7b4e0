"""Choose how much of the band the aerial tier gets, four ways."""

from iabsim import ScenarioConfig, closed_form_allocation, fixed_split, ga_allocate, run_drop
from iabsim.allocation import grid_search_mu

config = ScenarioConfig()
drop = run_drop(config, seed=0, trial=0, methods=("closed-form", "ga", "fixed"))
r = drop.report
print(f"aerial-user SE {r.sum_se_aerial_users:.2f}, backhaul SE {r.se_backhaul:.2f}, "
      f"terrestrial SE {r.sum_se_terrestrial:.2f} bit/s/Hz")

# %% every method on the same drop
for name, a in drop.allocations.items():
    print(f"{name:12s} mu_a={a.mu_a:.4f}  rate={a.total_rate_bps / 1e9:.3f} Gbit/s  "
          f"backhaul slack={a.backhaul_slack / 1e6:+.1f} Mbit/s")

# %% brute force agrees with the closed form
mu_grid, best = grid_search_mu(r, config.bandwidth_hz)
print("grid argmax", mu_grid, "rate", best / 1e9)

# %% a tighter static split only gets worse
for mu in (0.3, 0.5, 0.7, 0.9):
    print(mu, round(fixed_split(mu, r, config.bandwidth_hz).total_rate_bps / 1e9, 3))
