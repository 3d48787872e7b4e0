"""Split a zero-forcing precoder into phase shifters and a small digital stage."""

import numpy as np

from iabsim import ScenarioConfig, allocate_powers, build_channels, hybrid_decompose, place_users, zero_forcing
from iabsim.beamforming import scale_to_power

config = ScenarioConfig()
channels = build_channels(place_users(config, np.random.default_rng(3)), config)
F_zf = zero_forcing(channels.H_a)
print("||H F_zf - I|| =", np.linalg.norm(channels.H_a @ F_zf - np.eye(4)))

# %% SVD start versus random phases, run to 200 iterations without the stall test
for init in ("svd", "random"):
    hp = hybrid_decompose(F_zf, config.rf_chains("aerial"), init=init, improvement_tol=None,
                          rng=np.random.default_rng(0))
    print(f"{init:6s} start residual {hp.residual_trace[0]:.3f}, "
          f"reaches 0.1 after {hp.iterations_to(0.1)} iterations, final {hp.residual:.3f}")

# %% the analog stage only changes phases
print("max | |F_RF| - 1 | =", np.abs(np.abs(hp.F_RF) - 1).max())

# %% each stream gets its share of the UAV budget
p_a, _, p_b = allocate_powers(config)
F = scale_to_power(hp.F_RF, hp.F_BB, p_a)
print("per-link powers", p_a.per_link_powers.round(4), "-> column powers",
      (np.abs(F) ** 2).sum(axis=0).round(4), "backhaul share", round(p_b, 4))
