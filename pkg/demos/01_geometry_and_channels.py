"""Drop users into the service area and look at the LoS channels they see."""

import numpy as np

from iabsim import ScenarioConfig, build_channels, place_users, steering_vector
from iabsim.channel import reference_path_loss_db

config = ScenarioConfig()
print("carrier %.0f GHz, reference gain %.2f dB, %d x %d UPA" % (
    config.carrier_frequency_ghz, reference_path_loss_db(config.carrier_frequency_ghz), *config.antenna_dims))

# %% one drop
geometry = place_users(config, np.random.default_rng(7))
print("donor", geometry.donor_position, "node", geometry.node_position)
print("aerial UEs\n", geometry.aerial_ue_positions.round(1))
print("terrestrial UEs\n", geometry.terrestrial_ue_positions.round(1))

# %% channels: the backhaul is the last aerial row
channels = build_channels(geometry, config)
print("H_a", channels.H_a.shape, "H_t", channels.H_t.shape, "backhaul row", channels.backhaul_row_index)
for name, d, g in (("aerial", channels.distances_a, channels.gains_a),
                   ("terrestrial", channels.distances_t, channels.gains_t)):
    print(f"{name:12s} distance {np.round(d, 1)} m, path gain {np.round(10 * np.log10(g), 1)} dB")

# %% steering vectors: a broadside beam is flat, an endfire one alternates sign
print(steering_vector(0.0, 0.0, 2, 2).elements)
print(steering_vector(np.pi / 2, 0.0, 2, 1).elements.round(12))

# %% channels serialise to JSON for fixtures
print(channels.to_json()[:120], "...")
