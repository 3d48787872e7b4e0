import numpy as np
import pytest

from iabsim.beamforming import allocate_powers, design_precoder
from iabsim.channel import build_channels
from iabsim.experiments import substream
from iabsim.rates import LinkBudget, RateParams
from iabsim.scenario import ScenarioConfig, place_users


def make_channels(seed, config=None):
    config = config or ScenarioConfig()
    geometry = place_users(config, substream(seed, "placement", 0))
    return build_channels(geometry, config)


def make_budget(seed, config=None, mode="hybrid"):
    config = config or ScenarioConfig()
    ch = make_channels(seed, config)
    p_a, p_t, _ = allocate_powers(config)
    F_a, _ = design_precoder(ch.H_a, p_a, config.rf_chains("aerial"), mode)
    F_t, _ = design_precoder(ch.H_t, p_t, config.rf_chains("terrestrial"), mode)
    return LinkBudget.from_precoders(ch, F_a, F_t)


def make_report(seed, config=None):
    config = config or ScenarioConfig()
    return make_budget(seed, config).report(RateParams.from_config(config))


@pytest.fixture
def table_config():
    return ScenarioConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
