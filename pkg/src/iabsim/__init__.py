"""IAB-assisted UAV network simulator."""

__version__ = "0.1.0"

from .allocation import (AllocationResult, BandwidthRates, closed_form_allocation, closed_form_mu,
                         fixed_split, ga_allocate, ga_maximize, sca_allocate)
from .beamforming import (HybridPrecoder, PowerAllocation, allocate_powers, design_precoder,
                          hybrid_decompose, scale_to_power, zero_forcing)
from .channel import ChannelSet, build_channels, steering_vector
from .configfile import load_config, parse_config
from .errors import IABSimError
from .experiments import (EnergyModel, SolverSettings, SweepSpec, backhaul_balance_report,
                          energy_efficiency, run_drop, run_sweep, summarize)
from .rates import LinkBudget, RateParams, RateReport, network_sum_rate
from .scenario import Geometry, ScenarioConfig, place_users
