"""Scenario configuration, node geometry and random user drops.

Coordinates are metres in a square service area ``[0, area_side_m]^2``; ``z`` is
altitude. The IAB-donor and IAB-node hover above the area centre by default,
aerial UEs share one altitude and terrestrial UEs sit on the ground.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Tuple

import numpy as np

from .errors import ConfigError, PlacementError

MAX_PLACEMENT_ATTEMPTS = 10_000


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical and system parameters of one IAB-assisted UAV network.

    Defaults reproduce the simulation table of the reference scenario (28 GHz,
    500 MHz, 8x8 UPA, J=4 aerial links including the backhaul, I=3
    terrestrial links). Transmit powers default to 0 dBW at both UAVs.

    ``num_rf_chains=None`` gives each tier as many RF chains as it has links;
    an integer applies the same count to both tiers.
    """

    carrier_frequency_ghz: float = 28.0
    bandwidth_hz: float = 500e6
    donor_height_m: float = 150.0
    node_height_m: float = 70.0
    aerial_ue_height_m: float = 100.0
    num_aerial_links: int = 4
    num_terrestrial_links: int = 3
    donor_power_w: float = 1.0
    node_power_w: float = 1.0
    noise_psd_w_per_hz: float = 1e-20  # -170 dBm/Hz
    path_loss_exponent: float = 2.0
    antenna_dims: Tuple[int, int] = (8, 8)
    num_rf_chains: Optional[int] = None
    element_spacing_half_wavelengths: float = 1.0
    area_side_m: float = 1500.0
    min_ue_separation_m: float = 10.0
    rng_seed: int = 0
    # Placement knobs. sigma=None means area_side_m / 6.
    placement_sigma_m: Optional[float] = None
    node_offset_m: Tuple[float, float] = (0.0, 0.0)
    aerial_region_offset_m: Tuple[float, float] = (0.0, 0.0)
    terrestrial_region_offset_m: Tuple[float, float] = (0.0, 0.0)
    # None means the per-terrestrial-link share P2 / I.
    backhaul_power_w: Optional[float] = None
    rf_chain_power_w: float = 0.25
    phase_shifter_power_w: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "antenna_dims", tuple(int(v) for v in self.antenna_dims))
        for name in ("node_offset_m", "aerial_region_offset_m", "terrestrial_region_offset_m"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        self.validate()

    @property
    def num_antennas(self) -> int:
        return self.antenna_dims[0] * self.antenna_dims[1]

    @property
    def num_aerial_users(self) -> int:
        return self.num_aerial_links - 1

    @property
    def sigma_m(self) -> float:
        if self.placement_sigma_m is None:
            return self.area_side_m / 6.0
        return self.placement_sigma_m

    def rf_chains(self, tier: str) -> int:
        """RF chain count for ``tier`` ('aerial' or 'terrestrial')."""
        if self.num_rf_chains is not None:
            return self.num_rf_chains
        if tier == "aerial":
            return self.num_aerial_links
        if tier == "terrestrial":
            return self.num_terrestrial_links
        raise ValueError(f"unknown tier {tier!r}")

    def validate(self) -> None:
        if self.num_aerial_links < 2:
            raise ConfigError("need at least one aerial user plus the backhaul (J >= 2)",
                              field="num_aerial_links")
        if self.num_terrestrial_links < 1:
            raise ConfigError("need at least one terrestrial link (I >= 1)",
                              field="num_terrestrial_links")
        if len(self.antenna_dims) != 2 or min(self.antenna_dims) < 1:
            raise ConfigError("antenna_dims must be two positive integers", field="antenna_dims")
        if self.num_antennas < max(self.num_aerial_links, self.num_terrestrial_links):
            raise ConfigError("N = N_x * N_y must be at least max(J, I)", field="antenna_dims")
        if self.num_rf_chains is not None and self.num_rf_chains < 1:
            raise ConfigError("num_rf_chains must be positive", field="num_rf_chains")
        for name in ("donor_power_w", "node_power_w", "bandwidth_hz", "carrier_frequency_ghz",
                     "noise_psd_w_per_hz", "area_side_m", "element_spacing_half_wavelengths",
                     "rf_chain_power_w", "phase_shifter_power_w"):
            if not getattr(self, name) > 0:
                raise ConfigError("must be positive", field=name)
        if not 2.0 <= self.path_loss_exponent <= 4.0:
            raise ConfigError("path loss exponent must lie in [2, 4]", field="path_loss_exponent")
        if self.min_ue_separation_m < 0:
            raise ConfigError("must be non-negative", field="min_ue_separation_m")
        if self.placement_sigma_m is not None and self.placement_sigma_m <= 0:
            raise ConfigError("must be positive", field="placement_sigma_m")
        if self.backhaul_power_w is not None and self.backhaul_power_w <= 0:
            raise ConfigError("must be positive", field="backhaul_power_w")

    def with_power_dbw(self, power_dbw: float) -> "ScenarioConfig":
        """Copy with both UAV power budgets set to ``power_dbw``."""
        p = 10.0 ** (power_dbw / 10.0)
        return replace(self, donor_power_w=p, node_power_w=p)

    def replace(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Geometry:
    """Positions of both UAVs and all UEs for one drop, as read-only arrays."""

    donor_position: np.ndarray
    node_position: np.ndarray
    aerial_ue_positions: np.ndarray = field(repr=False)
    terrestrial_ue_positions: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "donor_position", _frozen(self.donor_position))
        object.__setattr__(self, "node_position", _frozen(self.node_position))
        object.__setattr__(self, "aerial_ue_positions",
                           _frozen(self.aerial_ue_positions).reshape(-1, 3))
        object.__setattr__(self, "terrestrial_ue_positions",
                           _frozen(self.terrestrial_ue_positions).reshape(-1, 3))

    @property
    def ue_positions(self) -> np.ndarray:
        return np.vstack([self.aerial_ue_positions, self.terrestrial_ue_positions])


def link_distance(p, q) -> float:
    """Euclidean distance in metres between two 3-D points."""
    d = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    return float(math.sqrt(float(np.dot(d, d))))


def node_positions(config: ScenarioConfig) -> Tuple[np.ndarray, np.ndarray]:
    c = config.area_side_m / 2.0
    donor = np.array([c, c, config.donor_height_m])
    dx, dy = config.node_offset_m
    node = np.array([c + dx, c + dy, config.node_height_m])
    return donor, node


def place_users(config: ScenarioConfig, rng: Optional[np.random.Generator] = None) -> Geometry:
    """Draw one random user drop.

    UE ground coordinates are Gaussian around their tier's sub-region centre
    (the donor's ground projection for aerial UEs, the node's for terrestrial
    UEs, each shifted by the configured offset) and truncated to the square
    area by resampling. Every pair of UEs keeps ``min_ue_separation_m``.

    Raises:
        PlacementError: if ``MAX_PLACEMENT_ATTEMPTS`` draws are not enough.
    """
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    donor, node = node_positions(config)
    side = config.area_side_m
    sigma = config.sigma_m
    min_sep = config.min_ue_separation_m

    tiers = [
        (config.num_aerial_users, donor[:2] + config.aerial_region_offset_m, config.aerial_ue_height_m),
        (config.num_terrestrial_links, node[:2] + config.terrestrial_region_offset_m, 0.0),
    ]
    placed = []
    attempts = 0
    for count, centre, height in tiers:
        n_done = 0
        while n_done < count:
            if attempts >= MAX_PLACEMENT_ATTEMPTS:
                raise PlacementError(
                    f"could not place {config.num_aerial_users + config.num_terrestrial_links} UEs "
                    f"with separation {min_sep} m in a {side} m square after {attempts} draws")
            attempts += 1
            xy = rng.normal(centre, sigma)
            if np.any(xy < 0.0) or np.any(xy > side):
                continue
            p = np.array([xy[0], xy[1], height])
            if placed and min(link_distance(p, q) for q in placed) < min_sep:
                continue
            placed.append(p)
            n_done += 1

    n_aerial = config.num_aerial_users
    return Geometry(
        donor_position=donor,
        node_position=node,
        aerial_ue_positions=np.array(placed[:n_aerial]).reshape(-1, 3),
        terrestrial_ue_positions=np.array(placed[n_aerial:]).reshape(-1, 3),
    )
