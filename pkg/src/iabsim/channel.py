"""Line-of-sight mmWave channels for the aerial and terrestrial tiers.

Each link is a single deterministic LoS ray: the channel row of link ``k`` is
``sqrt(gamma0 / d_k**n) * a(theta_k, phi_k)`` with ``a`` the UPA steering
vector. Arrays face straight down, so ``theta`` is measured from the vertical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import DegenerateLinkError
from .scenario import Geometry, ScenarioConfig, link_distance


def reference_path_loss_db(carrier_frequency_ghz: float) -> float:
    """Free-space gain at 1 m, ``-20 log10(f_GHz) - 32.45`` dB."""
    if carrier_frequency_ghz <= 0:
        raise ValueError("carrier frequency must be positive")
    return -20.0 * math.log10(carrier_frequency_ghz) - 32.45


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def departure_angles(tx, rx) -> Tuple[float, float]:
    """Angles of departure ``(theta, phi)`` from ``tx`` towards ``rx``.

    ``phi = atan2(dy, dx)`` is the azimuth and ``theta = arccos(|dz| / d)`` the
    angle off the downward boresight. ``phi`` is 0 for purely vertical links.
    """
    delta = np.asarray(rx, dtype=float) - np.asarray(tx, dtype=float)
    dist = float(np.linalg.norm(delta))
    if dist == 0.0:
        raise DegenerateLinkError(f"transmitter and receiver coincide at {tuple(np.asarray(tx))}")
    dx, dy, dz = delta
    phi = math.atan2(dy, dx) if (dx != 0.0 or dy != 0.0) else 0.0
    theta = math.acos(min(1.0, abs(dz) / dist))
    return theta, phi


@dataclass(frozen=True)
class SteeringVector:
    elements: np.ndarray
    theta_rad: float
    phi_rad: float


def steering_phases(theta_rad, phi_rad, n_x: int, n_y: int, spacing: float = 1.0) -> np.ndarray:
    """Per-element phases, flattened row-major with the ``n_y`` index fastest."""
    ix, iy = np.meshgrid(np.arange(n_x), np.arange(n_y), indexing="ij")
    proj = ix.ravel() * math.cos(phi_rad) + iy.ravel() * math.sin(phi_rad)
    # 2*pi/lambda * (r*lambda/2) = pi*r
    return math.pi * spacing * math.sin(theta_rad) * proj


def steering_vector(theta_rad: float, phi_rad: float, n_x: int, n_y: int,
                    spacing: float = 1.0) -> SteeringVector:
    """UPA response ``exp(j*pi*r*sin(theta)*((n_x-1)cos(phi) + (n_y-1)sin(phi)))``.

    Args:
        theta_rad: angle off boresight.
        phi_rad: azimuth.
        n_x, n_y: array dimensions.
        spacing: element spacing in half-wavelengths.
    """
    if n_x < 1 or n_y < 1:
        raise ValueError("array dimensions must be positive")
    phases = steering_phases(theta_rad, phi_rad, n_x, n_y, spacing)
    return SteeringVector(np.exp(1j * phases), float(theta_rad), float(phi_rad))


@dataclass(frozen=True)
class ChannelSet:
    """Channel matrices of both tiers for one drop.

    ``H_a`` is ``J x N``: rows are the donor's links to the aerial UEs and,
    at ``backhaul_row_index``, to the IAB-node. ``H_t`` is ``I x N`` for the
    node's links to terrestrial UEs.
    """

    H_a: np.ndarray = field(repr=False)
    H_t: np.ndarray = field(repr=False)
    backhaul_row_index: int
    distances_a: np.ndarray = field(repr=False)
    distances_t: np.ndarray = field(repr=False)
    gains_a: np.ndarray = field(repr=False)
    gains_t: np.ndarray = field(repr=False)

    @property
    def aerial_user_rows(self) -> np.ndarray:
        return np.array([j for j in range(self.H_a.shape[0]) if j != self.backhaul_row_index])

    def to_dict(self) -> dict:
        def cplx(m):
            return np.stack([m.real, m.imag], axis=-1).tolist()

        return {
            "H_a": cplx(self.H_a),
            "H_t": cplx(self.H_t),
            "backhaul_row_index": int(self.backhaul_row_index),
            "distances_a": self.distances_a.tolist(),
            "distances_t": self.distances_t.tolist(),
            "gains_a": self.gains_a.tolist(),
            "gains_t": self.gains_t.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelSet":
        def cplx(v):
            a = np.asarray(v, dtype=float)
            return a[..., 0] + 1j * a[..., 1]

        return cls(
            H_a=cplx(d["H_a"]),
            H_t=cplx(d["H_t"]),
            backhaul_row_index=int(d["backhaul_row_index"]),
            distances_a=np.asarray(d["distances_a"], dtype=float),
            distances_t=np.asarray(d["distances_t"], dtype=float),
            gains_a=np.asarray(d["gains_a"], dtype=float),
            gains_t=np.asarray(d["gains_t"], dtype=float),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ChannelSet":
        return cls.from_dict(json.loads(text))


def channel_row(tx, rx, config: ScenarioConfig) -> Tuple[np.ndarray, float, float]:
    """Return ``(h, distance, linear_gain)`` for one LoS link."""
    d = link_distance(tx, rx)
    theta, phi = departure_angles(tx, rx)
    n_x, n_y = config.antenna_dims
    a = steering_vector(theta, phi, n_x, n_y, config.element_spacing_half_wavelengths).elements
    gain = float(db_to_linear(reference_path_loss_db(config.carrier_frequency_ghz))) / d ** config.path_loss_exponent
    return math.sqrt(gain) * a, d, gain


def build_channels(geometry: Geometry, config: ScenarioConfig) -> ChannelSet:
    """Build both tiers' channel matrices; the backhaul is the last aerial row."""
    donor, node = geometry.donor_position, geometry.node_position
    aerial_rx = list(geometry.aerial_ue_positions) + [node]
    rows_a = [channel_row(donor, rx, config) for rx in aerial_rx]
    rows_t = [channel_row(node, rx, config) for rx in geometry.terrestrial_ue_positions]

    def stack(rows):
        H = np.array([r[0] for r in rows])
        H.setflags(write=False)
        return H, np.array([r[1] for r in rows]), np.array([r[2] for r in rows])

    H_a, d_a, g_a = stack(rows_a)
    H_t, d_t, g_t = stack(rows_t)
    return ChannelSet(H_a=H_a, H_t=H_t, backhaul_row_index=len(rows_a) - 1,
                      distances_a=d_a, distances_t=d_t, gains_a=g_a, gains_t=g_t)
