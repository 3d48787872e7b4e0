"""Spectral efficiencies, tier sums and the backhaul-limited network sum-rate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .channel import ChannelSet
from .scenario import ScenarioConfig

FIXED_NOISE = "fixed"
BANDWIDTH_NOISE = "bandwidth"


@dataclass(frozen=True)
class RateParams:
    """Noise model for both tiers.

    In ``"fixed"`` mode each tier sees the constant noise power given here.
    In ``"bandwidth"`` mode the noise follows the occupied bandwidth,
    ``mu * bandwidth_hz * noise_psd`` with ``mu`` the tier's share.
    """

    noise_power_aerial: float
    noise_power_terrestrial: float
    mode: str = FIXED_NOISE
    bandwidth_hz: float = 500e6
    noise_psd: float = 1e-20

    def __post_init__(self):
        if self.mode not in (FIXED_NOISE, BANDWIDTH_NOISE):
            raise ValueError(f"unknown noise mode {self.mode!r}")
        if self.mode == FIXED_NOISE and (self.noise_power_aerial <= 0 or self.noise_power_terrestrial <= 0):
            raise ValueError("fixed noise powers must be positive")

    @classmethod
    def from_config(cls, config: ScenarioConfig, mode: str = FIXED_NOISE) -> "RateParams":
        # fixed mode: full-band noise on both tiers
        full = config.noise_psd_w_per_hz * config.bandwidth_hz
        return cls(full, full, mode, config.bandwidth_hz, config.noise_psd_w_per_hz)

    def noise(self, mu_a: Optional[float] = None) -> Tuple[float, float]:
        """``(sigma_a^2, sigma_t^2)`` in watts for aerial share ``mu_a``."""
        if self.mode == FIXED_NOISE:
            return self.noise_power_aerial, self.noise_power_terrestrial
        if mu_a is None:
            raise ValueError("bandwidth-dependent noise needs mu_a")
        unit = self.bandwidth_hz * self.noise_psd
        return mu_a * unit, (1.0 - mu_a) * unit


def link_se(h: np.ndarray, F_RF: np.ndarray, F_BB: np.ndarray, powers, link_index: int,
            noise: float) -> float:
    """SE of one link, ``log2(1 + p_j|h F_RF f_j|^2 / (sum_k!=j p_k|h F_RF f_k|^2 + noise))``.

    ``h`` is the link's row of the channel matrix, so the received amplitude
    of stream ``k`` is ``h @ F_RF @ F_BB[:, k]``.
    """
    if noise <= 0:
        raise ValueError("noise power must be positive")
    p = np.asarray(getattr(powers, "per_link_powers", powers), dtype=float)
    amp = np.asarray(h) @ np.asarray(F_RF) @ np.asarray(F_BB)
    rx = p * np.abs(amp) ** 2
    signal = rx[link_index]
    interference = rx.sum() - signal
    return math.log2(1.0 + signal / (interference + noise))


def received_powers(H: np.ndarray, F: np.ndarray) -> np.ndarray:
    """``|H F|^2``: entry ``[j, k]`` is the power of stream ``k`` at receiver ``j``."""
    return np.abs(np.asarray(H) @ np.asarray(F)) ** 2


@dataclass(frozen=True)
class LinkBudget:
    """Signal and interference power per link for fixed precoders.

    ``signal[k] = |g_k|^2`` and ``interference[k]`` is the intra-tier
    interference, both in watts. Everything noise-related is applied later so
    one budget serves every bandwidth split and noise model.
    """

    signal_a: np.ndarray
    interference_a: np.ndarray
    signal_t: np.ndarray
    interference_t: np.ndarray
    backhaul_row_index: int
    distances_a: Optional[np.ndarray] = field(default=None, repr=False)
    distances_t: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def from_precoders(cls, channels: ChannelSet, F_a: np.ndarray, F_t: np.ndarray) -> "LinkBudget":
        def split(H, F):
            G = received_powers(H, F)
            sig = np.diag(G).copy()
            return sig, G.sum(axis=1) - sig

        s_a, i_a = split(channels.H_a, F_a)
        s_t, i_t = split(channels.H_t, F_t)
        return cls(s_a, i_a, s_t, i_t, channels.backhaul_row_index,
                   channels.distances_a, channels.distances_t)

    @property
    def user_rows(self) -> np.ndarray:
        return np.array([j for j in range(self.signal_a.size) if j != self.backhaul_row_index])

    def se_aerial(self, noise: float) -> np.ndarray:
        """SE of every aerial row (users and backhaul) for noise power ``noise``."""
        return np.log2(1.0 + self.signal_a / (self.interference_a + noise))

    def se_terrestrial(self, noise: float) -> np.ndarray:
        return np.log2(1.0 + self.signal_t / (self.interference_t + noise))

    def report(self, params: RateParams, mu_a: Optional[float] = None) -> "RateReport":
        noise_a, noise_t = params.noise(mu_a)
        se_a = self.se_aerial(noise_a)
        se_t = self.se_terrestrial(noise_t)
        users = self.user_rows
        return RateReport(
            se_aerial=se_a[users],
            se_backhaul=float(se_a[self.backhaul_row_index]),
            se_terrestrial=se_t,
            signal_aerial=self.signal_a, interference_aerial=self.interference_a, noise_aerial=noise_a,
            signal_terrestrial=self.signal_t, interference_terrestrial=self.interference_t,
            noise_terrestrial=noise_t, backhaul_row_index=self.backhaul_row_index,
            distances_aerial=self.distances_a, distances_terrestrial=self.distances_t,
        )


@dataclass(frozen=True)
class RateReport:
    """Per-link SEs (bit/s/Hz) of one drop plus their power breakdown.

    ``sum_se_aerial`` adds every aerial row including the backhaul, while
    ``sum_se_aerial_users`` leaves the backhaul out; both are kept because the
    objective uses the latter and the tier SE the former.
    """

    se_aerial: np.ndarray
    se_backhaul: float
    se_terrestrial: np.ndarray
    signal_aerial: np.ndarray = field(repr=False)
    interference_aerial: np.ndarray = field(repr=False)
    noise_aerial: float = field(repr=False)
    signal_terrestrial: np.ndarray = field(repr=False)
    interference_terrestrial: np.ndarray = field(repr=False)
    noise_terrestrial: float = field(repr=False)
    backhaul_row_index: int = -1
    distances_aerial: Optional[np.ndarray] = field(default=None, repr=False)
    distances_terrestrial: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def sum_se_aerial_users(self) -> float:
        return float(np.sum(self.se_aerial))

    @property
    def sum_se_aerial(self) -> float:
        return self.sum_se_aerial_users + self.se_backhaul

    @property
    def sum_se_terrestrial(self) -> float:
        return float(np.sum(self.se_terrestrial))

    def csv_rows(self) -> List[dict]:
        """One row per link: tier, link_index, distance_m, signal_w, interference_w, noise_w, se_bps_hz."""
        rows = []
        n_a = self.signal_aerial.size
        b = self.backhaul_row_index % n_a
        users = [j for j in range(n_a) if j != b]
        se_rows = dict(zip(users, self.se_aerial))
        se_rows[b] = self.se_backhaul
        for j in range(n_a):
            rows.append({
                "tier": "backhaul" if j == b else "aerial",
                "link_index": j,
                "distance_m": _at(self.distances_aerial, j),
                "signal_w": float(self.signal_aerial[j]),
                "interference_w": float(self.interference_aerial[j]),
                "noise_w": float(self.noise_aerial),
                "se_bps_hz": float(se_rows[j]),
            })
        for i in range(self.signal_terrestrial.size):
            rows.append({
                "tier": "terrestrial",
                "link_index": i,
                "distance_m": _at(self.distances_terrestrial, i),
                "signal_w": float(self.signal_terrestrial[i]),
                "interference_w": float(self.interference_terrestrial[i]),
                "noise_w": float(self.noise_terrestrial),
                "se_bps_hz": float(self.se_terrestrial[i]),
            })
        return rows


def _at(a, i):
    return float("nan") if a is None else float(a[i])


def tier_sum_se(report: RateReport) -> Tuple[float, float, float]:
    """``(sum aerial SE incl. backhaul, sum terrestrial SE, backhaul SE)``."""
    return report.sum_se_aerial, report.sum_se_terrestrial, report.se_backhaul


@dataclass(frozen=True)
class SumRate:
    """Network sum-rate (bit/s) split into the aerial-user part and the bottleneck part."""

    total_rate_bps: float
    aerial_component: float
    bottleneck_component: float
    mu_a: float

    @property
    def mu_t(self) -> float:
        return 1.0 - self.mu_a


def network_sum_rate(aerial_users_se: float, backhaul_se: float, terrestrial_se: float,
                     mu_a: float, bandwidth_hz: float) -> SumRate:
    """``mu_a w sum R_a,users + min(mu_a w R_ab, mu_t w sum R_t)`` with ``mu_t = 1 - mu_a``."""
    if not 0.0 <= mu_a <= 1.0:
        raise ValueError(f"mu_a must lie in [0, 1], got {mu_a}")
    mu_t = 1.0 - mu_a
    aerial = mu_a * bandwidth_hz * aerial_users_se
    zeta = min(mu_a * bandwidth_hz * backhaul_se, mu_t * bandwidth_hz * terrestrial_se)
    return SumRate(aerial + zeta, aerial, zeta, mu_a)
