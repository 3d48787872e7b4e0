"""Monte-Carlo drops, parameter sweeps and energy-efficiency bookkeeping.

A *drop* is one random user placement with its channels, precoders, rates and
one allocation per requested method. Sweeps repeat drops over a grid of
transmit powers, bandwidths or array sizes. Trial ``t`` uses the same user
placement at every sweep point, so curves compare like with like, and every
random draw comes from a named substream of the sweep seed.
"""

from __future__ import annotations

import logging
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import allocation as alloc
from .beamforming import (DEFAULT_IMPROVEMENT_TOL, DEFAULT_MAX_ITERS, DEFAULT_TARGET_RESIDUAL,
                          HybridPrecoder, allocate_powers, design_precoder)
from .channel import ChannelSet, build_channels
from .errors import IABSimError
from .rates import BANDWIDTH_NOISE, LinkBudget, RateParams, RateReport
from .scenario import Geometry, ScenarioConfig, place_users

log = logging.getLogger(__name__)

METHODS = ("closed-form", "sca", "ga", "fixed")
SWEEP_VARIABLES = ("power_dbw", "bandwidth_hz", "num_antennas", "none")


def substream(seed: int, name: str, *indices: int) -> np.random.Generator:
    """Independent generator for stream ``name`` and integer ``indices`` of ``seed``."""
    key = (zlib.crc32(name.encode()),) + tuple(int(i) for i in indices)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))


# --------------------------------------------------------------------------
# Energy efficiency


@dataclass(frozen=True)
class EnergyModel:
    """Circuit power per RF chain and per phase shifter (W)."""

    rf_chain_power_w: float = 0.25
    phase_shifter_power_w: float = 1e-3

    def __post_init__(self):
        if self.rf_chain_power_w <= 0 or self.phase_shifter_power_w <= 0:
            raise ValueError("circuit powers must be positive")

    @classmethod
    def from_config(cls, config: ScenarioConfig) -> "EnergyModel":
        return cls(config.rf_chain_power_w, config.phase_shifter_power_w)


def energy_efficiency(rate_bps: float, transmit_power_w: float, model: EnergyModel,
                      num_rf_chains: int, num_phase_shifters: int) -> float:
    """Bits per joule, ``rate / (P_tr + N_RF P_RF + N_PS P_PS)``."""
    total = (transmit_power_w + num_rf_chains * model.rf_chain_power_w
             + num_phase_shifters * model.phase_shifter_power_w)
    if total <= 0:
        raise ValueError("total consumed power must be positive")
    return rate_bps / total


def hardware_counts(config: ScenarioConfig) -> Tuple[int, int]:
    """RF chains and phase shifters summed over the donor and node precoders."""
    n_rf = config.rf_chains("aerial") + config.rf_chains("terrestrial")
    return n_rf, config.num_antennas * n_rf


# --------------------------------------------------------------------------
# One drop


@dataclass(frozen=True)
class SolverSettings:
    target_lambda: float = DEFAULT_TARGET_RESIDUAL
    hybrid_max_iters: int = DEFAULT_MAX_ITERS
    hybrid_improvement_tol: Optional[float] = DEFAULT_IMPROVEMENT_TOL
    hybrid_init: str = "svd"
    precoder: str = "hybrid"
    sca_eps: float = alloc.DEFAULT_SCA_EPS
    sca_max_iters: int = alloc.DEFAULT_SCA_MAX_ITERS
    sca_start: float = alloc.DEFAULT_SCA_START
    mu_fixed: float = 0.5
    ga_population: int = 64
    ga_generations: int = 200


@dataclass
class DropResult:
    config: ScenarioConfig
    geometry: Geometry
    channels: ChannelSet
    hybrid_aerial: Optional[HybridPrecoder]
    hybrid_terrestrial: Optional[HybridPrecoder]
    budget: LinkBudget
    report: RateReport
    allocations: Dict[str, alloc.AllocationResult]
    energy_efficiency: Dict[str, float]
    digital_report: Optional[RateReport] = None

    def report_for(self, method: str) -> RateReport:
        """Rate report at the noise level the method was evaluated with."""
        if method == "sca":
            params = RateParams.from_config(self.config, mode=BANDWIDTH_NOISE)
            return self.budget.report(params, self.allocations["sca"].mu_a)
        return self.report


def run_drop(config: ScenarioConfig, seed: int = 0, trial: int = 0,
             methods: Sequence[str] = ("closed-form", "fixed"),
             settings: SolverSettings = SolverSettings(),
             with_digital: bool = False, geometry: Optional[Geometry] = None) -> DropResult:
    """Simulate one drop end to end and allocate bandwidth with every method."""
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ValueError(f"unknown methods {sorted(unknown)}")
    if geometry is None:
        geometry = place_users(config, substream(seed, "placement", trial))
    channels = build_channels(geometry, config)
    p_a, p_t, _ = allocate_powers(config)
    hyb = dict(target_residual=settings.target_lambda, max_iters=settings.hybrid_max_iters,
               improvement_tol=settings.hybrid_improvement_tol, init=settings.hybrid_init)
    if settings.hybrid_init == "random":
        hyb_a = dict(hyb, rng=substream(seed, "hybrid-init", trial, 0))
        hyb_t = dict(hyb, rng=substream(seed, "hybrid-init", trial, 1))
    else:
        hyb_a = hyb_t = hyb
    F_a, hp_a = design_precoder(channels.H_a, p_a, config.rf_chains("aerial"), settings.precoder, **hyb_a)
    F_t, hp_t = design_precoder(channels.H_t, p_t, config.rf_chains("terrestrial"), settings.precoder, **hyb_t)
    budget = LinkBudget.from_precoders(channels, F_a, F_t)
    report = budget.report(RateParams.from_config(config))
    w = config.bandwidth_hz

    allocations = {}
    for m in methods:
        if m == "closed-form":
            allocations[m] = alloc.closed_form_allocation(report, w)
        elif m == "fixed":
            allocations[m] = alloc.fixed_split(settings.mu_fixed, report, w)
        elif m == "ga":
            ga_seed = int(substream(seed, "ga", trial).integers(2**63))
            allocations[m] = alloc.ga_allocate(report, w, population=settings.ga_population,
                                               generations=settings.ga_generations, seed=ga_seed)
        elif m == "sca":
            rates = alloc.BandwidthRates.from_budget(budget, w, config.noise_psd_w_per_hz)
            allocations[m] = alloc.sca_allocate(rates, eps=settings.sca_eps,
                                                max_iters=settings.sca_max_iters, mu_start=settings.sca_start)

    model = EnergyModel.from_config(config)
    n_rf, n_ps = hardware_counts(config)
    p_tr = config.donor_power_w + config.node_power_w
    ee = {m: energy_efficiency(a.total_rate_bps, p_tr, model, n_rf, n_ps) for m, a in allocations.items()}

    digital = None
    if with_digital:
        Fd_a, _ = design_precoder(channels.H_a, p_a, mode="digital")
        Fd_t, _ = design_precoder(channels.H_t, p_t, mode="digital")
        digital = LinkBudget.from_precoders(channels, Fd_a, Fd_t).report(RateParams.from_config(config))

    return DropResult(config, geometry, channels, hp_a, hp_t, budget, report, allocations, ee, digital)


# --------------------------------------------------------------------------
# Backhaul balance


def backhaul_balance_report(drop: DropResult, method: str = "closed-form") -> Dict[str, float]:
    """Rates behind the backhaul-bottleneck bar chart for one drop.

    Returns the network sum-rate ``R``, the backhaul rate ``R_bh = mu_a w R_ab``,
    the terrestrial demand ``R_t = mu_t w sum R_t`` and the aerial-user rate
    ``R_a = mu_a w sum R_a`` (bit/s), plus ``balance_error``, the relative gap
    ``|R_bh - R_t| / R_t`` (``inf`` when the terrestrial tier gets no band).
    """
    a = drop.allocations[method]
    rep = drop.report_for(method)
    w = drop.config.bandwidth_hz
    r_bh = a.mu_a * w * rep.se_backhaul
    r_t = a.mu_t * w * rep.sum_se_terrestrial
    r_a = a.mu_a * w * rep.sum_se_aerial_users
    err = abs(r_bh - r_t) / r_t if r_t > 0 else math.inf
    return {"method": method, "mu_a": a.mu_a, "R": a.total_rate_bps, "R_bh": r_bh, "R_t": r_t,
            "R_a": r_a, "balance_error": err}


# --------------------------------------------------------------------------
# Sweeps


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep and how often.

    ``variable`` is applied to the base config at each of ``values``; an
    optional second axis (``variable2``/``values2``) turns the sweep into a
    grid. Power values are in dBW and set both UAV budgets. Array sizes must
    be perfect squares (square UPA).
    """

    variable: str = "power_dbw"
    values: Tuple[float, ...] = (0.0,)
    trials: int = 50
    methods: Tuple[str, ...] = ("closed-form", "fixed")
    config: ScenarioConfig = field(default_factory=ScenarioConfig)
    seed: int = 0
    settings: SolverSettings = field(default_factory=SolverSettings)
    variable2: Optional[str] = None
    values2: Tuple[float, ...] = ()
    with_digital: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "values2", tuple(self.values2))
        object.__setattr__(self, "methods", tuple(self.methods))
        for var, vals in ((self.variable, self.values), (self.variable2, self.values2)):
            if var is None:
                continue
            if var not in SWEEP_VARIABLES:
                raise ValueError(f"unknown sweep variable {var!r}")
            if not vals:
                raise ValueError("sweep values must not be empty")
            diffs = np.diff(np.asarray(vals, dtype=float))
            if not (np.all(diffs > 0) or np.all(diffs < 0)):
                raise ValueError("sweep values must be strictly monotone")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if set(self.methods) - set(METHODS):
            raise ValueError(f"unknown methods {sorted(set(self.methods) - set(METHODS))}")

    def points(self) -> List[Tuple[float, Optional[float]]]:
        if self.variable2 is None:
            return [(v, None) for v in self.values]
        return [(v, u) for v in self.values for u in self.values2]


def apply_variable(config: ScenarioConfig, variable: Optional[str], value) -> ScenarioConfig:
    if variable in (None, "none"):
        return config
    if variable == "power_dbw":
        return config.with_power_dbw(float(value))
    if variable == "bandwidth_hz":
        return config.replace(bandwidth_hz=float(value))
    if variable == "num_antennas":
        side = math.isqrt(int(value))
        if side * side != int(value):
            raise ValueError(f"antenna sweep needs square arrays, got N={value}")
        return config.replace(antenna_dims=(side, side))
    raise ValueError(f"unknown sweep variable {variable!r}")


TRIAL_COLUMNS = ["sweep_value", "sweep_value2", "trial", "method", "mu_a", "rate_bps",
                 "ee_bit_per_joule", "backhaul_slack", "sum_se_aerial_users", "se_backhaul",
                 "sum_se_terrestrial", "sum_se_aerial_zf", "sum_se_terrestrial_zf",
                 "lambda_aerial", "lambda_terrestrial", "iterations", "converged", "error"]

SUMMARY_COLUMNS = ["sweep_value", "sweep_value2", "method", "n", "n_errors",
                   "rate_mean", "rate_median", "rate_std", "ee_mean", "ee_median", "ee_std",
                   "mu_a_mean", "mu_a_median", "mu_a_std",
                   "sum_se_aerial_users_mean", "se_backhaul_mean", "sum_se_terrestrial_mean"]


def _run_point(args) -> List[dict]:
    spec, k, v1, v2, trial = args
    config = apply_variable(apply_variable(spec.config, spec.variable, v1), spec.variable2, v2)
    base = {"sweep_value": v1, "sweep_value2": math.nan if v2 is None else v2, "trial": trial}
    try:
        drop = run_drop(config, spec.seed, trial, spec.methods, spec.settings, spec.with_digital)
    except IABSimError as exc:
        log.warning("sweep point %s trial %d failed: %s", (v1, v2), trial, exc)
        row = {c: math.nan for c in TRIAL_COLUMNS}
        row.update(base, method="error", converged=0, iterations=0,
                   error=f"{type(exc).__module__.split('.')[-1]}.{type(exc).__name__}: {exc}")
        return [row]
    rows = []
    for m, a in drop.allocations.items():
        rep = drop.report_for(m)
        rows.append(dict(
            base, method=m, mu_a=a.mu_a, rate_bps=a.total_rate_bps, ee_bit_per_joule=drop.energy_efficiency[m],
            backhaul_slack=a.backhaul_slack, sum_se_aerial_users=rep.sum_se_aerial_users,
            se_backhaul=rep.se_backhaul, sum_se_terrestrial=rep.sum_se_terrestrial,
            sum_se_aerial_zf=drop.digital_report.sum_se_aerial_users if drop.digital_report else math.nan,
            sum_se_terrestrial_zf=drop.digital_report.sum_se_terrestrial if drop.digital_report else math.nan,
            lambda_aerial=drop.hybrid_aerial.residual if drop.hybrid_aerial else math.nan,
            lambda_terrestrial=drop.hybrid_terrestrial.residual if drop.hybrid_terrestrial else math.nan,
            iterations=a.iterations, converged=int(bool(a.converged)), error=""))
    return rows


def run_sweep(spec: SweepSpec, jobs: Optional[int] = 1) -> List[dict]:
    """Per-trial rows for every sweep point, trial and method.

    ``jobs`` worker processes evaluate the (point, trial) tasks; rows are
    returned in task order so the output does not depend on ``jobs``. A task
    that raises a simulator error yields a single ``method="error"`` row.
    """
    tasks = [(spec, k, v1, v2, t) for k, (v1, v2) in enumerate(spec.points()) for t in range(spec.trials)]
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(tasks) == 1:
        chunks = list(map(_run_point, tasks))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_point, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [r for chunk in chunks for r in chunk]


def summarize(rows: Iterable[dict]) -> List[dict]:
    """Mean / median / std per (sweep point, method); error rows are counted per point."""
    groups: Dict[tuple, List[dict]] = {}
    errors: Dict[tuple, int] = {}
    order = []
    for r in rows:
        v2 = r["sweep_value2"]
        pt = (r["sweep_value"], math.nan if v2 != v2 else v2)  # one shared nan so keys compare equal
        if r["method"] == "error":
            errors[pt] = errors.get(pt, 0) + 1
            continue
        key = pt + (r["method"],)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(r)

    out = []
    for key in order:
        g = groups[key]

        def stats(col):
            a = np.array([r[col] for r in g], dtype=float)
            return float(np.mean(a)), float(np.median(a)), float(np.std(a))

        rate, ee, mu = stats("rate_bps"), stats("ee_bit_per_joule"), stats("mu_a")
        out.append({
            "sweep_value": key[0], "sweep_value2": key[1], "method": key[2], "n": len(g),
            "n_errors": errors.get(key[:2], 0),
            "rate_mean": rate[0], "rate_median": rate[1], "rate_std": rate[2],
            "ee_mean": ee[0], "ee_median": ee[1], "ee_std": ee[2],
            "mu_a_mean": mu[0], "mu_a_median": mu[1], "mu_a_std": mu[2],
            "sum_se_aerial_users_mean": float(np.mean([r["sum_se_aerial_users"] for r in g])),
            "se_backhaul_mean": float(np.mean([r["se_backhaul"] for r in g])),
            "sum_se_terrestrial_mean": float(np.mean([r["sum_se_terrestrial"] for r in g])),
        })
    return out


def mean_curve(summary: Sequence[dict], method: str, column: str = "rate_mean") -> Tuple[np.ndarray, np.ndarray]:
    """``(sweep_values, column)`` of one method from a 1-D sweep summary."""
    pts = [(r["sweep_value"], r[column]) for r in summary if r["method"] == method]
    x, y = zip(*pts)
    return np.array(x, dtype=float), np.array(y, dtype=float)


# --------------------------------------------------------------------------
# Convergence traces


def convergence_traces(config: ScenarioConfig, seed: int = 0, trial: int = 0,
                       settings: SolverSettings = SolverSettings()) -> Dict[str, List[float]]:
    """Residual trace of the hybrid decomposition (both tiers and both inits) and the SCA share trace.

    The hybrid traces stop at ``target_lambda`` or ``hybrid_max_iters``; the
    improvement criterion is switched off so a slow start is not cut short.
    """
    from .beamforming import hybrid_decompose, zero_forcing

    geometry = place_users(config, substream(seed, "placement", trial))
    channels = build_channels(geometry, config)
    out = {}
    for tier, H in (("aerial", channels.H_a), ("terrestrial", channels.H_t)):
        F_zf = zero_forcing(H)
        for init in ("svd", "random"):
            hp = hybrid_decompose(F_zf, config.rf_chains(tier), target_residual=settings.target_lambda,
                                  max_iters=settings.hybrid_max_iters, improvement_tol=None, init=init,
                                  rng=substream(seed, "hybrid-init", trial, tier == "terrestrial"))
            out[f"lambda_{tier}_{init}"] = list(hp.residual_trace)
    drop = run_drop(config, seed, trial, ("sca",), settings, geometry=geometry)
    out["mu_sca"] = list(drop.allocations["sca"].trace)
    return out
