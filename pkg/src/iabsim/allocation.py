"""Bandwidth split between the aerial tier (access + backhaul) and the terrestrial tier.

``mu_a`` is the aerial share of the band and ``mu_t = 1 - mu_a``. Terrestrial
traffic is relayed over the backhaul, so the delivered terrestrial rate is
capped by ``mu_a w R_ab``. Four ways of choosing ``mu_a`` are provided:

* :func:`closed_form_mu` / :func:`closed_form_allocation`: exact optimum for
  fixed noise powers;
* :func:`sca_allocate`: successive convex approximation when the noise power
  grows with the allocated bandwidth;
* :func:`ga_allocate`: a small real-coded genetic algorithm used as a
  numerical benchmark;
* :func:`fixed_split`: the static split of a non-IAB deployment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateRatesError, InfeasibleAllocationError
from .rates import LinkBudget, RateReport, network_sum_rate

LN2 = math.log(2.0)
DEFAULT_SCA_EPS = 1e-3
DEFAULT_SCA_MAX_ITERS = 100
DEFAULT_SCA_START = 0.5


@dataclass(frozen=True)
class AllocationResult:
    """Chosen bandwidth split and the rate it achieves.

    ``backhaul_slack = mu_a w R_ab - mu_t w sum R_t`` in bit/s; it is
    non-negative whenever the backhaul can carry all terrestrial traffic.
    """

    mu_a: float
    method: str
    total_rate_bps: float
    backhaul_slack: float
    iterations: int = 0
    converged: bool = True
    trace: Tuple[float, ...] = field(default=(), repr=False)
    note: str = ""

    @property
    def mu_t(self) -> float:
        return 1.0 - self.mu_a

    def csv_row(self) -> dict:
        return {
            "method": self.method,
            "mu_a": self.mu_a,
            "total_rate_bps": self.total_rate_bps,
            "backhaul_slack": self.backhaul_slack,
            "iterations": self.iterations,
            "converged": int(bool(self.converged)),
        }


def _result(method, mu_a, users_se, backhaul_se, terr_se, w, **kw) -> AllocationResult:
    rate = network_sum_rate(users_se, backhaul_se, terr_se, mu_a, w)
    slack = mu_a * w * backhaul_se - (1.0 - mu_a) * w * terr_se
    return AllocationResult(mu_a=mu_a, method=method, total_rate_bps=rate.total_rate_bps,
                            backhaul_slack=slack, **kw)


def backhaul_lower_bound(terrestrial_se: float, backhaul_se: float) -> float:
    """Smallest ``mu_a`` for which the backhaul carries all terrestrial traffic."""
    denom = terrestrial_se + backhaul_se
    if denom == 0:
        raise DegenerateRatesError("terrestrial and backhaul SE are both zero")
    return terrestrial_se / denom


def closed_form_mu(terrestrial_se: float, aerial_se: float, backhaul_se: float,
                   form: str = "max") -> float:
    """Optimal aerial share for fixed SEs.

    The objective ``mu_a (R_a - R_t)`` is linear, so the optimum sits at the
    backhaul bound ``R_t / (R_t + R_b)`` when the aerial users are spectrally
    less efficient than the terrestrial ones and at ``mu_a = 1`` otherwise:

        mu_a* = max(R_t (R_a - R_t) / (R_t + R_b), R_a - R_t) / (R_a - R_t)

    A tie (``R_a == R_t``) makes every feasible share optimal; the bound is
    returned. ``form="bound"`` skips the comparison and always returns the
    bound ``R_t / (R_t + R_b)``, which is only optimal while ``R_a < R_t``.
    The result is clamped to ``[0, 1]``.
    """
    lower = backhaul_lower_bound(terrestrial_se, backhaul_se)
    diff = aerial_se - terrestrial_se
    if form == "bound":
        mu = lower
    elif form != "max":
        raise ValueError(f"unknown form {form!r}")
    elif diff == 0:
        mu = lower
    else:
        mu = max(terrestrial_se * diff / (terrestrial_se + backhaul_se), diff) / diff
    return min(1.0, max(0.0, mu))


def closed_form_allocation(report: RateReport, bandwidth_hz: float) -> AllocationResult:
    """Closed-form split for one drop under fixed noise.

    The aerial sum handed to :func:`closed_form_mu` is the aerial-user sum
    (backhaul excluded) because that is what multiplies ``mu_a`` in the
    objective.
    """
    users, rb, rt = report.sum_se_aerial_users, report.se_backhaul, report.sum_se_terrestrial
    mu = closed_form_mu(rt, users, rb)
    return _result("closed-form", mu, users, rb, rt, bandwidth_hz)


def fixed_split(mu_fixed: float, report: RateReport, bandwidth_hz: float) -> AllocationResult:
    """Static split of a non-IAB deployment; the backhaul cap still applies."""
    if not 0.0 <= mu_fixed <= 1.0:
        raise ValueError(f"mu_fixed must lie in [0, 1], got {mu_fixed}")
    return _result("fixed", float(mu_fixed), report.sum_se_aerial_users, report.se_backhaul,
                   report.sum_se_terrestrial, bandwidth_hz)


def split_objective(mu_a, users_se: float, backhaul_se: float, terr_se: float, bandwidth_hz: float):
    """Linear objective ``mu_a w sum R_a + mu_t w sum R_t`` and backhaul violation (bit/s/Hz).

    Vectorised over ``mu_a``. The violation ``max(0, mu_t R_t - mu_a R_b)`` is
    zero exactly on the feasible set.
    """
    mu = np.asarray(mu_a, dtype=float)
    value = mu * bandwidth_hz * users_se + (1.0 - mu) * bandwidth_hz * terr_se
    violation = np.maximum(0.0, (1.0 - mu) * terr_se - mu * backhaul_se)
    return value, violation


def grid_search_mu(report: RateReport, bandwidth_hz: float, step: float = 1e-4) -> Tuple[float, float]:
    """Brute-force argmax of the linear objective over feasible grid points."""
    grid = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    value, violation = split_objective(grid, report.sum_se_aerial_users, report.se_backhaul,
                                       report.sum_se_terrestrial, bandwidth_hz)
    value = np.where(violation <= 0.0, value, -np.inf)
    k = int(np.argmax(value))
    return float(grid[k]), float(value[k])


# --------------------------------------------------------------------------
# Genetic algorithm


def ga_maximize(fitness: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]],
                bounds: Sequence[Tuple[float, float]],
                population: int = 64, generations: int = 200, seed: int = 0,
                mutation_sigma: float = 0.05, tournament_size: int = 3,
                crossover_rate: float = 0.9, elite: int = 2,
                penalty: float = 1e3) -> Tuple[np.ndarray, float, float]:
    """Real-coded GA on a box; ``fitness(X)`` returns ``(values, violations)`` per row.

    Selection is by tournament on the penalised fitness ``value - penalty *
    violation``; offspring come from blend crossover and Gaussian mutation
    (``mutation_sigma`` relative to the box width) clipped to the box. The
    best feasible point ever evaluated is returned, or the least-violating one
    if nothing was feasible, as ``(x, value, violation)``.
    """
    rng = np.random.default_rng(seed)
    lo, hi = np.asarray(bounds, dtype=float).T
    width = hi - lo
    dim = lo.size

    X = lo + rng.random((population, dim)) * width
    best = (None, -np.inf, np.inf)

    def evaluate(X):
        nonlocal best
        val, vio = fitness(X)
        val = np.asarray(val, dtype=float)
        vio = np.asarray(vio, dtype=float)
        feas = vio <= 0.0
        if np.any(feas):
            k = int(np.argmax(np.where(feas, val, -np.inf)))
            if best[2] > 0.0 or val[k] > best[1]:
                best = (X[k].copy(), float(val[k]), 0.0)
        elif best[2] > 0.0:
            k = int(np.argmin(vio))
            if vio[k] < best[2]:
                best = (X[k].copy(), float(val[k]), float(vio[k]))
        return val - penalty * vio

    scores = evaluate(X)
    for _ in range(generations):
        order = np.argsort(-scores, kind="stable")
        children = [X[order[:elite]]]
        n_child = population - elite
        picks = rng.integers(0, population, size=(2 * n_child, tournament_size))
        winners = picks[np.arange(2 * n_child), np.argmax(scores[picks], axis=1)]
        pa, pb = X[winners[:n_child]], X[winners[n_child:]]
        alpha = rng.uniform(-0.25, 1.25, size=(n_child, dim))
        do_cross = rng.random((n_child, 1)) < crossover_rate
        kids = np.where(do_cross, pa + alpha * (pb - pa), pa)
        kids = kids + rng.normal(0.0, mutation_sigma, size=kids.shape) * width
        children.append(np.clip(kids, lo, hi))
        X = np.vstack(children)
        scores = evaluate(X)
    return best


def ga_allocate(report: RateReport, bandwidth_hz: float, population: int = 64,
                generations: int = 200, seed: int = 0, **ga_kwargs) -> AllocationResult:
    """GA benchmark for the split: maximise the linear objective under the backhaul constraint."""
    users, rb, rt = report.sum_se_aerial_users, report.se_backhaul, report.sum_se_terrestrial

    def fitness(X):
        value, violation = split_objective(X[:, 0], users, rb, rt, bandwidth_hz)
        return value, violation * bandwidth_hz

    x, _, violation = ga_maximize(fitness, [(0.0, 1.0)], population=population,
                                  generations=generations, seed=seed, **ga_kwargs)
    return _result("ga", float(x[0]), users, rb, rt, bandwidth_hz,
                   iterations=generations, converged=violation <= 0.0)


# --------------------------------------------------------------------------
# Successive convex approximation under bandwidth-dependent noise


@dataclass(frozen=True)
class BandwidthRates:
    """Rates as functions of ``mu_a`` when noise power is ``mu * w * P_n``.

    Each link's SE is written as ``log2(S + x) - log2(I + x)`` with ``I`` the
    interference power, ``S = |g|^2 + I`` and ``x`` the noise power in the
    link's share of the band (``mu_a c`` for aerial rows, ``(1 - mu_a) c`` for
    terrestrial ones, ``c = w P_n``).
    """

    total_a: np.ndarray
    interf_a: np.ndarray
    total_t: np.ndarray
    interf_t: np.ndarray
    backhaul_row_index: int
    bandwidth_hz: float
    noise_psd: float

    @classmethod
    def from_budget(cls, budget: LinkBudget, bandwidth_hz: float, noise_psd: float) -> "BandwidthRates":
        return cls(budget.signal_a + budget.interference_a, budget.interference_a,
                   budget.signal_t + budget.interference_t, budget.interference_t,
                   budget.backhaul_row_index, bandwidth_hz, noise_psd)

    @property
    def c(self) -> float:
        return self.bandwidth_hz * self.noise_psd

    @property
    def users(self) -> np.ndarray:
        return np.array([j for j in range(self.total_a.size) if j != self.backhaul_row_index])

    def aerial(self, mu_a: float) -> np.ndarray:
        x = mu_a * self.c
        return np.log2(self.total_a + x) - np.log2(self.interf_a + x)

    def terrestrial(self, mu_a: float) -> np.ndarray:
        x = (1.0 - mu_a) * self.c
        return np.log2(self.total_t + x) - np.log2(self.interf_t + x)

    def aerial_slope(self, mu_a: float) -> np.ndarray:
        x = mu_a * self.c
        return self.c / LN2 * (1.0 / (self.total_a + x) - 1.0 / (self.interf_a + x))

    def terrestrial_slope(self, mu_a: float) -> np.ndarray:
        x = (1.0 - mu_a) * self.c
        return -self.c / LN2 * (1.0 / (self.total_t + x) - 1.0 / (self.interf_t + x))

    def linearized(self, mu_m: float):
        """First-order expansions around ``mu_m`` as ``(intercept, slope)`` pairs.

        Returns ``((a_users, b_users), (a_backhaul, b_backhaul), (a_terr, b_terr))``
        where each rate is approximated by ``a + b * mu_a`` and the aerial and
        terrestrial entries are already summed over links.
        """
        ra, sa = self.aerial(mu_m), self.aerial_slope(mu_m)
        rt, st = self.terrestrial(mu_m), self.terrestrial_slope(mu_m)
        u, b = self.users, self.backhaul_row_index
        users = (float(np.sum(ra[u] - sa[u] * mu_m)), float(np.sum(sa[u])))
        back = (float(ra[b] - sa[b] * mu_m), float(sa[b]))
        terr = (float(np.sum(rt - st * mu_m)), float(np.sum(st)))
        return users, back, terr

    def report_terms(self, mu_a: float) -> Tuple[float, float, float]:
        with np.errstate(divide="ignore"):
            ra = self.aerial(mu_a)
            rt = self.terrestrial(mu_a)
        return float(np.sum(ra[self.users])), float(ra[self.backhaul_row_index]), float(np.sum(rt))

    def served_terms(self, mu_a: float) -> Tuple[float, float, float]:
        """``report_terms`` with the SEs of a tier that has no bandwidth set to zero."""
        users, rb, rt = self.report_terms(mu_a)
        if mu_a == 1.0:
            rt = 0.0
        elif mu_a == 0.0:
            users = rb = 0.0
        return users, rb, rt

    def constraint(self, mu_a: float) -> float:
        """``mu_a R_ab(mu_a) - mu_t sum R_t(mu_a)``; feasible when ``>= 0``."""
        _, rb, rt = self.report_terms(mu_a)
        return _band_rate(mu_a, rb) - _band_rate(1.0 - mu_a, rt)


def _band_rate(share: float, se: float) -> float:
    # a tier with no bandwidth carries nothing, even if its SE diverges without interference
    return 0.0 if share == 0.0 else share * se


def _solve_linearized(users, back, terr, tol=1e-12) -> Optional[float]:
    """Maximise the quadratic surrogate over ``{mu in [0,1]: constraint(mu) <= 0}``.

    Objective ``mu (a_u + b_u mu) + (1 - mu)(a_t + b_t mu)``; constraint
    ``(1 - mu)(a_t + b_t mu) - mu (a_b + b_b mu) <= 0``. The maximiser is one
    of the interval ends, a root of the constraint or the stationary point.
    """
    au, bu = users
    ab, bb = back
    at, bt = terr
    # objective: q2 mu^2 + q1 mu + q0
    q2, q1, q0 = bu - bt, au + bt - at, at
    # constraint: c2 mu^2 + c1 mu + c0 <= 0
    c2, c1, c0 = -bt - bb, bt - at - ab, at

    cands = [0.0, 1.0]
    if c2 != 0.0:
        cands += [r.real for r in np.roots([c2, c1, c0]) if abs(r.imag) <= 1e-12 * max(1.0, abs(r.real))]
    elif c1 != 0.0:
        cands.append(-c0 / c1)
    if q2 != 0.0:
        cands.append(-q1 / (2.0 * q2))
    scale = max(abs(c0), abs(c1), abs(c2), 1.0)
    best, best_val = None, -np.inf
    for mu in cands:
        if not 0.0 <= mu <= 1.0:
            continue
        if c2 * mu * mu + c1 * mu + c0 > tol * scale:
            continue
        val = q2 * mu * mu + q1 * mu + q0
        if val > best_val:
            best, best_val = float(mu), val
    return best


def sca_allocate(rates: BandwidthRates, eps: float = DEFAULT_SCA_EPS,
                 max_iters: int = DEFAULT_SCA_MAX_ITERS, mu_start: float = DEFAULT_SCA_START) -> AllocationResult:
    """Bandwidth split under bandwidth-dependent noise by successive convex approximation.

    Every rate is linearised around the current share ``mu^m``; the surrogate
    problem (quadratic objective, quadratic backhaul constraint, one
    variable) is solved exactly and its maximiser becomes ``mu^{m+1}``. The
    loop stops once two consecutive shares differ by less than ``eps``. If the
    final share violates the exact backhaul constraint by the residual
    linearisation error it is moved onto the constraint boundary.

    Raises:
        InfeasibleAllocationError: if a surrogate problem has no feasible point.
    """
    if not 0.0 < mu_start < 1.0:
        raise ValueError("mu_start must lie in (0, 1)")
    w = rates.bandwidth_hz
    trace = [float(mu_start)]
    mu_prev, mu = None, float(mu_start)
    it = 0
    while (mu_prev is None or abs(mu_prev - mu) >= eps) and it < max_iters:
        nxt = _solve_linearized(*rates.linearized(mu))
        if nxt is None:
            raise InfeasibleAllocationError(f"surrogate problem infeasible around mu_a = {mu}")
        mu_prev, mu = mu, nxt
        trace.append(mu)
        it += 1
    converged = abs(mu_prev - mu) < eps

    note = ""
    if rates.constraint(mu) < 0.0:
        # linearisation error left the exact constraint slightly violated
        mu = brentq(rates.constraint, mu, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        note = "moved onto backhaul boundary"
    users, rb, rt = rates.served_terms(mu)
    return _result("sca", float(mu), users, rb, rt, w, iterations=it, converged=converged,
                   trace=tuple(trace), note=note)


def exact_bandwidth_objective(rates: BandwidthRates, mu_a) -> Tuple[np.ndarray, np.ndarray]:
    """Exact sum-rate and constraint slack under bandwidth-dependent noise, vectorised."""
    mus = np.atleast_1d(np.asarray(mu_a, dtype=float))
    vals, slack = [], []
    for mu in mus:
        users, rb, rt = rates.served_terms(mu)
        vals.append(network_sum_rate(users, rb, rt, mu, rates.bandwidth_hz).total_rate_bps)
        slack.append(rates.constraint(mu))
    return np.array(vals), np.array(slack)
