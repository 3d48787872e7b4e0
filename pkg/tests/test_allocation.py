import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iabsim.allocation import (BandwidthRates, closed_form_allocation, closed_form_mu,
                               exact_bandwidth_objective, fixed_split, ga_allocate, ga_maximize,
                               grid_search_mu, sca_allocate)
from iabsim.errors import DegenerateRatesError
from iabsim.rates import RateParams
from iabsim.scenario import ScenarioConfig

from conftest import make_budget, make_report


def test_closed_form_symmetric_split():
    assert closed_form_mu(5.0, 1.0, 5.0) == pytest.approx(0.5)


def test_closed_form_two_thirds():
    assert closed_form_mu(2.0, 1.0, 1.0) == pytest.approx(2 / 3)


def test_closed_form_aerial_dominant_takes_whole_band():
    assert closed_form_mu(2.0, 3.0, 1.0) == 1.0
    assert closed_form_mu(2.0, 3.0, 1.0, form="bound") == pytest.approx(2 / 3)


def test_closed_form_degenerate_rates():
    with pytest.raises(DegenerateRatesError):
        closed_form_mu(0.0, 1.0, 0.0)


def brute_total(mu, a, b, t):
    return mu * a + min(mu * b, (1 - mu) * t)


@given(st.floats(0.01, 40), st.floats(0.01, 40), st.floats(0.01, 40))
@settings(max_examples=300, deadline=None)
def test_closed_form_is_global_maximiser(t, a, b):
    mu = closed_form_mu(t, a, b)
    grid = np.linspace(0, 1, 2001)
    best = max(brute_total(m, a, b, t) for m in grid)
    assert brute_total(mu, a, b, t) >= best - 1e-9 * max(1.0, best)


@pytest.mark.parametrize("seed", range(10))
def test_closed_form_matches_grid_search(seed):
    r = make_report(seed)
    cf = closed_form_allocation(r, 500e6)
    mu_grid, val = grid_search_mu(r, 500e6)
    assert abs(cf.mu_a - mu_grid) <= 1e-3
    assert cf.total_rate_bps >= val * (1 - 1e-6)


def test_fixed_split_shares():
    r = make_report(0)
    half = fixed_split(0.5, r, 500e6)
    assert half.mu_a == half.mu_t == 0.5
    full = fixed_split(1.0, r, 500e6)
    assert full.total_rate_bps == pytest.approx(500e6 * r.sum_se_aerial_users)


@pytest.mark.parametrize("seed", range(10))
def test_fixed_split_never_beats_closed_form(seed):
    r = make_report(seed)
    assert fixed_split(0.5, r, 500e6).total_rate_bps <= closed_form_allocation(r, 500e6).total_rate_bps


def test_ga_linear_objective_box_optimum():
    # maximise 3x0 - x1 on [0, 0.7] x [0.2, 1]: argmax (0.7, 0.2)
    def fit(X):
        return 3 * X[:, 0] - X[:, 1], np.zeros(len(X))

    x, val, vio = ga_maximize(fit, [(0.0, 0.7), (0.2, 1.0)], seed=3)
    np.testing.assert_allclose(x, [0.7, 0.2], atol=1e-3)
    assert vio == 0.0


def test_ga_linear_objective_constraint_boundary():
    # maximise -x subject to x >= 0.3: argmax 0.3
    def fit(X):
        return -X[:, 0], np.maximum(0.0, 0.3 - X[:, 0])

    x, _, vio = ga_maximize(fit, [(0.0, 1.0)], seed=1)
    assert x[0] == pytest.approx(0.3, abs=1e-3)
    assert vio == 0.0


def test_ga_single_feasible_point():
    from dataclasses import replace
    r = replace(make_report(0), se_backhaul=0.0)
    res = ga_allocate(r, 500e6, seed=0)
    assert res.mu_a == 1.0 and res.converged


def test_ga_is_seeded():
    r = make_report(0)
    assert ga_allocate(r, 500e6, seed=5).mu_a == ga_allocate(r, 500e6, seed=5).mu_a


def rates_for(seed, config=None):
    config = config or ScenarioConfig()
    return BandwidthRates.from_budget(make_budget(seed, config), config.bandwidth_hz, config.noise_psd_w_per_hz)


@pytest.mark.parametrize("mu", [0.1, 0.5, 0.73, 0.95])
def test_linearisation_is_exact_at_expansion_point(mu):
    rates = rates_for(0)
    (au, bu), (ab, bb), (at, bt) = rates.linearized(mu)
    users, rb, rt = rates.report_terms(mu)
    assert au + bu * mu == pytest.approx(users, abs=1e-12)
    assert ab + bb * mu == pytest.approx(rb, abs=1e-12)
    assert at + bt * mu == pytest.approx(rt, abs=1e-12)


@pytest.mark.parametrize("mu", [0.1, 0.5, 0.73, 0.95])
def test_slopes_match_central_differences(mu):
    rates = rates_for(1)
    h = 1e-6
    fd = (np.array(rates.report_terms(mu + h)) - np.array(rates.report_terms(mu - h))) / (2 * h)
    slopes = [s for _, s in rates.linearized(mu)]
    np.testing.assert_allclose(slopes, fd, rtol=1e-5)


def test_sca_converges_and_is_feasible():
    res = sca_allocate(rates_for(0))
    assert res.converged and res.iterations <= 20
    assert res.backhaul_slack >= -1e-6 * res.total_rate_bps
    assert res.trace[0] == 0.5


def test_sca_close_to_exact_optimum():
    rates = rates_for(2)
    res = sca_allocate(rates)
    grid = np.linspace(1e-6, 1 - 1e-6, 20001)
    vals, _ = exact_bandwidth_objective(rates, grid)
    assert res.total_rate_bps >= vals.max() * (1 - 1e-3)


def test_sca_matches_closed_form_as_noise_vanishes():
    config = ScenarioConfig(noise_psd_w_per_hz=1e-40)
    budget = make_budget(0, config)
    rates = BandwidthRates.from_budget(budget, config.bandwidth_hz, config.noise_psd_w_per_hz)
    sca = sca_allocate(rates)
    cf = closed_form_allocation(budget.report(RateParams.from_config(config)), config.bandwidth_hz)
    assert abs(sca.mu_a - cf.mu_a) <= 1e-3


def test_allocation_csv_row_columns():
    row = closed_form_allocation(make_report(0), 500e6).csv_row()
    assert list(row) == ["method", "mu_a", "total_rate_bps", "backhaul_slack", "iterations", "converged"]
