"""Acceptance checks for the simulator, one test per criterion.

Each test prints a ``PASS``/``FAIL`` line with the measured numbers and then
asserts. Run ``python3 tests/test_acceptance.py`` for just the summary lines.
"""

import contextlib
import io
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from iabsim.allocation import BandwidthRates, closed_form_allocation, ga_allocate, sca_allocate
from iabsim.beamforming import allocate_powers, hybrid_decompose, scale_to_power, zero_forcing
from iabsim.cli import main as cli_main
from iabsim.experiments import SweepSpec, backhaul_balance_report, mean_curve, run_drop, run_sweep, summarize
from iabsim.rates import network_sum_rate
from iabsim.scenario import ScenarioConfig

from conftest import make_budget, make_channels, make_report

W = 500e6
POWERS_DBW = tuple(float(x) for x in np.linspace(-15, 5, 11))


def report(name, ok, detail):
    line = f"{name} {'PASS' if ok else 'FAIL'}: {detail}"
    capman = _capture_manager()
    if capman is not None:
        with capman.global_and_fixture_disabled():
            print("\n" + line, flush=True)
    else:
        print(line, flush=True)
    return ok


_config = None


def _remember_config(config):
    global _config
    _config = config


def _capture_manager():
    return None if _config is None else _config.pluginmanager.getplugin("capturemanager")


@pytest.fixture(autouse=True)
def _bind_config(request):
    _remember_config(request.config)


# --------------------------------------------------------------------------


def test_ac01_zero_forcing_exactness():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(1000):
        ch = make_channels(seed)
        for H in (ch.H_a, ch.H_t):
            worst = max(worst, np.linalg.norm(H @ zero_forcing(H) - np.eye(H.shape[0])))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 10
    report("AC1", ok, f"max ||H F_zf - I||_F = {worst:.2e} over 1000 drops x 2 tiers in {dt:.1f}s")
    assert ok


def _aerial_instance(seed):
    config = ScenarioConfig()
    H = make_channels(seed, config).H_a
    p_a, _, _ = allocate_powers(config)
    return zero_forcing(H), config.rf_chains("aerial"), p_a


def test_ac02_hybrid_reaches_target_with_invariants():
    reached, worst_mod, worst_trace = 0, 0.0, 0.0
    iters = []
    for seed in range(100):
        F_zf, n_rf, p = _aerial_instance(seed)
        hp = hybrid_decompose(F_zf, n_rf, target_residual=0.1, max_iters=60, improvement_tol=None,
                              init="svd", keep_history=True)
        k = hp.iterations_to(0.1)
        reached += k is not None and k <= 60
        iters.append(np.inf if k is None else k)
        for F_rf, F_bb in hp.history:
            worst_mod = max(worst_mod, np.max(np.abs(np.abs(F_rf) - 1.0)))
            F = scale_to_power(F_rf, F_bb, p)
            worst_trace = max(worst_trace, abs(np.trace(F.conj().T @ F).real - p.total))
    ok = reached >= 95 and worst_mod <= 1e-9 and worst_trace <= 1e-9
    report("AC2", ok, f"{reached}/100 seeds reach residual<=0.1 within 60 iterations "
                      f"(median {np.median(iters):.0f}); max unit-modulus error {worst_mod:.1e}, "
                      f"max power-trace error {worst_trace:.1e}")
    assert ok


def test_ac03_svd_start_faster_than_random():
    svd, rnd = [], []
    for seed in range(100):
        F_zf, n_rf, _ = _aerial_instance(seed)
        for init, out in (("svd", svd), ("random", rnd)):
            hp = hybrid_decompose(F_zf, n_rf, improvement_tol=None, init=init,
                                  rng=np.random.default_rng(seed))
            k = hp.iterations_to(0.1)
            out.append(np.inf if k is None else k)
    ok = np.median(svd) < np.median(rnd)
    report("AC3", ok, f"median iterations to residual<=0.1: svd {np.median(svd):g}, random {np.median(rnd):g}")
    assert ok


def _grid_argmax(users, rb, rt):
    # independent oracle: network sum-rate with the min() evaluated directly on a 1e-4 grid
    grid = np.linspace(0.0, 1.0, 10001)
    vals = np.array([network_sum_rate(users, rb, rt, m, W).total_rate_bps for m in grid])
    k = int(np.argmax(vals))
    return grid[k], vals[k]


def test_ac04_closed_form_matches_grid_argmax():
    worst_mu, worst_rel = 0.0, -np.inf
    for seed in range(200):
        r = make_report(seed)
        cf = closed_form_allocation(r, W)
        mu_g, val_g = _grid_argmax(r.sum_se_aerial_users, r.se_backhaul, r.sum_se_terrestrial)
        worst_mu = max(worst_mu, abs(cf.mu_a - mu_g))
        worst_rel = max(worst_rel, (val_g - cf.total_rate_bps) / val_g)
    ok = worst_mu <= 1e-3 and worst_rel <= 1e-6
    report("AC4", ok, f"200 drops: max |mu_cf - mu_grid| = {worst_mu:.1e}, "
                      f"max relative shortfall vs grid = {worst_rel:.1e}")
    assert ok


def test_ac05_ga_agrees_with_closed_form():
    worst_mu, worst_gap = 0.0, 0.0
    for seed in range(50):
        r = make_report(seed)
        cf = closed_form_allocation(r, W)
        ga = ga_allocate(r, W, seed=seed)
        worst_mu = max(worst_mu, abs(ga.mu_a - cf.mu_a))
        worst_gap = max(worst_gap, abs(cf.total_rate_bps - ga.total_rate_bps) / cf.total_rate_bps)
    ok = worst_mu <= 1e-2 and worst_gap <= 5e-3
    report("AC5", ok, f"50 drops: max |mu_GA - mu_cf| = {worst_mu:.1e}, max rate gap = {100 * worst_gap:.3f}%")
    assert ok


def test_ac06_backhaul_balance_at_closed_form():
    errors = []
    whole_band = 0
    for trial in range(200):
        drop = run_drop(ScenarioConfig(), seed=0, trial=trial, methods=("closed-form",))
        bars = backhaul_balance_report(drop)
        errors.append(bars["balance_error"])
        whole_band += bars["mu_a"] == 1.0
    errors = np.array(errors)
    balanced = int(np.sum(errors <= 1e-6))
    finite = errors[np.isfinite(errors)]
    ok = balanced == len(errors)
    report("AC6", ok, f"{balanced}/200 drops balanced to 1e-6 (max finite error "
                      f"{finite.max() if finite.size else float('nan'):.1e}); {whole_band} drops have aerial "
                      f"users more spectrally efficient than terrestrial ones, where the rate-optimal split "
                      f"gives the whole band to the aerial tier and the balance cannot hold")
    assert ok


def test_ac07_sca_convergence_and_linearisation():
    config = ScenarioConfig()
    iters, worst_taylor, worst_fd = [], 0.0, 0.0
    h = 1e-6
    for seed in range(100):
        rates = BandwidthRates.from_budget(make_budget(seed, config), config.bandwidth_hz,
                                           config.noise_psd_w_per_hz)
        res = sca_allocate(rates, eps=1e-3)
        iters.append(res.iterations)
        for mu in res.trace:
            lin = rates.linearized(mu)
            exact = rates.report_terms(mu)
            lo, hi = max(mu - h, 0.0), min(mu + h, 1.0)
            fd = (np.array(rates.report_terms(hi)) - np.array(rates.report_terms(lo))) / (hi - lo)
            for (a, b), e, d in zip(lin, exact, fd):
                worst_taylor = max(worst_taylor, abs(a + b * mu - e))
                worst_fd = max(worst_fd, abs(b - d) / max(abs(d), 1e-300))
    within = int(np.sum(np.array(iters) <= 20))
    ok = within >= 95 and worst_taylor <= 1e-12 and worst_fd <= 1e-5
    report("AC7", ok, f"{within}/100 drops converge within 20 iterations (median {np.median(iters):g}, "
                      f"max {max(iters)}); max Taylor error {worst_taylor:.1e}, max slope error vs "
                      f"central difference {worst_fd:.1e} relative")
    assert ok


def _dominance(rows):
    by_key = {}
    for r in rows:
        by_key.setdefault((r["sweep_value"], r["sweep_value2"], r["trial"]), {})[r["method"]] = r["rate_bps"]
    bad = [k for k, v in by_key.items() if v["closed-form"] < v["fixed"]]
    return len(by_key), bad


def test_ac08_iab_dominates_fixed_split():
    t0 = time.perf_counter()
    power = run_sweep(SweepSpec(values=POWERS_DBW, trials=50, methods=("closed-form", "fixed")), jobs=1)
    contour = run_sweep(SweepSpec(variable="bandwidth_hz", values=tuple(np.linspace(300e6, 800e6, 6)),
                                  variable2="power_dbw", values2=tuple(np.linspace(-15, 0, 6)),
                                  trials=50, methods=("closed-form", "fixed")), jobs=1)
    dt = time.perf_counter() - t0
    n_p, bad_p = _dominance(power)
    n_c, bad_c = _dominance(contour)
    means_ok = all(a["rate_mean"] >= b["rate_mean"] for a, b in zip(summarize(power + contour)[::2],
                                                                     summarize(power + contour)[1::2]))
    ok = not bad_p and not bad_c and means_ok and dt < 300
    report("AC8", ok, f"IAB >= fixed split on {n_p - len(bad_p)}/{n_p} power-sweep drops and "
                      f"{n_c - len(bad_c)}/{n_c} contour drops (every point mean too: {means_ok}) in {dt:.1f}s")
    assert ok


def test_ac09_energy_efficiency_interior_peak():
    summary = summarize(run_sweep(SweepSpec(values=POWERS_DBW, trials=50, methods=("closed-form",)), jobs=1))
    x, ee = mean_curve(summary, "closed-form", "ee_mean")
    k = int(np.argmax(ee))
    ok = 0 < k < len(ee) - 1 and np.all(np.diff(ee[:k + 1]) > 0) and np.all(np.diff(ee[k:]) < 0)
    report("AC9", ok, f"mean EE peaks at {x[k]:g} dBW ({ee[k]:.3e} bit/J), rising before and falling after "
                      f"on the {x[1] - x[0]:g} dB grid")
    assert ok


VERB_ARGS = {
    "simulate": [],
    "sweep-power": [],
    "contour": [],
    "sweep-antennas": [],
    "convergence": [],
    "balance": ["--trials", "20"],
}


def test_ac10_cli_outputs_are_byte_identical():
    mismatched = []
    n_files = 0
    with tempfile.TemporaryDirectory() as tmp:
        for verb, extra in VERB_ARGS.items():
            outs = []
            for run in ("a", "b"):
                out = Path(tmp) / run / verb
                with contextlib.redirect_stdout(io.StringIO()):
                    status = cli_main([verb, "--seed", "7", "--out", str(out), "--jobs", "1"] + extra)
                assert status == 0
                outs.append(out)
            for f in sorted(outs[0].glob("*.csv")):
                n_files += 1
                if f.read_bytes() != (outs[1] / f.name).read_bytes():
                    mismatched.append(f"{verb}/{f.name}")
    ok = not mismatched and n_files > 0
    report("AC10", ok, f"{n_files - len(mismatched)}/{n_files} CSVs byte-identical across two runs of all six verbs")
    assert ok


if __name__ == "__main__":
    results = []
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_ac")):
        try:
            fn()
            results.append(True)
        except AssertionError:
            results.append(False)
    sys.exit(0 if all(results) else 1)
