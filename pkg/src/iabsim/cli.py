"""Command-line front end: ``iabsim <verb> [flags]``.

Every verb writes its CSV tables plus ``manifest.json`` (resolved config,
seed and flags) into ``--out``. Exit status is 0 on success, 2 for config or
usage errors, 3 for simulator errors and 4 for I/O failures.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .configfile import config_to_dict, load_config
from .errors import ConfigError, IABSimError
from .experiments import (METHODS, TRIAL_COLUMNS, SUMMARY_COLUMNS, SolverSettings, SweepSpec,
                          backhaul_balance_report, convergence_traces, run_drop, run_sweep, summarize)
from .scenario import ScenarioConfig
from .tables import precoder_to_dict, write_csv, write_json

log = logging.getLogger("iabsim")

VERBS = ("simulate", "sweep-power", "contour", "sweep-antennas", "convergence", "balance")

DEFAULT_POWERS_DBW = tuple(float(x) for x in np.arange(-15.0, 5.0 + 1e-9, 2.0))
DEFAULT_CONTOUR_BW_HZ = tuple(float(x) for x in np.linspace(300e6, 800e6, 6))
DEFAULT_CONTOUR_POWERS_DBW = tuple(float(x) for x in np.linspace(-15.0, 0.0, 6))
DEFAULT_ANTENNAS = (16, 36, 64, 100)


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _methods(text: str) -> tuple:
    ms = tuple(m.strip() for m in text.split(",") if m.strip())
    bad = [m for m in ms if m not in METHODS]
    if bad or not ms:
        raise argparse.ArgumentTypeError(f"methods must be drawn from {', '.join(METHODS)}")
    return ms


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value scenario file")
    common.add_argument("--seed", type=int, help="master seed (default: rng_seed from the config)")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default: all CPUs)")
    common.add_argument("--methods", type=_methods, default=None,
                        help=f"comma list from {','.join(METHODS)}")
    common.add_argument("--trials", type=int, default=None, help="drops per sweep point")
    common.add_argument("--mu-fixed", type=float, default=0.5, help="aerial share of the fixed split")
    common.add_argument("--target-lambda", type=float, default=0.1, help="hybrid residual target")
    common.add_argument("--sca-eps", type=float, default=1e-3, help="SCA stopping tolerance on mu")
    common.add_argument("--values", type=_float_list, default=None,
                        help="sweep values (dBW, Hz or antenna counts depending on the verb)")
    common.add_argument("--values2", type=_float_list, default=None, help="power axis of the contour (dBW)")

    p = argparse.ArgumentParser(prog="iabsim", description="IAB-assisted UAV network simulator")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="verb", required=True, metavar="verb")
    helps = {
        "simulate": "one drop: per-link rates and per-method allocation",
        "sweep-power": "rate, EE and mu versus transmit power",
        "contour": "sum-rate over a bandwidth x power grid",
        "sweep-antennas": "sum-rate versus array size at 0 dBW",
        "convergence": "hybrid residual and SCA mu traces for one drop",
        "balance": "backhaul balance bar table per drop",
    }
    for verb in VERBS:
        sub.add_parser(verb, parents=[common], help=helps[verb])
    return p


def _settings(args) -> SolverSettings:
    return SolverSettings(target_lambda=args.target_lambda, sca_eps=args.sca_eps, mu_fixed=args.mu_fixed)


def _manifest(args, config: ScenarioConfig, seed: int, outputs: List[str], **extra) -> dict:
    flags = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()
             if k not in ("out", "jobs", "config")}
    return {"verb": args.verb, "version": __version__, "seed": seed, "config": config_to_dict(config),
            "flags": flags, "outputs": outputs, **extra}


def _sweep(args, config, seed, name, variable, values, default_trials, methods,
           variable2=None, values2=(), with_digital=False, extra_config=None):
    spec = SweepSpec(variable=variable, values=values, trials=args.trials or default_trials,
                     methods=methods, config=config, seed=seed, settings=_settings(args),
                     variable2=variable2, values2=values2, with_digital=with_digital)
    rows = run_sweep(spec, jobs=args.jobs)
    write_csv(args.out / f"{name}.csv", rows, TRIAL_COLUMNS)
    write_csv(args.out / f"{name}_summary.csv", summarize(rows), SUMMARY_COLUMNS)
    n_err = sum(r["method"] == "error" for r in rows)
    if n_err:
        log.warning("%d of %d drops failed; see error rows", n_err, len(rows))
    return [f"{name}.csv", f"{name}_summary.csv"], {"sweep": {"variable": variable, "values": list(values),
                                                               "variable2": variable2, "values2": list(values2),
                                                               "trials": spec.trials,
                                                               "methods": list(methods)}}


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config = load_config(args.config) if args.config else ScenarioConfig()
    seed = config.rng_seed if args.seed is None else args.seed
    if seed < 0:
        raise ConfigError("seed must be non-negative", field="seed")
    if args.trials is not None and args.trials < 1:
        raise ConfigError("trials must be at least 1", field="trials")
    args.out.mkdir(parents=True, exist_ok=True)
    settings = _settings(args)
    extra = {}

    if args.verb == "simulate":
        methods = args.methods or METHODS
        drop = run_drop(config, seed, 0, methods, settings)
        write_csv(args.out / "links.csv", drop.report.csv_rows(),
                  ["tier", "link_index", "distance_m", "signal_w", "interference_w", "noise_w", "se_bps_hz"])
        write_csv(args.out / "allocation.csv", [drop.allocations[m].csv_row() for m in methods],
                  ["method", "mu_a", "total_rate_bps", "backhaul_slack", "iterations", "converged"])
        precoders = {tier: precoder_to_dict(hp) for tier, hp in
                     (("aerial", drop.hybrid_aerial), ("terrestrial", drop.hybrid_terrestrial)) if hp is not None}
        write_json(args.out / "precoders.json", precoders)
        outputs = ["links.csv", "allocation.csv", "precoders.json"]

    elif args.verb == "sweep-power":
        outputs, extra = _sweep(args, config, seed, "sweep_power", "power_dbw", args.values or DEFAULT_POWERS_DBW,
                                50, args.methods or ("closed-form", "sca", "fixed"), with_digital=True)

    elif args.verb == "contour":
        outputs, extra = _sweep(args, config, seed, "contour", "bandwidth_hz", args.values or DEFAULT_CONTOUR_BW_HZ,
                                50, args.methods or ("closed-form", "fixed"),
                                variable2="power_dbw", values2=args.values2 or DEFAULT_CONTOUR_POWERS_DBW)

    elif args.verb == "sweep-antennas":
        outputs, extra = _sweep(args, config.with_power_dbw(0.0), seed, "sweep_antennas", "num_antennas",
                                args.values or DEFAULT_ANTENNAS, 50, args.methods or ("closed-form", "fixed"))

    elif args.verb == "convergence":
        traces = convergence_traces(config, seed, 0, settings)
        n = max(len(t) for t in traces.values())
        rows = [{"iteration": k, **{name: (t[k] if k < len(t) else None) for name, t in traces.items()}}
                for k in range(n)]
        write_csv(args.out / "convergence.csv", rows, ["iteration"] + list(traces))
        outputs = ["convergence.csv"]

    elif args.verb == "balance":
        methods = args.methods or ("closed-form", "fixed")
        rows = []
        for t in range(args.trials or 1):
            drop = run_drop(config, seed, t, methods, settings)
            rows += [{"trial": t, **backhaul_balance_report(drop, m)} for m in methods]
        write_csv(args.out / "balance.csv", rows,
                  ["trial", "method", "mu_a", "R", "R_bh", "R_t", "R_a", "balance_error"])
        outputs = ["balance.csv"]

    write_json(args.out / "manifest.json", _manifest(args, config, seed, outputs, **extra))
    for name in outputs:
        print(args.out / name)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("IABSIM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(argv)
    except ConfigError as exc:
        print(f"iabsim: config error: {exc}", file=sys.stderr)
        return 2
    except IABSimError as exc:
        print(f"iabsim: {exc.module} error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"iabsim: I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
