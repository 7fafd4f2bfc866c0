"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 tuning failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .benchmark import MonteCarloConfig, emit_report, run_monte_carlo
from .core import AlphaPolynomial, DatasetError, HyperParams, read_dataset_csv
from .estimator import (DivergedSimulation, SingularSystem, ZeroVariance, bfr,
                        fit, load_model, save_model, simulate)
from .filter2d import CutoffOutOfRange, butterworth_alpha
from .tuner import AllDiverged, CuriositySet, tune

EXIT_INPUT, EXIT_NUMERIC, EXIT_TUNING = 2, 3, 4


class InputError(Exception):
    pass


def _load_config(path) -> dict:
    if path is None:
        return {}
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise InputError(f"{path}: config must be a JSON object")
    return obj


def _omega_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad omega list {text!r}") from exc


def _merge_model_params(args, cfg: dict):
    """Combine config-file values with flags (flags win)."""
    hyper = dict(cfg.get("hyper", {}))
    for flag, key in (("nx", "n_x"), ("gamma", "gamma"), ("sigma", "sigma")):
        if getattr(args, flag, None) is not None:
            hyper[key] = getattr(args, flag)
    hyper = HyperParams(**hyper)

    cur = dict(cfg.get("curiosities") or {})
    if getattr(args, "omega_set", None) is not None:
        cur["omegas"] = args.omega_set
    if getattr(args, "mu", None) is not None:
        cur["mu"] = args.mu
    Ts = args.ts if getattr(args, "ts", None) is not None else cfg.get("Ts", 1.0)
    if "omegas" in cur:
        curiosities = CuriositySet(**cur)
    else:
        curiosities = CuriositySet.default(Ts, cur.get("mu", 130.0))
    return hyper, curiosities, float(Ts)


def _print_kv(key, value):
    print(f"{key}: {value}")


def cmd_estimate(args) -> int:
    cfg = _load_config(args.config)
    hyper, curiosities, Ts = _merge_model_params(args, cfg)
    mode = args.alpha_mode or cfg.get("alpha_mode", "tuned")
    holdout = cfg.get("holdout", 0.0)
    d = read_dataset_csv(args.data, Ts=Ts)
    if mode == "origin":
        alpha, label = AlphaPolynomial.origin(hyper.n_x), "baseline"
    elif mode == "butterworth":
        omega_c = args.omega_c if args.omega_c is not None else cfg.get("omega_c")
        if omega_c is None:
            raise InputError("--alpha-mode butterworth requires --omega-c")
        alpha, label = butterworth_alpha(float(omega_c), Ts, hyper.n_x), repr(float(omega_c))
    else:
        rep = tune(d, hyper, curiosities, holdout=holdout)
        alpha, label = butterworth_alpha(rep.omega_star, Ts, hyper.n_x), repr(rep.omega_star)
    model = fit(d, hyper, alpha)
    save_model(model, args.out)
    _print_kv("model", args.out)
    _print_kv("omega_c", label)
    _print_kv("training BFR", repr(bfr(d.y, simulate(model, d.u, d.p))))
    return 0


def cmd_tune(args) -> int:
    cfg = _load_config(args.config)
    hyper, curiosities, Ts = _merge_model_params(args, cfg)
    d = read_dataset_csv(args.data, Ts=Ts)
    rep = tune(d, hyper, curiosities, holdout=cfg.get("holdout", 0.0))
    rep.write_csv(args.out)
    for om, j in zip(rep.omegas, rep.J):
        _print_kv(f"J({om:.6g})", f"{j:.6f}")
    _print_kv("omega_star", repr(rep.omega_star))
    return 0


def cmd_simulate(args) -> int:
    path = Path(args.model)
    try:
        model = load_model(path)
    except OSError as exc:
        raise InputError(f"cannot read model {path}: {exc.strerror}") from exc
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"malformed model file {path}: {exc}") from exc
    u, y, p = read_dataset_csv(args.data, Ts=model.dataset.Ts, require_y=False)
    if p.shape[1] != model.dataset.n_p:
        raise InputError(
            f"{args.data}: {p.shape[1]} scheduling columns, model expects "
            f"{model.dataset.n_p}")
    y_sim = simulate(model, u, p)
    with Path(args.out).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "y_sim"])
        for k, v in enumerate(y_sim, start=1):
            w.writerow([k, repr(float(v))])
    _print_kv("output", args.out)
    if y is not None:
        try:
            _print_kv("BFR", repr(bfr(y, y_sim)))
        except ZeroVariance:
            _print_kv("BFR", "undefined (constant y)")
    return 0


def cmd_benchmark(args) -> int:
    cfg = _load_config(args.config)
    if args.runs is not None:
        cfg["runs"] = args.runs
    if args.snr is not None:
        cfg["snr_db"] = args.snr
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.ts is not None:
        cfg["Ts"] = args.ts
    hyper = dict(cfg.get("hyper", {}))
    for flag, key in (("nx", "n_x"), ("gamma", "gamma"), ("sigma", "sigma")):
        if getattr(args, flag) is not None:
            hyper[key] = getattr(args, flag)
    cfg["hyper"] = hyper
    cur = cfg.get("curiosities")
    if args.omega_set is not None or args.mu is not None:
        cur = dict(cur or {})
        if args.omega_set is not None:
            cur["omegas"] = args.omega_set
        if args.mu is not None:
            cur["mu"] = args.mu
        if "omegas" not in cur:
            cur["omegas"] = CuriositySet.default(cfg.get("Ts", 1.0)).omegas.tolist()
    cfg["curiosities"] = cur
    try:
        mc = MonteCarloConfig.from_dict(cfg)
    except TypeError as exc:
        raise InputError(f"bad benchmark config: {exc}") from exc
    rep = run_monte_carlo(mc, workers=args.workers)
    emit_report(rep, args.out)
    for method, (mean, std) in rep.summary().items():
        print(f"{method}: mean BFR {mean:.2f}%  std {std:.2f}")
    _print_kv("report", args.out)
    return 0


def _add_model_flags(sp, with_alpha: bool = False):
    sp.add_argument("--config", help="JSON config file")
    sp.add_argument("--nx", type=int, help="model order (default 2)")
    sp.add_argument("--gamma", type=float, help="regularization weight (default 100)")
    sp.add_argument("--sigma", type=float, help="RBF kernel width (default 0.2)")
    sp.add_argument("--mu", type=float, help="barycenter sharpness (default 130)")
    sp.add_argument("--omega-set", type=_omega_list,
                    help="comma-separated curiosity cutoffs in rad/s")
    sp.add_argument("--ts", type=float, help="sampling period in seconds (default 1)")
    if with_alpha:
        sp.add_argument("--alpha-mode", choices=("origin", "butterworth", "tuned"))
        sp.add_argument("--omega-c", type=float, help="cutoff for --alpha-mode butterworth")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpv-lssvm",
        description="LPV state-space identification with a 2D-filtered LS-SVM")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("estimate", help="fit a model and write model.json")
    sp.add_argument("data")
    sp.add_argument("--out", default="model.json")
    _add_model_flags(sp, with_alpha=True)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("tune", help="barycenter search for the filter cutoff")
    sp.add_argument("data")
    sp.add_argument("--out", default="tuning.csv")
    _add_model_flags(sp)
    sp.set_defaults(func=cmd_tune)

    sp = sub.add_parser("simulate", help="free-run simulation of a saved model")
    sp.add_argument("model")
    sp.add_argument("data")
    sp.add_argument("--out", default="y_sim.csv")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("benchmark", help="Monte Carlo case study")
    sp.add_argument("config", nargs="?", help="JSON file with MonteCarloConfig fields")
    sp.add_argument("--runs", type=int)
    sp.add_argument("--snr", type=float, help="SNR in dB (inf for noiseless)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", default="report")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--nx", type=int)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--omega-set", type=_omega_list)
    sp.add_argument("--ts", type=float)
    sp.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, DatasetError, CutoffOutOfRange, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SingularSystem, DivergedSimulation, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except AllDiverged as exc:
        print(f"tuning failed: {exc}", file=sys.stderr)
        return EXIT_TUNING
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
