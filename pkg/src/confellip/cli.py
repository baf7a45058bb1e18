"""Command-line interface: ``confellip <command> ...``.

Exit codes: 0 on success, 2 for configuration or input errors, 3 for
numerical failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from confellip import harness
from confellip.conformal import apply_volume_floor, fit_ccle, region_to_dict
from confellip.errors import ConfEllipError, ConfigError, NumericalError

log = logging.getLogger("confellip")

DEMO_CONFIG = harness.ExperimentConfig(n_histo=20, n_test=100)


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")], dtype=np.float64)
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of integers, got {text!r}") from None


def _json_safe(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def cmd_region(args) -> int:
    calib_file = harness.read_calibration_csv(args.calib)
    calib = calib_file.calibration_set
    x_new = _floats(args.x)
    if x_new.size != calib.k:
        raise ConfigError(f"--x has {x_new.size} entries, calibration file has k={calib.k}")
    fit = fit_ccle(calib, args.alpha, args.lam)
    region = fit.region(x_new)
    if args.vmin is not None:
        region = apply_volume_floor(region, args.vmin)
    space = "residual"
    if args.yhat is not None:
        yhat = _floats(args.yhat)
        if yhat.size != calib.l:
            raise ConfigError(f"--yhat has {yhat.size} entries, calibration file has l={calib.l}")
        region = region.shifted(yhat)
        space = "output"
    out = region_to_dict(region)
    out["space"] = space
    out["dim"] = calib.l
    out["q"] = fit.q
    _write_text(args.out, json.dumps(_json_safe(out), indent=2) + "\n")
    return 0


def cmd_histo(args) -> int:
    config = harness.ExperimentConfig.from_json(args.config)
    report = harness.run_histogram(config, n_jobs=args.jobs)
    harness.write_report(report, args.out, args.format)
    for name, summary in report.summaries.items():
        log.info("%s: mean=%.6g std=%.6g", name, summary.mean, summary.std)
    return 0


def cmd_table1(args) -> int:
    config = harness.ExperimentConfig.from_json(args.config)
    table = harness.table1_experiment(config, _floats(args.q_list).tolist(), n_jobs=args.jobs)
    rows = [asdict(r) for r in table.rows]
    harness.write_rows(rows, ["q", "closed_form", "monte_carlo", "rel_error", "std_error"], args.out)
    log.info("empty fraction %.6g over %d draws", table.empty_fraction, table.n_draws)
    return 0


def cmd_table2(args) -> int:
    config = harness.ExperimentConfig.from_json(args.config)
    grid = harness.table2_experiment(config, _floats(args.nu_list).tolist(),
                                     _ints(args.k_list), n_jobs=args.jobs)
    harness.write_rows(grid.to_rows(), ["nu", "k", "mean_volume", "is_argmin"], args.out)
    return 0


def cmd_surplus(args) -> int:
    config = harness.ExperimentConfig.from_json(args.config)
    rows = harness.surplus_volume_experiment(config, _ints(args.n_list), n_jobs=args.jobs)
    harness.write_rows([asdict(r) for r in rows],
                       ["n", "est_surplus", "std_error", "violations", "n_instances"], args.out)
    return 0


def cmd_demo(args) -> int:
    config = harness.ExperimentConfig.from_json(args.config) if args.config else DEMO_CONFIG
    report = harness.run_histogram(config, n_jobs=args.jobs)
    if args.out:
        harness.write_report(report, args.out)
    print(f"{config.distribution} k={config.k} l={config.l} n_calib={config.n_calib} "
          f"draws={config.n_histo * config.n_test}")
    for name, summary in report.summaries.items():
        print(f"  {name:<14s} mean={summary.mean:.4f} std={summary.std:.4f}")
    return 0


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="confellip", description="Conformal prediction ellipsoids")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("region", help="ellipsoid for one input from a calibration CSV")
    p.add_argument("--calib", required=True)
    p.add_argument("--x", required=True, help="comma-separated input vector")
    p.add_argument("--yhat", help="comma-separated prediction; shifts the region to output space")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--vmin", type=float)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_region)

    def experiment(name: str, func, help_text: str) -> argparse.ArgumentParser:
        q = sub.add_parser(name, help=help_text)
        q.add_argument("--config", required=True)
        q.add_argument("--out", required=True)
        q.add_argument("--jobs", type=int, default=1)
        q.set_defaults(func=func)
        return q

    experiment("histo", cmd_histo, "volume/coverage histogram report").add_argument(
        "--format", choices=("csv", "json"), default="csv")
    experiment("table1", cmd_table1, "closed-form vs Monte Carlo volume moments").add_argument(
        "--q-list", default="1,2,3")
    t2 = experiment("table2", cmd_table2, "mean volume against smoothness and k")
    t2.add_argument("--nu-list", default="0.5,1.5,2.5,3.5")
    t2.add_argument("--k-list", default="0,1,2,3,4,5,6")
    experiment("surplus", cmd_surplus, "surplus volume over the exact region").add_argument(
        "--n-list", default="50,200,1000")

    d = sub.add_parser("demo", help="small Gaussian run with summary output")
    d.add_argument("--config")
    d.add_argument("--out")
    d.add_argument("--jobs", type=int, default=1)
    d.set_defaults(func=cmd_demo)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except (ConfEllipError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
