"""Command-line front end: select / sdof / simulate / cv.

Outputs are machine-readable (JSON + CSV) for offline plotting; every output
embeds or sits next to a run manifest describing the resolved configuration.
Exit codes: 0 success, 2 partial per-k failure (results still written),
1 fatal error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import QuadriskError
from .kernels import GaussianKernel
from .mixture import FitConfig
from .risk import CVConfig, RandomSubsets, VFold, cv_unbiased_risk
from .selection import risk_curve, scan, standardize
from .simgen import ScanConfig, ScenarioSpec, run_experiment
from .tuning import recommend_h

_MODEL_IDS = {"1": "M1", "2": "M2", "3": "M3", "4": "M4U", "u": "M4U",
              "5": "M5", "6": "M6", "7": "M7"}


def _read_csv(path, header=False) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    except (OSError, ValueError) as exc:
        raise QuadriskError(f"cannot read CSV {path}: {exc}") from exc
    if data.size == 0:
        raise QuadriskError(f"no rows in {path}")
    return data


def _manifest(command, config, seed, input_path=None):
    digest = None
    if input_path is not None:
        digest = hashlib.sha256(Path(input_path).read_bytes()).hexdigest()
    return {
        "command": command,
        "config": config,
        "seed": seed,
        "version": __version__,
        "input_sha256": digest,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def _resolve_h(args, data):
    if args.h == "auto":
        _, h = recommend_h(data)
        return float(h)
    return float(args.h)


def _cmd_select(args) -> int:
    data = _read_csv(args.input, header=args.header)
    if args.standardize:
        data, _ = standardize(data)
    h = _resolve_h(args, data)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    fit_cfg = FitConfig(seed=args.seed)
    result = scan(
        data,
        args.kmin,
        args.kmax,
        GaussianKernel(h=h, dim=data.shape[1]),
        fit_cfg,
        structure=args.cov,
        extra_m=args.m,
        check_standardized=False,
    )
    manifest = _manifest(
        "select",
        {
            "kmin": args.kmin,
            "kmax": args.kmax,
            "h": h,
            "cov": args.cov,
            "criteria": args.criteria,
            "standardize": args.standardize,
            "m": args.m,
            "threads": args.threads,
        },
        args.seed,
        args.input,
    )
    payload = {"manifest": manifest, "result": result.to_dict()}
    (outdir / "scan.json").write_text(json.dumps(payload, indent=2))
    with open(outdir / "risk_curve.csv", "w", newline="") as fh:
        rows = risk_curve(result)
        writer = csv.DictWriter(
            fh, fieldnames=["k", "mlf_hat", "pec_hat", "qaic", "qbic", "benchmark"]
        )
        writer.writeheader()
        writer.writerows(rows)
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2))
    wanted = [c.strip().upper() for c in args.criteria.split(",")]
    for crit in wanted:
        print(f"{crit}: {result.decisions.get(crit)}")
    if any(r.failed for r in result.per_k):
        return 2
    return 0


def _cmd_sdof(args) -> int:
    data = _read_csv(args.input, header=args.header)
    if args.standardize:
        data, _ = standardize(data)
    try:
        lo, hi, count = args.h_grid.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError as exc:
        raise QuadriskError(f"bad --h-grid {args.h_grid!r}, expected lo:hi:count") from exc
    if not (0 < lo < hi) or count < 1:
        raise QuadriskError("need 0 < lo < hi and count >= 1 in --h-grid")
    grid = np.geomspace(lo, hi, count)
    reports, recommended = recommend_h(data, grid)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(out)
    writer.writerow(["h", "sdof", "verdict"])
    for r in reports:
        writer.writerow([f"{r.h:.6g}", f"{r.sdof:.6g}", r.verdict])
    if args.out:
        out.close()
        print(f"recommended h: {recommended:.6g}")
    return 0


def _cmd_simulate(args) -> int:
    model = _MODEL_IDS.get(args.model.lower())
    if model is None:
        raise QuadriskError(f"unknown model id {args.model!r} (use 1-7 or u)")
    spec = ScenarioSpec(id=model, n=args.n)
    cfg = ScanConfig(
        k_min=1,
        k_max=args.kmax,
        h="auto" if args.h == "auto" else float(args.h),
        fit=FitConfig(restarts=args.restarts),
    )
    table = run_experiment(spec, args.reps, cfg, seed=args.seed)
    table.write_csv(args.out)
    manifest = _manifest(
        "simulate",
        {"model": model, "n": args.n, "reps": args.reps, "kmax": args.kmax,
         "h": args.h, "threads": args.threads},
        args.seed,
    )
    Path(args.out).with_suffix(".manifest.json").write_text(json.dumps(manifest, indent=2))
    print(f"wrote {args.out}")
    return 0


def _cmd_cv(args) -> int:
    data = _read_csv(args.input, header=args.header)
    if args.standardize:
        data, _ = standardize(data)
    n = data.shape[0]
    if args.m is not None and args.m > n - 2:
        raise QuadriskError(
            f"--m {args.m} rejected: unbiased subset estimation requires m <= n-2 (n={n})"
        )
    if args.subsets is not None:
        if args.m is None:
            raise QuadriskError("--subsets requires --m")
        cfg = CVConfig(RandomSubsets(args.subsets, seed=args.seed), m=args.m)
    else:
        cfg = CVConfig(VFold(args.folds, seed=args.seed))
    h = _resolve_h(args, data)
    spec = GaussianKernel(h=h, dim=data.shape[1])
    fit_cfg = FitConfig(seed=args.seed)
    report = []
    for k in range(args.kmin, args.kmax + 1):
        est, se = cv_unbiased_risk(data, k, args.cov, fit_cfg, spec, cfg)
        report.append({"k": k, "estimate": est, "stderr": se})
        print(f"k={k}: {est:.6g} +- {se:.6g}")
    manifest = _manifest(
        "cv",
        {"kmin": args.kmin, "kmax": args.kmax, "m": args.m, "folds": args.folds,
         "subsets": args.subsets, "h": h, "cov": args.cov, "threads": args.threads},
        args.seed,
        args.input,
    )
    if args.out:
        Path(args.out).write_text(json.dumps({"manifest": manifest, "report": report}, indent=2))
    return 0


def _add_common(p, with_input=True):
    if with_input:
        p.add_argument("--input", required=True, help="input CSV, one observation per row")
        p.add_argument("--header", action="store_true", help="skip a header row")
        std = p.add_mutually_exclusive_group()
        std.add_argument("--standardize", dest="standardize", action="store_true", default=True)
        std.add_argument("--no-standardize", dest="standardize", action="store_false")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("QDRISK_THREADS", "0")),
        help="0 = auto (recorded in the manifest; numeric kernels use BLAS threading)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quadrisk")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="scan k and report model-selection decisions")
    _add_common(p)
    p.add_argument("--kmin", type=int, default=1)
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--h", default="auto", help="'auto' (sDOF rule) or a positive number")
    p.add_argument("--cov", choices=["full", "diagonal", "spherical"], default="full")
    p.add_argument("--criteria", default="qaic,qbic,mra,aic,bic")
    p.add_argument("--m", type=float, default=None, help="extra risk column at this m")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("sdof", help="spectral degrees of freedom over a bandwidth grid")
    _add_common(p)
    p.add_argument("--h-grid", default="0.1:3.0:24", help="lo:hi:count, log-spaced")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_sdof)

    p = sub.add_parser("simulate", help="replication experiment over a canonical scenario")
    _add_common(p, with_input=False)
    p.add_argument("--model", required=True, help="1..7 or u (the U-shape)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--h", default="auto")
    p.add_argument("--restarts", type=int, default=2)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("cv", help="subset-based unbiased risk estimate per k")
    _add_common(p)
    p.add_argument("--kmin", type=int, default=1)
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--subsets", type=int, default=None)
    p.add_argument("--h", default="auto")
    p.add_argument("--cov", choices=["full", "diagonal", "spherical"], default="full")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_cv)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except QuadriskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
