"""Command-line front end: ``convert``, ``info``, ``cv``, ``predict`` and ``sweep``.

Failures print one ``error: <category>: <message>`` line to stderr and exit
with 2 (config), 3 (input) or 4 (numerical).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .data import DRUG, TARGET, assemble_bundle, load_any, parse_labeled_matrix, write_bundle
from .errors import ConfigError, InputError, LmprojError
from .evaluation import (
    METHODS,
    MODES,
    Fold,
    FoldPlan,
    MethodSpec,
    _SolveCache,
    check_compatible,
    default_grid,
    make_folds,
    run_folds,
    score,
    tune_spec,
)
from .scoring import mask_and_rank
from .solver import SolverConfig

log = logging.getLogger("lmproj")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _grid(text: str) -> tuple:
    """Parse ``a,b,c`` or ``start:stop:step`` (inclusive stop)."""
    text = text.strip()
    if ":" in text:
        try:
            start, stop, step = (float(x) for x in text.split(":"))
        except ValueError:
            raise ConfigError(f"bad grid {text!r}; expected start:stop:step") from None
        if step <= 0 or stop < start:
            raise ConfigError(f"bad grid {text!r}")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(np.round(start + i * step, 10)) for i in range(count))
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"bad grid {text!r}; expected comma-separated numbers") from None
    if not vals:
        raise ConfigError("grid is empty")
    return vals


def _gammas(text: str) -> tuple:
    vals = None if ":" in text else _grid(text)
    if vals is None or len(vals) != 3:
        raise ConfigError("--gammas needs three comma-separated weights")
    return vals


# ---------------------------------------------------------------------------
# argument parsing


def _add_dataset_args(p):
    p.add_argument("--dataset", required=True,
                   help="canonical directory, MATADOR .tsv, or <prefix>_admat_dgc.txt")
    p.add_argument("--drug-sim", help="labeled drug similarity grid (overrides any found with the dataset)")
    p.add_argument("--target-sim", help="labeled target similarity grid")
    p.add_argument("--orientation", choices=["auto", "drugs-rows", "targets-rows"], default="auto",
                   help="row orientation of labeled adjacency files")
    p.add_argument("--name", help="dataset label (defaults to the file-derived name)")


def _add_method_args(p, needs_mode=True):
    p.add_argument("--method", choices=METHODS, required=True)
    if needs_mode:
        p.add_argument("--mode", choices=MODES, default="pair")
    p.add_argument("--alpha", type=float, help="set every alpha at once")
    p.add_argument("--alpha-d", type=float, help="alpha of the drug-side interaction solve (ZA)")
    p.add_argument("--alpha-t", type=float, help="alpha of the target-side interaction solve (ZA)")
    p.add_argument("--alpha-sd", type=float, help="alpha of the drug similarity solve (ZD)")
    p.add_argument("--alpha-st", type=float, help="alpha of the target similarity solve (ZT)")
    p.add_argument("--tune", nargs="?", const="default", default=None,
                   help="select alphas (or Katz beta) by nested validation; optional grid")
    p.add_argument("--beta", type=float, help="Katz decay; selected from a grid when omitted")
    p.add_argument("--gammas", default="0.5,0.25,0.25", help="ZADT weights g1,g2,g3")
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=42)


def _add_cv_args(p):
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--threads", type=int, default=1, help="evaluate folds concurrently")
    p.add_argument("--output", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lmproj", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lmproj {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="write a dataset in canonical form")
    _add_dataset_args(p)
    p.add_argument("--output", required=True)

    p = sub.add_parser("info", help="dataset statistics")
    _add_dataset_args(p)
    p.add_argument("--json", action="store_true", help="print JSON instead of a table")

    p = sub.add_parser("cv", help="repeated k-fold cross-validation")
    _add_dataset_args(p)
    _add_method_args(p)
    _add_cv_args(p)

    p = sub.add_parser("predict", help="rank unobserved pairs on the full data")
    _add_dataset_args(p)
    _add_method_args(p, needs_mode=False)
    p.add_argument("--top-k", type=int, default=10, help="rows to write; 0 writes all")
    p.add_argument("--output", required=True)

    p = sub.add_parser("sweep", help="cross-validated metrics over an alpha grid")
    _add_dataset_args(p)
    _add_method_args(p)
    _add_cv_args(p)
    p.add_argument("--grid", help="alpha grid (a,b,c or start:stop:step); default depends on method")
    return parser


# ---------------------------------------------------------------------------
# helpers


def _load(args):
    bundle = load_any(args.dataset, orientation=args.orientation)
    ds, ts = bundle.drug_sim, bundle.target_sim
    for path, side in ((args.drug_sim, DRUG), (args.target_sim, TARGET)):
        if path:
            try:
                with open(path, encoding="utf-8") as fh:
                    sim = parse_labeled_matrix(fh, "similarity", side=side)
            except OSError as exc:
                raise InputError(f"cannot read {path}: {exc.strerror}") from None
            if side == DRUG:
                ds = sim
            else:
                ts = sim
    if ds is not bundle.drug_sim or ts is not bundle.target_sim:
        bundle = assemble_bundle(bundle.interactions, ds, ts, bundle.name)
    if args.name:
        bundle.name = args.name
    return bundle


def _spec(args) -> MethodSpec:
    base = MethodSpec(args.method)
    alphas = {}
    if args.alpha is not None:
        alphas = dict(alpha_d=args.alpha, alpha_t=args.alpha, alpha_sd=args.alpha, alpha_st=args.alpha)
    for name in ("alpha_d", "alpha_t", "alpha_sd", "alpha_st"):
        v = getattr(args, name)
        if v is not None:
            alphas[name] = v
    if args.max_iter < 1:
        raise ConfigError("--max-iter must be at least 1")
    solver = SolverConfig(max_iter=args.max_iter, epsilon=args.epsilon)
    tune = None
    if args.tune is not None and args.tune != "default":
        tune = _grid(args.tune)
    elif args.tune is not None and args.method != "Katz":
        tune = default_grid(base)
    # Katz without a fixed --beta is always selected on the training part
    spec = replace(base, gammas=_gammas(args.gammas), beta=args.beta, tune=tune, solver=solver, **alphas)
    return spec


def _write_text(path: Path, text: str):
    path.write_bytes(text.encode("utf-8"))


def _write_json(path: Path, obj):
    _write_text(path, json.dumps(obj, indent=2) + "\n")


def _metrics_csv(result) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["repetition", "fold", "auc", "aupr"])
    for r in result.per_fold:
        w.writerow([r.repetition, r.fold, _fmt(r.auc), _fmt(r.aupr)])
    return out.getvalue()


def _summary(command, bundle, spec, plan, result, extra=None) -> dict:
    d = {
        "command": command,
        "version": __version__,
        "dataset": bundle.stats(),
        "config": {
            **spec.params(),
            "mode": plan.mode,
            "folds": plan.k,
            "repetitions": plan.repetitions,
            "seed": plan.seed,
        },
        "aggregate": {
            "mean_auc": result.mean_auc,
            "mean_aupr": result.mean_aupr,
            "std_auc": result.std_auc,
            "std_aupr": result.std_aupr,
            "n_folds": len(result.per_fold),
        },
        "repetition_means": result.repetition_means(),
        "per_fold": [
            {"repetition": r.repetition, "fold": r.fold, "auc": r.auc, "aupr": r.aupr, "params": r.params}
            for r in result.per_fold
        ],
        "solver": result.solver_summary(),
    }
    if extra:
        d.update(extra)
    return d


def _plan(args) -> FoldPlan:
    return FoldPlan(args.mode, args.folds, args.repetitions, args.seed)


# ---------------------------------------------------------------------------
# commands


def cmd_convert(args):
    bundle = _load(args)
    out = write_bundle(bundle, args.output)
    print(f"wrote {bundle.name} to {out}")


def cmd_info(args):
    stats = _load(args).stats()
    if args.json:
        print(json.dumps(stats, indent=2))
        return
    print("dataset\tdrugs\ttargets\tinteractions\tsparsity")
    print(f"{stats['name']}\t{stats['drugs']}\t{stats['targets']}\t{stats['interactions']}\t{stats['sparsity']:.3f}")


def cmd_cv(args):
    t0 = time.perf_counter()
    bundle = _load(args)
    spec = _spec(args)
    plan = _plan(args)
    check_compatible(bundle, spec, plan.mode)
    result = run_folds(bundle, spec, make_folds(bundle, plan), plan, args.threads)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    _write_text(out / "metrics.csv", _metrics_csv(result))
    _write_json(out / "summary.json", _summary("cv", bundle, spec, plan, result))
    _write_json(out / "timing.json", {"wall_clock_seconds": time.perf_counter() - t0, "threads": args.threads})
    print(f"{bundle.name} {spec.method} {plan.mode}: mean AUC {result.mean_auc:.4f}, mean AUPR {result.mean_aupr:.4f}")


def cmd_sweep(args):
    t0 = time.perf_counter()
    bundle = _load(args)
    spec = replace(_spec(args), tune=None)
    plan = _plan(args)
    check_compatible(bundle, spec, plan.mode)
    grid = _grid(args.grid) if args.grid else default_grid(spec)
    if any(not g > 0 for g in grid):
        raise ConfigError("alpha grid values must be positive")
    folds = make_folds(bundle, plan)
    cache = _SolveCache()
    out = Path(args.output)
    (out / "metrics").mkdir(parents=True, exist_ok=True)
    rows = io.StringIO()
    w = csv.writer(rows, lineterminator="\n")
    w.writerow(["alpha", "mean_auc", "mean_aupr", "std_auc", "std_aupr"])
    points = []
    for g in grid:
        result = run_folds(bundle, spec.with_alpha(g), folds, plan, args.threads, cache)
        w.writerow([_fmt(g), _fmt(result.mean_auc), _fmt(result.mean_aupr), _fmt(result.std_auc), _fmt(result.std_aupr)])
        _write_text(out / "metrics" / f"alpha_{_fmt(g)}.csv", _metrics_csv(result))
        points.append({"alpha": g, "mean_auc": result.mean_auc, "mean_aupr": result.mean_aupr,
                       "std_auc": result.std_auc, "std_aupr": result.std_aupr,
                       "solver": result.solver_summary()})
        log.info("alpha=%s AUC=%.4f AUPR=%.4f", _fmt(g), result.mean_auc, result.mean_aupr)
    _write_text(out / "sweep.csv", rows.getvalue())
    _write_json(out / "summary.json", {
        "command": "sweep",
        "version": __version__,
        "dataset": bundle.stats(),
        "config": {**spec.params(), "grid": list(grid), "mode": plan.mode, "folds": plan.k,
                   "repetitions": plan.repetitions, "seed": plan.seed},
        "points": points,
    })
    _write_json(out / "timing.json", {"wall_clock_seconds": time.perf_counter() - t0, "threads": args.threads})
    best = max(points, key=lambda p: p["mean_aupr"])
    print(f"{bundle.name} {spec.method} {plan.mode}: best AUPR {best['mean_aupr']:.4f} at alpha={_fmt(best['alpha'])}")


def cmd_predict(args):
    t0 = time.perf_counter()
    bundle = _load(args)
    spec = _spec(args)
    check_compatible(bundle, spec, "pair")
    if args.top_k < 0:
        raise ConfigError("--top-k must be nonnegative")
    train = bundle.interactions
    cache = _SolveCache()
    full = Fold(0, 0, train, np.empty((0, 2), dtype=int), np.empty(0, int), np.empty(0, int), np.empty(0))
    spec = tune_spec(bundle, spec, full, cache, "pair", args.seed)
    z = score(bundle, spec, train.a, cache)
    ranked = mask_and_rank(z, train, None if args.top_k == 0 else args.top_k)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "drug_id", "target_id", "score"])
    for k, (d, t, s) in enumerate(ranked, start=1):
        w.writerow([k, d, t, _fmt(s)])
    _write_text(out / "predictions.csv", buf.getvalue())
    _write_json(out / "summary.json", {
        "command": "predict",
        "version": __version__,
        "dataset": bundle.stats(),
        "config": {**spec.params(), "top_k": args.top_k, "seed": args.seed},
        "solver": list(z.diagnostics),
        "predictions": len(ranked),
    })
    _write_json(out / "timing.json", {"wall_clock_seconds": time.perf_counter() - t0})
    print(f"wrote {len(ranked)} predictions to {out / 'predictions.csv'}")


COMMANDS = {"convert": cmd_convert, "info": cmd_info, "cv": cmd_cv, "predict": cmd_predict, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        COMMANDS[args.command](args)
    except LmprojError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: input: {exc}", file=sys.stderr)
        return InputError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
