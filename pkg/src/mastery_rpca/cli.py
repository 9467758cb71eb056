"""Command-line interface: ``mastery-rpca <command> ...``.

Commands: synth, preprocess, recover, extract, filter, evaluate, embed,
render, pipeline.  Every command is deterministic given its inputs, flags
and ``--seed``; JSON floats are written with 12 significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import preprocess, render
from .extraction import Bicluster, BiclusterSet, choose_k, extract_biclusters, topic_embedding
from .matrix import DenseMatrix, read_csv, write_csv
from .metrics import evaluate_biclusters, sparse_prf, spike_mask
from .recovery import RecoveryParams, default_lambda, estimate_sigma, recover
from .significance import filter_biclusters
from .synthgen import GroundTruth, make_dataset, parse_spec, stage_seed, preset_spec

SCHEMA = 1


class StageError(Exception):
    def __init__(self, stage, cause):
        self.stage = stage
        super().__init__(f"[{stage}] {cause}")


# -- JSON helpers ----------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.12g}")
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path):
    return json.loads(Path(path).read_text())


def _load_matrix(path, args) -> DenseMatrix:
    return read_csv(path, header=args.header, row_labels=args.row_labels)


def _load_biclusters(path) -> BiclusterSet:
    obj = read_json(path)
    if "results" in obj:
        bics = [Bicluster(r["rows"], r["cols"], r["p_value"]) for r in obj["results"] if r["pass"]]
        shape = obj.get("shape")
        if shape is None:
            raise ValueError(f"{path}: significance report lacks a shape")
        return BiclusterSet(bics, tuple(shape))
    return BiclusterSet.from_json(obj)


def _truth_set(truth: dict, shape) -> BiclusterSet:
    return BiclusterSet.from_index_pairs(
        [(b["rows"], b["cols"]) for b in truth.get("biclusters", [])], shape
    )


# -- stages ----------------------------------------------------------------------


def run_recover(D: DenseMatrix, args):
    lam = args.lam if args.lam is not None else default_lambda(D.n_cols)
    sigma = estimate_sigma(D)
    alpha = args.alpha
    if alpha is None:
        alpha = (math.sqrt(D.n_rows) + math.sqrt(D.n_cols)) * sigma
    if alpha <= 0:
        # zero-spread input; any positive weights give X = E = 0 for a zero matrix
        alpha = 1.0
    params = RecoveryParams(alpha=alpha, beta=lam * alpha, tol=args.tol, max_iters=args.max_iters)
    res = recover(D, params)
    summary = {
        "shape": list(D.shape),
        "sigma": sigma,
        "alpha": params.alpha,
        "lambda": lam,
        "beta": params.beta,
        "tol": params.tol,
        "max_iters": params.max_iters,
        "iterations": res.iterations,
        "converged": res.converged,
        "objective": res.objective,
        "rank": res.rank(),
        "sparsity": float(np.mean(res.support(args.spike_threshold))),
    }
    return res.low_rank, res.sparse, summary


def run_extract(X, D, args, seed):
    kr, kc = args.k_rows, args.k_cols
    if args.auto_k:
        kr = choose_k(X, range(2, 13), seed)
        kc = choose_k(X.T, range(2, 13), seed + 1)
    bics = extract_biclusters(
        X, kr, kc, seed=seed, flat_threshold=args.flat_threshold,
        reference=D,
    )
    out = bics.to_json()
    out.update({"k_rows": kr, "k_cols": kc, "seed": seed})
    return bics, out


def run_filter(bics, D, args):
    report = filter_biclusters(bics, D, args.sig_alpha, args.levels)
    obj = report.to_json()
    obj["shape"] = list(report.source_shape)
    return report, obj


def run_evaluate(P, truth, E, shape, threshold):
    out = {}
    if truth is not None:
        out["biclusters"] = evaluate_biclusters(P, _truth_set(truth, shape)).to_json()
        if E is not None:
            mask = GroundTruth.from_json(truth, shape).spike_mask
            out["sparse"] = sparse_prf(spike_mask(E, threshold), mask).to_json()
    return out


# -- commands --------------------------------------------------------------------


def _spec_from_args(args):
    if args.preset:
        spec = preset_spec(args.preset)
    else:
        spec = parse_spec(Path(args.spec).read_text())
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    return spec


def cmd_synth(args):
    spec = _spec_from_args(args)
    D, gt = make_dataset(spec)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    write_csv(f"{prefix}.csv", D)
    write_json(f"{prefix}.truth.json", gt.to_json())


def cmd_preprocess(args):
    M = _load_matrix(args.matrix, args)
    out = preprocess.apply(M, args.mode, args.levels, args.range[0], args.range[1])
    write_csv(args.out, M.with_values(out))


def cmd_recover(args):
    D = _load_matrix(args.matrix, args)
    X, E, summary = run_recover(D, args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "X.csv", D.with_values(X))
    write_csv(out / "E.csv", D.with_values(E))
    write_json(out / "recover.json", summary)


def cmd_extract(args):
    X = _load_matrix(args.matrix, args)
    D = _load_matrix(args.reference, args) if args.reference else None
    _, obj = run_extract(X.values, None if D is None else D.values, args, args.seed or 0)
    write_json(args.out, obj)


def cmd_filter(args):
    bics = _load_biclusters(args.biclusters)
    D = _load_matrix(args.matrix, args)
    _, obj = run_filter(bics, D.values, args)
    write_json(args.out, obj)


def cmd_evaluate(args):
    P = _load_biclusters(args.predicted)
    truth = read_json(args.truth)
    E = _load_matrix(args.sparse, args).values if args.sparse else None
    shape = E.shape if E is not None else P.source_shape
    write_json(args.out, run_evaluate(P, truth, E, tuple(shape), args.spike_threshold))


def cmd_embed(args):
    X = _load_matrix(args.matrix, args)
    emb = topic_embedding(X, args.d)
    labels = X.col_labels or tuple(str(j) for j in range(X.n_cols))
    write_csv(f"{args.out}.csv", DenseMatrix(emb, labels, [f"dim{i + 1}" for i in range(args.d)]))
    render.write(f"{args.out}.ppm", render.scatter(emb))


def cmd_render(args):
    M = _load_matrix(args.matrix, args)
    render.write(args.out, render.heatmap(M, args.cell))


def _pipeline_once(args, rep_dir: Path, seed: int, rel: str = "."):
    rep_dir.mkdir(parents=True, exist_ok=True)
    truth = None
    stage = "load"
    try:
        if args.matrix:
            D = _load_matrix(args.matrix, args)
        else:
            stage = "synth"
            spec = replace(_spec_from_args(args), seed=seed)
            Dv, gt = make_dataset(spec)
            D = DenseMatrix(Dv)
            truth = gt.to_json()
            write_json(rep_dir / "truth.json", truth)
        write_csv(rep_dir / "D.csv", D)

        stage = "recover"
        x_path, e_path, r_path = rep_dir / "X.csv", rep_dir / "E.csv", rep_dir / "recover.json"
        if args.resume and x_path.exists() and e_path.exists() and r_path.exists():
            X = read_csv(x_path, args.header, args.row_labels).values
            E = read_csv(e_path, args.header, args.row_labels).values
            summary = read_json(r_path)
        else:
            X, E, summary = run_recover(D, args)
            write_csv(x_path, D.with_values(X))
            write_csv(e_path, D.with_values(E))
            write_json(r_path, summary)

        stage = "extract"
        bics, bobj = run_extract(X, D.values, args, stage_seed(seed, "extract") % 2**32)
        write_json(rep_dir / "biclusters.json", bobj)

        stage = "filter"
        report, robj = run_filter(bics, D.values, args)
        write_json(rep_dir / "report.json", robj)

        stage = "evaluate"
        metrics = run_evaluate(report.passed(), truth, E, D.shape, args.spike_threshold)
        if metrics:
            write_json(rep_dir / "metrics.json", metrics)

        stage = "render"
        for name, M in (("D", D.values), ("X", X), ("E", E)):
            render.write(rep_dir / f"{name}.ppm", render.heatmap(M, args.cell))
    except StageError:
        raise
    except Exception as exc:
        raise StageError(stage, exc) from exc
    return {
        "seed": seed,
        "dir": rel,
        "recovery": summary,
        "n_candidates": len(bics),
        "n_significant": len(report.passed()),
        "significant": [
            {"rows": list(b.rows), "cols": list(b.cols), "p_value": b.p_value}
            for b in report.passed()
        ],
        "metrics": metrics,
    }


def _summarize(runs):
    values = {}
    for run in runs:
        for group, block in run["metrics"].items():
            for key, v in block.items():
                if isinstance(v, float) or key in ("precision", "recall", "f1"):
                    values.setdefault(f"{group}.{key}", []).append(float(v))
    return {
        k: {"mean": float(np.mean(v)), "sd": float(np.std(v, ddof=1)) if len(v) > 1 else 0.0}
        for k, v in values.items()
    }


def cmd_pipeline(args):
    if not (args.matrix or args.spec or args.preset):
        raise StageError("config", "give a spec file, --preset or --matrix")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    master = args.seed or 0
    runs = []
    for r in range(args.reps):
        seed = master if args.reps == 1 else stage_seed(master, f"rep{r}") % 2**32
        rep_dir = out if args.reps == 1 else out / f"rep{r}"
        runs.append(_pipeline_once(args, rep_dir, seed, "." if args.reps == 1 else f"rep{r}"))
    report = {
        "schema": SCHEMA,
        "seed": master,
        "reps": args.reps,
        "source": args.matrix or args.preset or args.spec,
        "settings": {
            "alpha": args.alpha, "lambda": args.lam, "tol": args.tol, "max_iters": args.max_iters,
            "k_rows": args.k_rows, "k_cols": args.k_cols, "auto_k": args.auto_k,
            "sig_alpha": args.sig_alpha, "levels": args.levels,
        },
        "runs": runs,
        "summary": _summarize(runs),
    }
    write_json(out / "pipeline.json", report)


# -- argument parsing --------------------------------------------------------------


def _csv_flags(p):
    p.add_argument("--header", action="store_true", help="first CSV row holds column labels")
    p.add_argument("--row-labels", action="store_true", help="first CSV column holds row labels")


def _recover_flags(p):
    p.add_argument("--alpha", type=float, default=None, help="nuclear-norm weight (default: heuristic)")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="beta/alpha (default 1/sqrt(m))")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--spike-threshold", type=float, default=1e-6)


def _extract_flags(p):
    p.add_argument("--k-rows", type=int, default=6)
    p.add_argument("--k-cols", type=int, default=6)
    p.add_argument("--auto-k", action="store_true", help="choose k by silhouette over 2..12")
    p.add_argument("--flat-threshold", type=float, default=None)


def _filter_flags(p):
    p.add_argument("--sig-alpha", type=float, default=0.05)
    p.add_argument("--levels", type=int, default=10)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mastery-rpca", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic bicluster dataset")
    p.add_argument("spec", nargs="?", help="flat key = value spec file")
    p.add_argument("--preset", choices=["constant", "shift", "scale", "shift_scale"])
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("preprocess", help="invert and/or bin a score matrix")
    p.add_argument("matrix")
    p.add_argument("--mode", action="append", required=True,
                   choices=["invert", "invert-unit", "bin"], help="repeatable; applied in order")
    p.add_argument("--levels", type=int, default=10)
    p.add_argument("--range", type=float, nargs=2, default=(0.0, 100.0), metavar=("LO", "HI"))
    p.add_argument("--out", required=True)
    _csv_flags(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("recover", help="low-rank + sparse decomposition")
    p.add_argument("matrix")
    p.add_argument("--out-dir", required=True)
    _recover_flags(p)
    _csv_flags(p)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("extract", help="checkerboard biclusters of a low-rank matrix")
    p.add_argument("matrix")
    p.add_argument("--reference", help="observed matrix for the flat-block noise scale")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _extract_flags(p)
    _csv_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("filter", help="Bonferroni significance filter")
    p.add_argument("biclusters")
    p.add_argument("matrix")
    p.add_argument("--out", required=True)
    _filter_flags(p)
    _csv_flags(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("evaluate", help="score biclusters (and spikes) against ground truth")
    p.add_argument("predicted", help="bicluster JSON or significance report JSON")
    p.add_argument("truth", help="ground-truth JSON")
    p.add_argument("--sparse", help="recovered E.csv for spike precision/recall")
    p.add_argument("--spike-threshold", type=float, default=1e-6)
    p.add_argument("--out", required=True)
    _csv_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("embed", help="topic embeddings from right singular vectors")
    p.add_argument("matrix")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--out", required=True, help="output prefix (.csv and .ppm)")
    _csv_flags(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("render", help="PPM heatmap of a matrix")
    p.add_argument("matrix")
    p.add_argument("--out", required=True)
    p.add_argument("--cell", type=int, default=4)
    _csv_flags(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("pipeline", help="synth/recover/extract/filter/evaluate/render")
    p.add_argument("spec", nargs="?", help="flat key = value spec file")
    p.add_argument("--preset", choices=["constant", "shift", "scale", "shift_scale"])
    p.add_argument("--matrix", help="run on an existing matrix instead of synthetic data")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--resume", action="store_true", help="reuse X.csv/E.csv found in the output")
    p.add_argument("--cell", type=int, default=4)
    _recover_flags(p)
    _extract_flags(p)
    _filter_flags(p)
    _csv_flags(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command in ("synth",) and not (args.spec or args.preset):
        print("[synth] give a spec file or --preset", file=sys.stderr)
        return 2
    try:
        args.func(args)
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - report any failure with the command name
        print(f"[{args.command}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0
