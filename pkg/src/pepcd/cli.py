"""Command line interface.

Subcommands: tessellate, mds, train, predict, evaluate, simulate, tune, pca,
export-cover.  Every output embeds the effective configuration, the seed and
the package version; running again with ``--config <output>`` reproduces the
output byte for byte.  Exit codes: 0 success, 2 invalid input or
configuration, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from itertools import combinations
from pathlib import Path

import numpy as np

from . import __version__
from .classify import MODEL_KINDS, CoverBuilder, TrainedModel, train
from .dataio import Dataset, csv_text, dumps_json, load_config, load_csv, write_atomic
from .errors import ConfigError, PepcdError, ValidationError
from .evaluation import cv_folds, cv_scores, paired_tests, pca_fit
from .simulation import CLASSIFIERS, PROFILES, SETTINGS, SimSpec, run_simulation, tune
from .tessellation import tessellate

# Output locations and worker counts do not change results, so they stay out of the
# embedded config; a rerun from any output then reproduces it wherever it is written.
_NOT_CONFIG = {"func", "config", "command", "out", "out_dir", "svg", "jobs"}


def parse_grid(text) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma list of numbers.

    >>> parse_grid("1:2:0.25")
    [1.0, 1.25, 1.5, 1.75, 2.0]
    >>> parse_grid("1, 3")
    [1.0, 3.0]
    """
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text).strip()
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid grid {text!r}; use start:stop:step or a comma list") from None


def parse_list(text) -> list[str]:
    if isinstance(text, (list, tuple)):
        return [str(v) for v in text]
    return [v.strip() for v in str(text).split(",") if v.strip()]


def _label_col(text):
    if text is None or str(text).lower() == "none":
        return None
    try:
        return int(text)
    except ValueError:
        return str(text)


def _header(text):
    return {"auto": None, "yes": True, "no": False}[text]


def _data_args(p: argparse.ArgumentParser, name: str = "data") -> None:
    p.add_argument(name, nargs="?", help="CSV file of features and a label column")
    p.add_argument("--label-col", default="-1", help="label column index or name, or 'none' (default: last)")
    p.add_argument("--header", choices=["auto", "yes", "no"], default="auto")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (default: $PCD_SEED or 0)")
    common.add_argument("--config", help="key = value file, or an earlier output to rerun")
    common.add_argument("--profile", choices=sorted(PROFILES), default="ci")

    parser = argparse.ArgumentParser(prog="pepcd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tessellate", parents=[common], help="Delaunay cells and outer simplices as JSON")
    _data_args(p)
    p.add_argument("--target", help="tessellate only the rows of this class")
    p.add_argument("--out", required=False)
    p.set_defaults(func=cmd_tessellate)

    p = sub.add_parser("mds", parents=[common], help="prototype set of one class")
    _data_args(p)
    p.add_argument("--target", help="target class (default: first class in the file)")
    p.add_argument("--reference", help="CSV of non-target points; then every data row is a target")
    p.add_argument("--kind", choices=["standard", "composite", "spherical"], default="standard")
    p.add_argument("--r", type=float, default=1.5)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mds)

    p = sub.add_parser("train", parents=[common], help="fit a classifier and save it as JSON")
    _data_args(p)
    p.add_argument("--kind", choices=list(MODEL_KINDS), default="standard")
    p.add_argument("--r", type=float, default=1.5)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--pca", type=int, default=0, help="reduce to this many principal components first")
    p.add_argument("--out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="label new points with a saved model")
    p.add_argument("model", nargs="?")
    _data_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", parents=[common], help="5x2 cross-validation comparison of classifiers")
    _data_args(p)
    p.add_argument("--classifiers", type=parse_list, default=["standard", "knn"])
    p.add_argument("--r", type=float, default=1.5)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--pca", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo simulation")
    _sim_args(p)
    p.add_argument("--out-dir")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tune", parents=[common], help="pick theta or k on pilot simulations")
    _sim_args(p)
    p.add_argument("--param", choices=["theta", "k"], default="theta")
    p.add_argument("--grid", type=parse_grid, default=[0.0, 0.25, 0.5, 0.75, 1.0])
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--classifier", choices=list(CLASSIFIERS), default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("pca", parents=[common], help="project data onto principal components")
    _data_args(p)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("export-cover", parents=[common], help="explicit cover geometry (JSON, optional SVG)")
    _data_args(p)
    p.add_argument("--target", help="target class (default: first class in the file)")
    p.add_argument("--kind", choices=["standard", "composite", "spherical"], default="standard")
    p.add_argument("--r", type=float, default=1.5)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--reference", help="CSV of non-target points; then every data row is a target")
    p.add_argument("--svg", help="also draw the cover (two-dimensional data only)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_cover)
    return parser


def _sim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--setting", choices=list(SETTINGS), default="overlap")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--zeta", type=float, default=0.5)
    p.add_argument("--q", type=float, default=0.1)
    p.add_argument("--n0", type=int, default=400)
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--n-test", type=int, default=100)
    p.add_argument("--r-grid", type=parse_grid, default=[1.0, 1.5, 2.0, 3.0])
    p.add_argument("--classifiers", type=parse_list, default=["standard", "knn"])
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--se-target", type=float, default=None)
    p.add_argument("--min-replicates", type=int, default=None)
    p.add_argument("--max-replicates", type=int, default=None)


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:
        if command in action.choices:
            return action.choices[command]
    raise ConfigError(f"unknown command {command!r}")


def _coerce(action: argparse.Action, value):
    if isinstance(action, argparse._StoreTrueAction):
        return str(value).lower() in ("1", "true", "yes", "on") if isinstance(value, str) else bool(value)
    if value is None or not isinstance(value, str) or action.type is None:
        return value
    try:
        return action.type(value)
    except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
        raise ConfigError(f"bad config value for {action.dest}: {value!r}") from exc


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = load_config(args.config)
        sub = _subparser(parser, args.command)
        known = {a.dest: a for a in sub._actions}
        unknown = sorted(set(cfg) - set(known) - _NOT_CONFIG - {"seed"})
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        defaults = {k: _coerce(known[k], v) for k, v in cfg.items() if k in known and k not in _NOT_CONFIG}
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    if args.seed is None:
        env = os.environ.get("PCD_SEED")
        try:
            args.seed = int(env) if env not in (None, "") else 0
        except ValueError:
            raise ConfigError(f"PCD_SEED must be an integer, got {env!r}") from None
    return args


def config_of(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_CONFIG} | {"command": args.command}


def meta_of(args: argparse.Namespace) -> dict:
    return {"config": config_of(args), "seed": args.seed, "version": __version__}


def _require(args, *names) -> None:
    missing = [n for n in names if getattr(args, n, None) in (None, "")]
    if missing:
        raise ConfigError(f"missing required option(s): {', '.join(missing)}")


def _load(args, path=None) -> Dataset:
    path = path or args.data
    try:
        return load_csv(path, label_col=_label_col(args.label_col), header=_header(args.header))
    except FileNotFoundError:
        raise ValidationError(f"{path}: no such file") from None
    except ValidationError as exc:
        exc.args = (f"{path}: {exc}",)
        raise


def _class_index(ds: Dataset, name) -> int:
    if name is None:
        return 0
    if str(name) in ds.class_names:
        return ds.class_names.index(str(name))
    raise ValidationError(f"class {name!r} not found; classes are {', '.join(ds.class_names)}")


def _emit_json(args, payload: dict) -> None:
    payload = dict(payload)
    payload["meta"] = meta_of(args)
    text = dumps_json(payload)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def cmd_tessellate(args) -> None:
    _require(args, "data")
    ds = _load(args)
    X = ds.X
    if args.target is not None:
        X = X[ds.y == _class_index(ds, args.target)]
    tess = tessellate(X, seed=args.seed)
    _emit_json(args, tess.to_dict())


def _target_split(args, ds: Dataset):
    """Target rows (as file row indices) and the two point sets."""
    if args.reference:
        ref = _load(args, args.reference)
        rows = np.arange(ds.X.shape[0])
        return rows, ds.X, ref.X
    if ds.y is None or ds.n_classes < 2:
        raise ValidationError("need a labelled file with two or more classes, or --reference")
    t = _class_index(ds, args.target)
    rows = np.flatnonzero(ds.y == t)
    return rows, ds.X[rows], ds.X[ds.y != t]


def _cover(args, T, N):
    X = np.vstack([T, N])
    y = np.concatenate([np.zeros(len(T), dtype=np.int64), np.ones(len(N), dtype=np.int64)])
    return CoverBuilder(X, y, seed=args.seed).cover(0, args.kind, args.r, args.theta)


def cmd_mds(args) -> None:
    _require(args, "data")
    ds = _load(args)
    rows, T, N = _target_split(args, ds)
    cover = _cover(args, T, N)
    local = _cover_local_indices(cover, T)
    payload = {
        "kind": cover.kind,
        "fallback": cover.fallback,
        "prototypes": rows[np.sort(local)].tolist(),
        "prototype_detail": {
            "points": T[np.sort(local)].tolist(),
            "inner_rows": rows[local[: cover.inner_cell.size]].tolist(),
            "outer_rows": rows[local[cover.inner_cell.size: cover.inner_cell.size + cover.outer_index.size]].tolist(),
            "ball_rows": rows[local[cover.inner_cell.size + cover.outer_index.size:]].tolist(),
        },
        "per_cell_gamma": {str(k): v for k, v in sorted(cover.per_cell_gamma.items())},
        "per_outer_gamma": {str(k): v for k, v in sorted(cover.per_outer_gamma.items())},
        "reduction": cover.reduction,
        "n_targets": cover.n_targets,
        "n_prototypes": cover.n_prototypes,
    }
    _emit_json(args, payload)


def _cover_local_indices(cover, T) -> np.ndarray:
    """Target row of each prototype, in cover order (inner, outer, balls)."""
    lookup = {}
    for i, row in enumerate(np.ascontiguousarray(T)):
        lookup.setdefault(row.tobytes(), i)
    return np.array([lookup[p.tobytes()] for p in np.ascontiguousarray(cover.prototypes)], dtype=np.int64)


def _fit_pca(args, X):
    if not args.pca:
        return None, X
    model = pca_fit(X, args.pca)
    return model, model.transform(X)


def cmd_train(args) -> None:
    _require(args, "data")
    ds = _load(args)
    if ds.y is None:
        raise ValidationError("training needs a label column")
    pca, X = _fit_pca(args, ds.X)
    model = train(X, ds.y, args.kind, r=args.r, theta=args.theta, k=args.k, seed=args.seed,
                  class_names=ds.class_names)
    _emit_json(args, {"model": model.to_dict(), "pca": None if pca is None else pca.to_dict()})


def cmd_predict(args) -> None:
    _require(args, "model", "data")
    saved = json.loads(Path(args.model).read_text())
    if "model" not in saved:
        raise ValidationError(f"{args.model} is not a saved model")
    model = TrainedModel.from_dict(saved["model"])
    ds = _load(args)
    X = ds.X
    if saved.get("pca"):
        p = saved["pca"]
        X = (X - np.array(p["mean"])) @ np.array(p["components"]).T
    names = model.class_names or [str(j) for j in range(model.n_classes)]
    pred = model.predict(X)
    header = ["row", "predicted"]
    if ds.y is not None:
        header.append("true")
    rho = None
    if model.covers:
        rho = model.dissimilarities(X)
        header += [f"rho_{n}" for n in names]
    rows = []
    for i in range(X.shape[0]):
        row = [i, names[pred[i]]]
        if ds.y is not None:
            row.append(ds.class_names[ds.y[i]])
        if rho is not None:
            row += [float(v) for v in rho[i]]
        rows.append(row)
    meta = meta_of(args)
    comments = [f"config: {json.dumps(meta['config'], sort_keys=True)}", f"seed: {meta['seed']}",
                f"version: {meta['version']}"]
    text = csv_text(header, rows, comments)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _fit_predict(args, kind):
    def run(Xtr, ytr, Xte):
        if args.pca:
            pca = pca_fit(Xtr, args.pca)
            Xtr, Xte = pca.transform(Xtr), pca.transform(Xte)
        return train(Xtr, ytr, kind, r=args.r, theta=args.theta, k=args.k, seed=args.seed).predict(Xte)
    return run


def cmd_evaluate(args) -> None:
    _require(args, "data")
    ds = _load(args)
    if ds.y is None:
        raise ValidationError("evaluation needs a label column")
    bad = [c for c in args.classifiers if c not in MODEL_KINDS]
    if bad:
        raise ValidationError(f"unknown classifiers: {', '.join(bad)}")
    scores = {c: cv_scores(_fit_predict(args, c), ds.X, ds.y, seed=args.seed) for c in args.classifiers}
    comparisons = []
    for a, b in combinations(args.classifiers, 2):
        res = paired_tests(scores[a] - scores[b])
        comparisons.append({"a": a, "b": b, **res.to_dict()})
    payload = {
        "scores": {c: s.tolist() for c, s in scores.items()},
        "mean_auc": {c: float(s.mean()) for c, s in scores.items()},
        "comparisons": comparisons,
        "folds": [h1.tolist() for h1, _ in cv_folds(ds.y, args.seed)],
    }
    _emit_json(args, payload)


def _spec(args) -> SimSpec:
    prof = PROFILES[args.profile]
    return SimSpec(
        setting=args.setting, d=args.d, zeta=args.zeta, q=args.q, n0=args.n0, delta=args.delta,
        n_test=args.n_test, r_grid=tuple(args.r_grid), classifiers=tuple(args.classifiers),
        theta=args.theta, k=args.k,
        se_target=args.se_target if args.se_target is not None else prof["se_target"],
        min_replicates=args.min_replicates if args.min_replicates is not None else prof["min_replicates"],
        max_replicates=args.max_replicates if args.max_replicates is not None else prof["max_replicates"],
        seed=args.seed,
    )


def cmd_simulate(args) -> None:
    _require(args, "out_dir")
    spec = _spec(args)
    result = run_simulation(spec, jobs=args.jobs)
    meta = meta_of(args)
    meta["spec"] = spec.to_dict()
    meta["n_replicates"] = result.n_replicates
    meta["se_target_met"] = result.converged
    out = Path(args.out_dir)
    rows = result.rows()
    comments = [f"config: {json.dumps(meta['config'], sort_keys=True)}", f"seed: {meta['seed']}",
                f"version: {meta['version']}", f"replicates: {result.n_replicates}",
                f"se_target_met: {str(result.converged).lower()}"]
    write_atomic(out / "results.csv", csv_text(
        ["classifier", "r", "q", "d", "metric", "value", "se"],
        [[r["classifier"], r["r"], r["q"], r["d"], r["metric"], r["value"], r["se"]] for r in rows],
        comments,
    ))
    lines = [json.dumps({"meta": meta}, sort_keys=True)]
    for (clf, r), metrics in result.values.items():
        summary = {name: dict(zip(("value", "se"), result.mean_se(clf, name, r))) for name in metrics}
        lines.append(json.dumps({"classifier": clf, "r": r, "q": spec.q, "d": spec.d,
                                 "n_replicates": result.n_replicates, "metrics": summary}, sort_keys=True))
    write_atomic(out / "results.ndjson", "\n".join(lines) + "\n")
    write_atomic(out / "plotdata.json", dumps_json({"meta": meta, **result.plot_data()}))


def cmd_tune(args) -> None:
    spec = _spec(args)
    n = args.replicates if args.replicates is not None else (50 if args.profile == "ci" else 1000)
    _emit_json(args, tune(spec, args.param, args.grid, n_replicates=n, classifier=args.classifier))


def cmd_pca(args) -> None:
    _require(args, "data")
    ds = _load(args)
    model = pca_fit(ds.X, args.dim)
    Z = model.transform(ds.X)
    header = [f"pc{j + 1}" for j in range(Z.shape[1])] + (["label"] if ds.y is not None else [])
    rows = []
    for i in range(Z.shape[0]):
        row = [float(v) for v in Z[i]]
        if ds.y is not None:
            row.append(ds.class_names[ds.y[i]])
        rows.append(row)
    meta = meta_of(args)
    comments = [f"config: {json.dumps(meta['config'], sort_keys=True)}", f"seed: {meta['seed']}",
                f"version: {meta['version']}",
                f"explained_ratio: {json.dumps([float(v) for v in model.explained_ratio])}"]
    text = csv_text(header, rows, comments)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def cmd_export_cover(args) -> None:
    _require(args, "data")
    ds = _load(args)
    rows, T, N = _target_split(args, ds)
    cover = _cover(args, T, N)
    payload = {"cover": cover.geometry(), "fallback": cover.fallback,
               "tessellation": None if cover.tess is None else cover.tess.to_dict()}
    _emit_json(args, payload)
    if args.svg:
        if T.shape[1] != 2:
            raise ValidationError("SVG export needs two-dimensional data")
        write_atomic(args.svg, cover_svg(cover, T, N))


def cover_svg(cover, T, N, size: int = 600) -> str:
    """SVG drawing of a two-dimensional cover, its tessellation and the points."""
    pts = [T, N]
    geo = cover.geometry()
    pts += [np.array(s["vertices"]) for s in geo["polytopes"]]
    allp = np.vstack([p for p in pts if p.size])
    for b in geo["balls"]:
        c, r = np.array(b["center"]), b["radius"]
        allp = np.vstack([allp, c - r, c + r])
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    pad = 20.0
    scale = (size - 2 * pad) / span

    def xy(p):
        return f"{pad + (p[0] - lo[0]) * scale:.3f},{size - pad - (p[1] - lo[1]) * scale:.3f}"

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
             f'<rect width="{size}" height="{size}" fill="white"/>']
    if cover.tess is not None:
        for cell in cover.tess.cells:
            poly = " ".join(xy(cover.tess.points[v]) for v in cell)
            parts.append(f'<polygon points="{poly}" fill="none" stroke="#bbbbbb" stroke-width="0.6"/>')
    for s in geo["simplices"]:
        poly = " ".join(xy(v) for v in s["vertices"])
        parts.append(f'<polygon points="{poly}" fill="#3b75af" fill-opacity="0.25" stroke="#3b75af" stroke-width="0.8"/>')
    for s in geo["polytopes"]:
        v = s["vertices"]
        poly = " ".join(xy(p) for p in (v[0], v[1], v[3], v[2]))
        parts.append(f'<polygon points="{poly}" fill="#519e3e" fill-opacity="0.2" stroke="#519e3e" stroke-width="0.8"/>')
    for b in geo["balls"]:
        parts.append(f'<circle cx="{xy(b["center"]).split(",")[0]}" cy="{xy(b["center"]).split(",")[1]}" '
                     f'r="{b["radius"] * scale:.3f}" fill="#ef8636" fill-opacity="0.2" stroke="#ef8636" stroke-width="0.8"/>')
    for p in N:
        parts.append(f'<circle cx="{xy(p).split(",")[0]}" cy="{xy(p).split(",")[1]}" r="2.5" fill="#c03d3e"/>')
    for p in T:
        parts.append(f'<circle cx="{xy(p).split(",")[0]}" cy="{xy(p).split(",")[1]}" r="2.5" fill="#222222"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        args.func(args)
    except SystemExit as exc:  # argparse usage errors exit with 2
        return int(exc.code) if isinstance(exc.code, int) else 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PepcdError, OSError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
