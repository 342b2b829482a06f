"""Time the compiled kernels against the pure-Python fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]

Each kernel runs on identical inputs under both backends; the outputs are
compared before timings are reported: integer outputs exactly, real
outputs to 1e-12.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from pepcd import _kernels
from pepcd.proximity import build_cccd
from pepcd.tessellation import _enclosing_simplex, tessellate


def _best_of(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype.kind == "f":
        # summation order differs between backends; agreement is to rounding
        return a.shape == b.shape and np.allclose(a, b, rtol=0.0, atol=1e-12)
    return np.array_equal(a, b)


def cases(quick: bool):
    rng = np.random.default_rng(0)
    sizes = [(2, 300), (3, 150)] if quick else [(2, 2000), (3, 600), (4, 200)]
    for d, n in sizes:
        P = rng.uniform(size=(n, d))
        tess = tessellate(P, seed=0)
        extent = float(np.ptp(P, axis=0).max())
        order = np.random.default_rng(0).permutation(n)
        # the insertion kernel works on the points plus an enclosing simplex
        c = P.mean(axis=0)
        pts = np.vstack([P, _enclosing_simplex(c, 100.0 * np.linalg.norm(P - c, axis=1).max())])
        yield f"bowyer_watson d={d} n={n}", lambda b, pts=pts, order=order, e=extent: b.bowyer_watson(
            pts, order, 1e-10 * e, 1e-10)

        Z = rng.uniform(-0.2, 1.2, size=(20 * n, d))
        yield f"locate_cells d={d} m={Z.shape[0]}", lambda b, t=tess, Z=Z: b.locate_cells(
            Z, t.origins, t.tinv, 1e-9)

        T = rng.uniform(size=(5 * n, d))
        loc = tess.locate_many(T)
        inside = np.flatnonzero(loc.in_hull)
        order_c = inside[np.argsort(loc.index[inside], kind="stable")]
        cells = loc.index[order_c]
        starts = np.concatenate([[0], np.flatnonzero(np.diff(cells)) + 1, [cells.size]]).astype(np.int64)
        W = np.ascontiguousarray(loc.W[order_c])
        yield f"exact_mds_groups d={d} targets={W.shape[0]}", lambda b, W=W, s=starts: b.exact_mds_groups(
            W, s, 1.5, 1e-9)

    n = 400 if quick else 1500
    X0 = rng.uniform(size=(n, 2))
    X1 = rng.uniform(0.3, 0.7, size=(n // 5, 2))
    g, _ = build_cccd(X0, X1, 1.0)
    adj = np.ascontiguousarray(g.closed(), dtype=np.uint8)
    yield f"greedy_dominating_set n={n}", lambda b, adj=adj: b.greedy_dominating_set(adj)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="small inputs only")
    args = ap.parse_args(argv)
    if _kernels.compiled_backend is None:
        raise SystemExit("compiled backend not built; run `pip install -e . --no-build-isolation`")
    print(f"{'kernel':<42}{'python s':>11}{'compiled s':>12}{'speedup':>10}  match")
    for name, run in cases(args.quick):
        tp, op = _best_of(lambda: run(_kernels.python_backend), args.repeat)
        tc, oc = _best_of(lambda: run(_kernels.compiled_backend), args.repeat)
        print(f"{name:<42}{tp:>11.4f}{tc:>12.4f}{tp / tc:>9.1f}x  {'yes' if _same(op, oc) else 'NO'}")


if __name__ == "__main__":
    main()
