"""Monte Carlo experiments on uniform class-imbalance and overlap settings.

Each replicate draws a training sample and a balanced test sample, fits the
requested classifiers (proportional-edge ones once per expansion parameter)
and records the per-class correct classification rates, their mean and, for
cover classifiers, the data reduction.  Replicates are seeded from the master
seed and their index only, so results do not depend on batch size or the
number of worker processes.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .classify import CoverBuilder, train, verify_cover
from .errors import InvalidParameter
from .evaluation import evaluate, overlap_shift

SETTINGS = ("overlap", "nested", "separable")
CLASSIFIERS = ("standard", "composite", "pe-knn", "pe-cccd", "knn", "cccd")
PE_CLASSIFIERS = ("standard", "composite", "pe-knn", "pe-cccd")
COVER_CLASSIFIERS = ("standard", "composite")

# Best CCCD theta and k-NN k for the overlap setting with zeta = 0.5,
# keyed by (d, q); used when a spec leaves theta or k unset.
TUNED_DEFAULTS = {
    (2, 0.1): (1.0, 1), (2, 0.5): (1.0, 1), (2, 1.0): (0.0, 3),
    (3, 0.1): (1.0, 1), (3, 0.5): (1.0, 1), (3, 1.0): (0.0, 4),
    (5, 0.1): (1.0, 1), (5, 0.5): (1.0, 4), (5, 1.0): (1.0, 10),
}

PROFILES = {
    "ci": {"se_target": 0.005, "min_replicates": 20, "max_replicates": 2000},
    "full": {"se_target": 0.0005, "min_replicates": 100, "max_replicates": 10_000},
}


@dataclass(frozen=True)
class SimSpec:
    """Configuration of one simulation cell.

    ``setting`` is ``overlap`` (class 1 shifted by the overlap shift of
    ``zeta``), ``nested`` (class 1 uniform on ``[0.3, 0.7]^d``) or
    ``separable`` (class 1 shifted by ``1 + delta`` along the first axis).
    Class 0 has ``n0`` training points and class 1 ``round(q * n0)``; in the
    nested setting both have ``n0``.  With ``verify_covers`` every trained
    cover is checked on its training data and the purity plus coverage
    violation count is recorded as the ``violations`` metric.
    """

    setting: str = "overlap"
    d: int = 2
    zeta: float = 0.5
    q: float = 0.1
    n0: int = 400
    delta: float = 0.2
    n_test: int = 100
    r_grid: tuple = (1.0, 1.5, 2.0, 3.0)
    classifiers: tuple = ("standard", "knn")
    theta: float | None = None
    k: int | None = None
    se_target: float = 0.005
    min_replicates: int = 20
    max_replicates: int = 2000
    batch: int = 10
    seed: int = 0
    verify_covers: bool = False

    def __post_init__(self):
        if self.setting not in SETTINGS:
            raise InvalidParameter(f"setting must be one of {', '.join(SETTINGS)}")
        bad = [c for c in self.classifiers if c not in CLASSIFIERS]
        if bad:
            raise InvalidParameter(f"unknown classifiers: {', '.join(bad)}")
        if self.d < 1 or self.n0 < 1 or self.n_test < 1:
            raise InvalidParameter("d, n0 and n_test must be positive")
        if any(r < 1 for r in self.r_grid):
            raise InvalidParameter("every r in the grid must be >= 1")
        if self.min_replicates < 1 or self.max_replicates < self.min_replicates or self.batch < 1:
            raise InvalidParameter("need 1 <= min_replicates <= max_replicates and batch >= 1")
        object.__setattr__(self, "r_grid", tuple(float(r) for r in self.r_grid))
        object.__setattr__(self, "classifiers", tuple(self.classifiers))

    @property
    def n1(self) -> int:
        return self.n0 if self.setting == "nested" else max(1, int(round(self.q * self.n0)))

    @property
    def shift(self) -> float:
        return overlap_shift(self.zeta, self.d)

    def _tuned(self) -> tuple[float, int]:
        # nested classes are balanced whatever q says
        q = 1.0 if self.setting == "nested" else round(self.q, 6)
        return TUNED_DEFAULTS.get((self.d, q), (1.0, 1))

    def resolved_theta(self) -> float:
        return float(self.theta) if self.theta is not None else self._tuned()[0]

    def resolved_k(self) -> int:
        return int(self.k) if self.k is not None else self._tuned()[1]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["r_grid"] = list(self.r_grid)
        out["classifiers"] = list(self.classifiers)
        out["theta"] = self.resolved_theta()
        out["k"] = self.resolved_k()
        return out


def replicate_rng(seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(rep),)))


def draw_class(spec: SimSpec, label: int, n: int, rng: np.random.Generator) -> np.ndarray:
    U = rng.random((n, spec.d))
    if label == 0:
        return U
    if spec.setting == "overlap":
        return U + spec.shift
    if spec.setting == "nested":
        return 0.3 + 0.4 * U
    U[:, 0] += 1.0 + spec.delta
    return U


def draw_sample(spec: SimSpec, rng: np.random.Generator, n0: int, n1: int) -> tuple[np.ndarray, np.ndarray]:
    X = np.vstack([draw_class(spec, 0, n0, rng), draw_class(spec, 1, n1, rng)])
    y = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    return X, y


def run_replicate(spec: SimSpec, rep: int) -> dict:
    """Metrics of every (classifier, r) pair on one replicate.

    Keys are ``(classifier, r)`` with ``r = None`` for classifiers that do not
    use it; values map metric names to floats.
    """
    rng = replicate_rng(spec.seed, rep)
    X, y = draw_sample(spec, rng, spec.n0, spec.n1)
    Z, yz = draw_sample(spec, rng, spec.n_test, spec.n_test)
    tess_seed = int(rng.integers(2**31 - 1))
    theta, k = spec.resolved_theta(), spec.resolved_k()
    out = {}
    builder = None
    if any(c in PE_CLASSIFIERS for c in spec.classifiers):
        builder = CoverBuilder(X, y, seed=tess_seed)
    for clf in spec.classifiers:
        grid = spec.r_grid if clf in PE_CLASSIFIERS else (None,)
        for r in grid:
            model = train(X, y, clf, r=1.0 if r is None else r, theta=theta, k=k, seed=tess_seed, builder=builder)
            m = evaluate(yz, model.predict(Z), 2)
            rec = {"auc": m.auc, "ccr0": m.ccr[0], "ccr1": m.ccr[1]}
            if clf in COVER_CLASSIFIERS:
                counts = [c.n_prototypes for c in model.covers]
                sizes = [c.n_targets for c in model.covers]
                rec["red0"] = 1.0 - counts[0] / sizes[0]
                rec["red1"] = 1.0 - counts[1] / sizes[1]
                rec["redall"] = 1.0 - sum(counts) / sum(sizes)
            if spec.verify_covers and model.covers:
                rec["violations"] = float(sum(
                    sum(verify_cover(c, X[y == c.label], X[y != c.label]).values()) for c in model.covers))
            out[(clf, r)] = rec
    return out


@dataclass
class SimResult:
    """Per-replicate metric values for every (classifier, r) pair."""

    spec: SimSpec
    values: dict = field(default_factory=dict)
    n_replicates: int = 0

    def add(self, rec: dict) -> None:
        for key, metrics in rec.items():
            slot = self.values.setdefault(key, {})
            for name, v in metrics.items():
                slot.setdefault(name, []).append(v)
        self.n_replicates += 1

    def series(self, classifier: str, metric: str, r: float | None = None) -> np.ndarray:
        key = (classifier, None if r is None else float(r))
        return np.asarray(self.values[key][metric], dtype=float)

    def mean_se(self, classifier: str, metric: str, r: float | None = None) -> tuple[float, float]:
        v = self.series(classifier, metric, r)
        se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else float("inf")
        return float(v.mean()), se

    def max_auc_se(self) -> float:
        ses = [self.mean_se(c, "auc", r)[1] for (c, r) in self.values]
        return max(ses) if ses else float("inf")

    @property
    def converged(self) -> bool:
        """True when every AUC standard error met the target; False means the cap stopped the run."""
        return self.max_auc_se() < self.spec.se_target

    def rows(self) -> list[dict]:
        """Long-format summary: one row per (classifier, r, metric)."""
        out = []
        for (clf, r), metrics in self.values.items():
            for name in metrics:
                mean, se = self.mean_se(clf, name, r)
                out.append({"classifier": clf, "r": r, "q": self.spec.q, "d": self.spec.d,
                            "metric": name, "value": mean, "se": se})
        return out

    def plot_data(self) -> dict:
        """Metric-versus-r series per classifier, one block per metric."""
        series = {}
        for (clf, r), metrics in self.values.items():
            for name in metrics:
                mean, se = self.mean_se(clf, name, r)
                s = series.setdefault(name, {}).setdefault(clf, {"r": [], "value": [], "se": []})
                s["r"].append(r)
                s["value"].append(mean)
                s["se"].append(se)
        return {"d": self.spec.d, "q": self.spec.q, "zeta": self.spec.zeta, "series": series}


def _run_batch(spec: SimSpec, reps: list[int], jobs: int) -> list[dict]:
    if jobs <= 1 or len(reps) <= 1:
        return [run_replicate(spec, rep) for rep in reps]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_replicate, [spec] * len(reps), reps))


def run_simulation(spec: SimSpec, jobs: int = 1) -> SimResult:
    """Run replicates in batches until every AUC standard error is below
    ``spec.se_target`` (after at least ``spec.min_replicates``) or the cap is hit."""
    result = SimResult(spec)
    while result.n_replicates < spec.max_replicates:
        start = result.n_replicates
        stop = min(start + spec.batch, spec.max_replicates)
        for rec in _run_batch(spec, list(range(start, stop)), jobs):
            result.add(rec)
        if result.n_replicates >= spec.min_replicates and result.max_auc_se() < spec.se_target:
            break
    return result


def run_overlap_simulation(d: int = 2, zeta: float = 0.5, q: float = 0.1, n0: int = 400, jobs: int = 1, **kw) -> SimResult:
    return run_simulation(SimSpec(setting="overlap", d=d, zeta=zeta, q=q, n0=n0, **kw), jobs=jobs)


def run_nested_simulation(d: int = 2, n: int = 100, jobs: int = 1, **kw) -> SimResult:
    return run_simulation(SimSpec(setting="nested", d=d, n0=n, q=1.0, **kw), jobs=jobs)


def tune(spec: SimSpec, param: str, grid, n_replicates: int = 100, classifier: str | None = None) -> dict:
    """Pick the value of ``theta`` or ``k`` that most often gives the best AUC.

    For every replicate the grid value with the highest AUC is recorded (the
    smallest value on ties); the mode of these winners is returned, again
    preferring the smallest value on ties.
    """
    if param not in ("theta", "k"):
        raise InvalidParameter("param must be 'theta' or 'k'")
    grid = sorted(float(g) if param == "theta" else int(g) for g in grid)
    if not grid:
        raise InvalidParameter("empty parameter grid")
    clf = classifier or ("cccd" if param == "theta" else "knn")
    winners, aucs = [], np.zeros((n_replicates, len(grid)))
    for rep in range(n_replicates):
        rng = replicate_rng(spec.seed, rep)
        X, y = draw_sample(spec, rng, spec.n0, spec.n1)
        Z, yz = draw_sample(spec, rng, spec.n_test, spec.n_test)
        tess_seed = int(rng.integers(2**31 - 1))
        builder = CoverBuilder(X, y, seed=tess_seed) if clf in PE_CLASSIFIERS else None
        r = spec.r_grid[0]
        for g, value in enumerate(grid):
            kw = {"theta": spec.resolved_theta(), "k": spec.resolved_k()}
            kw[param] = value
            model = train(X, y, clf, r=r, seed=tess_seed, builder=builder, **kw)
            aucs[rep, g] = evaluate(yz, model.predict(Z), 2).auc
        winners.append(grid[int(np.argmax(aucs[rep]))])
    counts = Counter(winners)
    top = max(counts.values())
    best = min(v for v, c in counts.items() if c == top)
    return {
        "param": param, "classifier": clf, "best": best, "grid": grid,
        "wins": {str(v): counts.get(v, 0) for v in grid},
        "mean_auc": aucs.mean(axis=0).tolist(), "n_replicates": n_replicates,
    }
