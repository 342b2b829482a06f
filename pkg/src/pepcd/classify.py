"""Class covers and the classifiers built on them.

A class cover is the union of the proximity regions of one class's
prototypes.  Three cover kinds are supported:

``standard``
    proportional-edge regions everywhere (inner regions in the Delaunay cells
    of the other classes, outer regions beyond their hull);
``composite``
    inner proportional-edge regions inside the hull, CCCD balls outside;
``spherical``
    CCCD balls only.

Classifiers:

* cover classifiers assign the class whose cover has the smallest
  dissimilarity (convex distance for simplices and polytopes, scaled
  Euclidean distance for balls);
* hybrid classifiers use the in-hull covers when some dissimilarity is below
  one, and defer to k-NN or a CCCD classifier otherwise;
* plain k-NN and CCCD classifiers are provided for comparison.

Multi-class problems use one-versus-rest covers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domination import PrototypeSet, composite_mds, spherical_mds, standard_mds
from .errors import (
    CoincidentPoints,
    DegenerateInput,
    DimensionMismatch,
    EmptyClass,
    InsufficientPoints,
    InvalidParameter,
    SingleClass,
    ValidationError,
)
from .geometry import DEFAULT_TOL
from .proximity import check_expansion, check_theta, pairwise_distances
from .tessellation import Located, Tessellation, tessellate

MODEL_FORMAT = 1
COVER_KINDS = ("standard", "composite", "spherical")
HYBRID_KINDS = ("pe-knn", "pe-cccd")
MODEL_KINDS = COVER_KINDS + HYBRID_KINDS + ("knn", "cccd")
_MIN_HEIGHT = 1e-12
_CHUNK = 1024


def _empty(d: int) -> np.ndarray:
    return np.zeros((0, d))


@dataclass(eq=False)
class ClassCover:
    """Cover of one target class against the union of all other classes.

    Attributes
    ----------
    label : int
        Target class index.
    kind : str
        Cover kind actually built (``spherical`` when a fallback happened).
    tess : Tessellation or None
        Tessellation of the non-target points (None for spherical covers).
    inner_points, inner_cell, inner_vertex, inner_tau
        Prototypes with inner regions: location, cell, vertex region and
        level ``tau`` (members of the cell have ``w[vertex] >= tau``).
    outer_points, outer_index, outer_cap
        Prototypes with outer regions and their cap levels.
    ball_centers, ball_radii
        Prototypes with CCCD balls.
    fallback : str or None
        Why a spherical cover replaced the requested kind.
    """

    label: int
    kind: str
    dim: int
    r: float
    theta: float
    n_targets: int
    tess: Tessellation | None = None
    inner_points: np.ndarray | None = None
    inner_cell: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    inner_vertex: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    inner_tau: np.ndarray = field(default_factory=lambda: np.zeros(0))
    outer_points: np.ndarray | None = None
    outer_index: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    outer_cap: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ball_centers: np.ndarray | None = None
    ball_radii: np.ndarray = field(default_factory=lambda: np.zeros(0))
    fallback: str | None = None
    per_cell_gamma: dict = field(default_factory=dict)
    per_outer_gamma: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("inner_points", "outer_points", "ball_centers"):
            if getattr(self, name) is None:
                setattr(self, name, _empty(self.dim))

    @property
    def n_prototypes(self) -> int:
        return int(self.inner_cell.size + self.outer_index.size + self.ball_radii.size)

    @property
    def reduction(self) -> float | None:
        return None if self.n_targets == 0 else 1.0 - self.n_prototypes / self.n_targets

    @property
    def prototypes(self) -> np.ndarray:
        return np.vstack([self.inner_points, self.outer_points, self.ball_centers])

    def region_dissimilarities(self, Z, inner_only: bool = False) -> np.ndarray:
        """Dissimilarity of each row of ``Z`` to every region, shape (m, n_regions).

        Columns are ordered inner regions, outer regions, balls.
        """
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        if Z.shape[1] != self.dim:
            raise DimensionMismatch(f"expected points of dimension {self.dim}")
        parts = [self._inner_rho(Z)]
        if not inner_only:
            parts += [self._outer_rho(Z), self._ball_rho(Z)]
        return np.hstack(parts)

    def dissimilarity(self, Z, inner_only: bool = False) -> np.ndarray:
        """Smallest region dissimilarity per row; ``inf`` for an empty cover."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        out = np.empty(Z.shape[0])
        for a in range(0, Z.shape[0], _CHUNK):
            R = self.region_dissimilarities(Z[a:a + _CHUNK], inner_only)
            out[a:a + _CHUNK] = R.min(axis=1) if R.shape[1] else np.inf
        return out

    def _inner_rho(self, Z) -> np.ndarray:
        m = Z.shape[0]
        if self.inner_cell.size == 0:
            return np.zeros((m, 0))
        tess = self.tess
        U, inv = np.unique(self.inner_cell, return_inverse=True)
        rel = Z[None, :, :] - tess.origins[U][:, None, :]
        tail = np.einsum("uij,umj->umi", tess.tinv[U], rel)
        W = np.concatenate([1.0 - tail.sum(axis=2, keepdims=True), tail], axis=2)[inv]
        lam = np.minimum(1.0, 1.0 - self.inner_tau)
        WR = W / lam[:, None, None]
        a = np.arange(self.inner_cell.size)
        WR[a, :, self.inner_vertex] = 1.0 - (1.0 - W[a, :, self.inner_vertex]) / lam[:, None]
        return (1.0 - (self.dim + 1) * WR.min(axis=2)).T

    def _outer_rho(self, Z) -> np.ndarray:
        m, d = Z.shape
        if self.outer_index.size == 0:
            return np.zeros((m, 0))
        tess = self.tess
        C = np.einsum("bij,mj->bmi", tess.outer_inv[self.outer_index], Z - tess.hull_center)
        cap = np.maximum(self.outer_cap, 1.0 + _MIN_HEIGHT)
        c0 = (1.0 + cap) / (2.0 * d)
        half = (cap - 1.0) / 2.0
        U = C - c0[:, None, None]
        s = U.sum(axis=2)
        ratios = np.concatenate(
            [-U / c0[:, None, None], (-s / half[:, None])[..., None], (s / half[:, None])[..., None]], axis=2
        )
        return np.maximum(ratios.max(axis=2), 0.0).T

    def _ball_rho(self, Z) -> np.ndarray:
        if self.ball_radii.size == 0:
            return np.zeros((Z.shape[0], 0))
        return pairwise_distances(Z, self.ball_centers) / self.ball_radii[None, :]

    def outer_region_center(self, j: int) -> np.ndarray:
        """Centroid of the ``2 d`` vertices of outer region ``j``."""
        return self.outer_region_vertices(j).mean(axis=0)

    def inner_region_vertices(self, j: int) -> np.ndarray:
        S = self.tess.cell_vertices(int(self.inner_cell[j]))
        apex = S[self.inner_vertex[j]]
        lam = min(1.0, 1.0 - float(self.inner_tau[j]))
        return apex + lam * (S - apex)

    def outer_region_vertices(self, j: int) -> np.ndarray:
        tess = self.tess
        P = tess.points[tess.hull_facets[self.outer_index[j]]]
        return np.vstack([P, tess.hull_center + self.outer_cap[j] * (P - tess.hull_center)])

    def geometry(self) -> dict:
        """Explicit region geometry: simplices, polytopes and balls."""
        return {
            "label": self.label,
            "kind": self.kind,
            "simplices": [
                {"prototype": self.inner_points[j].tolist(), "cell": int(self.inner_cell[j]),
                 "vertex": int(self.inner_vertex[j]), "tau": float(self.inner_tau[j]),
                 "vertices": self.inner_region_vertices(j).tolist()}
                for j in range(self.inner_cell.size)
            ],
            "polytopes": [
                {"prototype": self.outer_points[j].tolist(), "outer": int(self.outer_index[j]),
                 "level_cap": float(self.outer_cap[j]), "vertices": self.outer_region_vertices(j).tolist()}
                for j in range(self.outer_index.size)
            ],
            "balls": [
                {"center": self.ball_centers[j].tolist(), "radius": float(self.ball_radii[j])}
                for j in range(self.ball_radii.size)
            ],
        }

    def to_dict(self) -> dict:
        out = {
            "label": self.label, "kind": self.kind, "dim": self.dim, "r": self.r, "theta": self.theta,
            "n_targets": self.n_targets, "fallback": self.fallback,
            "inner": {"points": self.inner_points.tolist(), "cell": self.inner_cell.tolist(),
                      "vertex": self.inner_vertex.tolist(), "tau": self.inner_tau.tolist()},
            "outer": {"points": self.outer_points.tolist(), "index": self.outer_index.tolist(),
                      "cap": self.outer_cap.tolist()},
            "balls": {"centers": self.ball_centers.tolist(), "radii": self.ball_radii.tolist()},
            "per_cell_gamma": {str(k): v for k, v in sorted(self.per_cell_gamma.items())},
            "per_outer_gamma": {str(k): v for k, v in sorted(self.per_outer_gamma.items())},
            "tessellation": None,
        }
        if self.tess is not None:
            out["tessellation"] = {"points": self.tess.points.tolist(), "cells": self.tess.cells.tolist(),
                                   "seed": self.tess.seed}
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ClassCover":
        d = int(data["dim"])
        tess = None
        if data.get("tessellation"):
            t = data["tessellation"]
            tess = Tessellation.from_cells(np.array(t["points"], dtype=float).reshape(-1, d),
                                           np.array(t["cells"], dtype=np.int64), seed=int(t["seed"]))

        def arr(x, dtype=float, shape=None):
            a = np.array(x, dtype=dtype)
            return a.reshape(shape) if shape is not None else a

        return cls(
            label=int(data["label"]), kind=data["kind"], dim=d, r=float(data["r"]), theta=float(data["theta"]),
            n_targets=int(data["n_targets"]), tess=tess,
            inner_points=arr(data["inner"]["points"], shape=(-1, d)),
            inner_cell=arr(data["inner"]["cell"], np.int64), inner_vertex=arr(data["inner"]["vertex"], np.int64),
            inner_tau=arr(data["inner"]["tau"]),
            outer_points=arr(data["outer"]["points"], shape=(-1, d)),
            outer_index=arr(data["outer"]["index"], np.int64), outer_cap=arr(data["outer"]["cap"]),
            ball_centers=arr(data["balls"]["centers"], shape=(-1, d)), ball_radii=arr(data["balls"]["radii"]),
            fallback=data.get("fallback"),
            per_cell_gamma={int(k): v for k, v in data.get("per_cell_gamma", {}).items()},
            per_outer_gamma={int(k): v for k, v in data.get("per_outer_gamma", {}).items()},
        )


def check_training_data(X, y) -> tuple[np.ndarray, np.ndarray, int]:
    """Validate features and integer labels ``0..J-1``; returns ``(X, y, J)``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch("X must be (n, d) and y must have n labels")
    if not np.all(np.isfinite(X)):
        raise ValidationError("training features contain NaN or infinite values")
    if not np.issubdtype(y.dtype, np.integer) or (y.size and y.min() < 0):
        raise ValidationError("labels must be non-negative integers")
    y = y.astype(np.int64)
    J = int(y.max()) + 1 if y.size else 0
    if J < 2 or np.unique(y).size < 2:
        raise SingleClass("training data must contain at least two classes")
    counts = np.bincount(y, minlength=J)
    if np.any(counts == 0):
        raise EmptyClass(f"class {int(np.argmin(counts))} has no training points")
    return X, y, J


def _check_disjoint(T: np.ndarray, N: np.ndarray) -> None:
    if T.size == 0 or N.size == 0:
        return
    seen = {row.tobytes() for row in np.ascontiguousarray(N)}
    if any(row.tobytes() in seen for row in np.ascontiguousarray(T)):
        raise CoincidentPoints("a point appears in two different classes")


class CoverBuilder:
    """Per-class tessellations and target locations, shared across cover kinds.

    Building these once lets several covers (different kinds or expansion
    parameters) be derived from the same training sample cheaply.
    """

    def __init__(self, X, y, seed: int = 0, tol: float = DEFAULT_TOL):
        self.X, self.y, self.n_classes = check_training_data(X, y)
        self.dim = self.X.shape[1]
        self.seed = seed
        self.tol = tol
        self.targets, self.nontargets = [], []
        self.tess: list[Tessellation | None] = []
        self.located: list[Located | None] = []
        self.fallback: list[str | None] = []
        for j in range(self.n_classes):
            T = self.X[self.y == j]
            N = self.X[self.y != j]
            _check_disjoint(T, N)
            self.targets.append(T)
            self.nontargets.append(N)
            try:
                tess = tessellate(N, seed=seed, tol=tol)
            except (InsufficientPoints, DegenerateInput, ValidationError) as exc:
                self.tess.append(None)
                self.located.append(None)
                self.fallback.append(f"{type(exc).__name__}: {exc}")
                continue
            self.tess.append(tess)
            self.located.append(tess.locate_many(T))
            self.fallback.append(None)

    def cover(self, j: int, kind: str = "standard", r: float = 1.0, theta: float = 1.0) -> ClassCover:
        if kind not in COVER_KINDS:
            raise InvalidParameter(f"unknown cover kind {kind!r}")
        r = check_expansion(r)
        check_theta(theta)
        T, N, d = self.targets[j], self.nontargets[j], self.dim
        if kind == "spherical" or self.tess[j] is None:
            protos = spherical_mds(T, N, theta)
            return ClassCover(j, "spherical", d, r, float(theta), T.shape[0],
                              ball_centers=T[protos.balls], ball_radii=protos.radii,
                              fallback=None if kind == "spherical" else self.fallback[j])
        tess, loc = self.tess[j], self.located[j]
        if kind == "standard":
            protos = standard_mds(loc, r, self.tol)
        else:
            protos = composite_mds(loc, T, N, r, theta, self.tol)
        return self._assemble(j, kind, r, theta, protos)

    def _assemble(self, j: int, kind: str, r: float, theta: float, protos: PrototypeSet) -> ClassCover:
        T, loc, d = self.targets[j], self.located[j], self.dim
        ii = protos.inner
        w = loc.W[ii, :]
        vert = w.argmax(axis=1) if ii.size else np.zeros(0, dtype=np.int64)
        tau = 1.0 - r * (1.0 - w[np.arange(ii.size), vert]) if ii.size else np.zeros(0)
        oo = protos.outer
        cap = 1.0 + r * (np.maximum(loc.C[oo].sum(axis=1), 1.0) - 1.0) if oo.size else np.zeros(0)
        return ClassCover(
            j, kind, d, r, float(theta), T.shape[0], tess=self.tess[j],
            inner_points=T[ii], inner_cell=loc.index[ii].copy(), inner_vertex=vert.astype(np.int64), inner_tau=tau,
            outer_points=T[oo], outer_index=loc.index[oo].copy(), outer_cap=cap,
            ball_centers=T[protos.balls], ball_radii=protos.radii,
            per_cell_gamma=protos.per_cell_gamma, per_outer_gamma=protos.per_outer_gamma,
        )

    def covers(self, kind: str = "standard", r: float = 1.0, theta: float = 1.0) -> list[ClassCover]:
        return [self.cover(j, kind, r, theta) for j in range(self.n_classes)]


def verify_cover(cover: ClassCover, targets, nontargets, tol: float = 1e-6) -> dict:
    """Count purity and coverage violations of a cover on its training data.

    Purity: no non-target point lies strictly inside a region (dissimilarity
    below ``1 - tol``).  Coverage: every target point is in the cover
    (dissimilarity at most ``1 + tol``).
    """
    T = np.atleast_2d(np.asarray(targets, dtype=float))
    N = np.atleast_2d(np.asarray(nontargets, dtype=float))
    purity = 0
    if N.size:
        purity = int(np.sum(cover.dissimilarity(N) < 1.0 - tol))
    coverage = 0
    if T.size:
        coverage = int(np.sum(cover.dissimilarity(T) > 1.0 + tol))
    return {"purity_violations": purity, "coverage_violations": coverage}


def knn_predict(X, y, Z, k: int, n_classes: int | None = None) -> np.ndarray:
    """k-nearest-neighbour labels.

    Distance ties keep the lower training index; vote ties go to the lowest
    class index.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    k = int(k)
    if k < 1 or k > X.shape[0]:
        raise InvalidParameter(f"k must lie in [1, {X.shape[0]}], got {k}")
    J = int(y.max()) + 1 if n_classes is None else n_classes
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    out = np.empty(Z.shape[0], dtype=np.int64)
    for a in range(0, Z.shape[0], _CHUNK):
        D = pairwise_distances(Z[a:a + _CHUNK], X)
        near = np.argsort(D, axis=1, kind="stable")[:, :k]
        votes = np.zeros((near.shape[0], J), dtype=np.int64)
        np.add.at(votes, (np.repeat(np.arange(near.shape[0]), k), y[near].ravel()), 1)
        out[a:a + _CHUNK] = votes.argmax(axis=1)
    return out


@dataclass(eq=False)
class TrainedModel:
    """A fitted classifier of any supported kind.

    ``kind`` is one of ``standard``, ``composite``, ``spherical`` (cover
    classifiers), ``pe-knn``, ``pe-cccd`` (hybrids), ``knn`` or ``cccd``.
    """

    kind: str
    n_classes: int
    dim: int
    params: dict
    covers: list[ClassCover] = field(default_factory=list)
    alternative: "TrainedModel | None" = None
    X: np.ndarray | None = None
    y: np.ndarray | None = None
    class_names: list[str] | None = None

    def dissimilarities(self, Z, inner_only: bool = False) -> np.ndarray:
        """Cover dissimilarity of each query to each class, shape (m, J)."""
        Z = self._check(Z)
        if not self.covers:
            raise InvalidParameter(f"{self.kind} models have no class covers")
        return np.column_stack([c.dissimilarity(Z, inner_only) for c in self.covers])

    def pre_classify(self, Z) -> np.ndarray:
        """In-hull cover decision, or -1 where no class has dissimilarity below one."""
        rho = self.dissimilarities(Z, inner_only=True)
        best = rho.argmin(axis=1)
        return np.where(rho.min(axis=1) < 1.0, best, -1)

    def predict(self, Z) -> np.ndarray:
        Z = self._check(Z)
        if self.kind in COVER_KINDS or self.kind == "cccd":
            return self.dissimilarities(Z).argmin(axis=1)
        if self.kind == "knn":
            return knn_predict(self.X, self.y, Z, self.params["k"], self.n_classes)
        pre = self.pre_classify(Z)
        undecided = pre < 0
        if undecided.any():
            pre[undecided] = self.alternative.predict(Z[undecided])
        return pre

    def scores(self, Z) -> np.ndarray:
        """Binary score ``rho_0 - rho_1``; larger favours class 1."""
        if self.n_classes != 2:
            raise InvalidParameter("scores are defined for two classes")
        rho = self.dissimilarities(Z)
        return rho[:, 0] - rho[:, 1]

    def _check(self, Z) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        if Z.shape[1] != self.dim:
            raise DimensionMismatch(f"model expects dimension {self.dim}, got {Z.shape[1]}")
        return Z

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "kind": self.kind,
            "n_classes": self.n_classes,
            "dim": self.dim,
            "params": self.params,
            "class_names": self.class_names,
            "covers": [c.to_dict() for c in self.covers],
            "alternative": None if self.alternative is None else self.alternative.to_dict(),
            "X": None if self.X is None else self.X.tolist(),
            "y": None if self.y is None else self.y.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainedModel":
        if data.get("format") != MODEL_FORMAT:
            raise ValidationError(f"unsupported model format {data.get('format')!r}")
        d = int(data["dim"])
        return cls(
            kind=data["kind"], n_classes=int(data["n_classes"]), dim=d, params=dict(data["params"]),
            covers=[ClassCover.from_dict(c) for c in data["covers"]],
            alternative=None if data.get("alternative") is None else cls.from_dict(data["alternative"]),
            X=None if data.get("X") is None else np.array(data["X"], dtype=float).reshape(-1, d),
            y=None if data.get("y") is None else np.array(data["y"], dtype=np.int64),
            class_names=data.get("class_names"),
        )


def train(X, y, kind: str = "standard", r: float = 1.0, theta: float = 1.0, k: int = 1,
          seed: int = 0, builder: CoverBuilder | None = None, class_names=None) -> TrainedModel:
    """Fit a classifier of the given kind.

    Parameters
    ----------
    kind : str
        ``standard``, ``composite``, ``spherical``, ``pe-knn``, ``pe-cccd``,
        ``knn`` or ``cccd``.
    r : float
        Expansion parameter of the proportional-edge regions (>= 1).
    theta : float
        CCCD radius parameter in [0, 1].
    k : int
        Neighbours for k-NN.
    builder : CoverBuilder, optional
        Precomputed tessellations of the same ``X, y``.
    """
    if kind not in MODEL_KINDS:
        raise InvalidParameter(f"unknown classifier kind {kind!r}; choose from {', '.join(MODEL_KINDS)}")
    X, y, J = check_training_data(X, y)
    d = X.shape[1]
    params = {"r": float(r), "theta": float(theta), "k": int(k), "seed": int(seed)}
    names = None if class_names is None else [str(c) for c in class_names]
    if kind == "knn":
        if not 1 <= int(k) <= X.shape[0]:
            raise InvalidParameter(f"k must lie in [1, {X.shape[0]}], got {k}")
        return TrainedModel(kind, J, d, params, X=X.copy(), y=y.copy(), class_names=names)
    if kind == "cccd":
        check_theta(theta)
        covers = [_spherical_cover(X, y, j, theta) for j in range(J)]
        return TrainedModel(kind, J, d, params, covers=covers, class_names=names)
    b = builder if builder is not None else CoverBuilder(X, y, seed=seed)
    if kind in COVER_KINDS:
        return TrainedModel(kind, J, d, params, covers=b.covers(kind, r, theta), class_names=names)
    covers = b.covers("standard", r, theta)
    alt_kind = "knn" if kind == "pe-knn" else "cccd"
    alternative = train(X, y, alt_kind, r=r, theta=theta, k=k, seed=seed)
    return TrainedModel(kind, J, d, params, covers=covers, alternative=alternative, class_names=names)


def _spherical_cover(X, y, j, theta) -> ClassCover:
    T, N = X[y == j], X[y != j]
    _check_disjoint(T, N)
    protos = spherical_mds(T, N, theta)
    return ClassCover(j, "spherical", X.shape[1], 1.0, float(theta), T.shape[0],
                      ball_centers=T[protos.balls], ball_radii=protos.radii)


def train_cover_classifier(X, y, kind: str = "standard", r: float = 1.0, theta: float = 1.0, seed: int = 0) -> TrainedModel:
    if kind not in COVER_KINDS:
        raise InvalidParameter(f"cover kind must be one of {', '.join(COVER_KINDS)}")
    return train(X, y, kind, r=r, theta=theta, seed=seed)


def train_hybrid(X, y, r: float, alternative: str = "knn", k: int = 1, theta: float = 1.0, seed: int = 0) -> TrainedModel:
    if alternative not in ("knn", "cccd"):
        raise InvalidParameter("alternative must be 'knn' or 'cccd'")
    return train(X, y, "pe-" + alternative, r=r, theta=theta, k=k, seed=seed)
