"""Proximity regions and the catch digraphs they induce.

Three region families are built here:

* inner proportional-edge regions, inside one Delaunay cell: the part of the
  cell on the vertex side of a hyperplane parallel to the opposite face, at
  ``r`` times the distance of ``x`` from the vertex;
* outer proportional-edge regions, inside one outer simplex: the slab between
  the hull facet and a parallel level ``1 + r (s(x) - 1)``, where ``s`` is the
  sum of cone coordinates;
* open balls with the CCCD radius, anywhere in space.

A digraph has an arc ``u -> v`` when ``v`` lies in the region of ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CoincidentPoints,
    EmptyNonTarget,
    InvalidParameter,
    NotInOuterSimplex,
    OutsideCell,
)
from .geometry import DEFAULT_TOL, barycentric, vertex_region
from .tessellation import Located, Tessellation

MACHINE_EPS = float(np.finfo(float).eps)


def check_expansion(r: float) -> float:
    r = float(r)
    if not np.isfinite(r) or r < 1.0:
        raise InvalidParameter(f"expansion parameter r must be a finite number >= 1, got {r}")
    return r


def check_theta(theta: float) -> float:
    theta = float(theta)
    if not 0.0 <= theta <= 1.0:
        raise InvalidParameter(f"theta must lie in [0, 1], got {theta}")
    return MACHINE_EPS if theta == 0.0 else theta


@dataclass(frozen=True)
class InnerRegion:
    """Proportional-edge region inside cell ``cell`` for the vertex ``vertex``.

    A point with barycentric weights ``w`` in that cell belongs to the region
    when ``w[vertex] >= tau``.  ``tau <= 0`` means the whole cell.
    """

    cell: int
    vertex: int
    tau: float

    @property
    def scale(self) -> float:
        """Edge fraction of the region simplex, capped at the whole cell."""
        return min(1.0, 1.0 - self.tau)

    def contains(self, w, tol: float = DEFAULT_TOL):
        w = np.asarray(w, dtype=float)
        inside = np.all(w >= -tol, axis=-1)
        return inside & (w[..., self.vertex] >= self.tau - tol)

    def vertices(self, simplex) -> np.ndarray:
        """Vertices of the region simplex (ordered like the cell vertices)."""
        S = np.asarray(simplex, dtype=float)
        apex = S[self.vertex]
        return apex + self.scale * (S - apex)

    def to_dict(self) -> dict:
        return {"cell": self.cell, "vertex": self.vertex, "tau": self.tau}


@dataclass(frozen=True)
class OuterRegion:
    """Proportional-edge region inside outer simplex ``outer``.

    Members have cone coordinates ``c >= 0`` with ``1 <= sum(c) <= level_cap``.
    """

    outer: int
    level_cap: float

    def contains(self, c, tol: float = DEFAULT_TOL):
        c = np.asarray(c, dtype=float)
        s = c.sum(axis=-1)
        return np.all(c >= -tol, axis=-1) & (s >= 1.0 - tol) & (s <= self.level_cap + tol)

    def vertices(self, tess: Tessellation) -> np.ndarray:
        """The ``2 d`` vertices: the facet points and their images on the cap level."""
        P = tess.points[tess.hull_facets[self.outer]]
        C = tess.hull_center
        return np.vstack([P, C + self.level_cap * (P - C)])

    def to_dict(self) -> dict:
        return {"outer": self.outer, "level_cap": self.level_cap}


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def contains(self, z):
        z = np.asarray(z, dtype=float)
        return np.linalg.norm(z - self.center, axis=-1) < self.radius

    def to_dict(self) -> dict:
        return {"center": np.asarray(self.center).tolist(), "radius": self.radius}


def inner_region_from_weights(w, r: float, cell: int = -1, m=None, tol: float = DEFAULT_TOL) -> InnerRegion:
    """Region of a point with barycentric weights ``w`` in its cell.

    Raises
    ------
    OutsideCell
        If the point is outside the cell by more than ``tol``.
    """
    r = check_expansion(r)
    w = np.asarray(w, dtype=float)
    if np.any(w < -tol):
        raise OutsideCell("point lies outside the cell")
    i = vertex_region(w, m=m, tol=tol)
    return InnerRegion(int(cell), int(i), 1.0 - r * (1.0 - float(w[i])))


def pe_region_inner(simplex, x, r: float, m=None, tol: float = DEFAULT_TOL) -> InnerRegion:
    """Inner proportional-edge region of ``x`` in ``simplex``.

    Examples
    --------
    >>> reg = pe_region_inner([[0, 0], [1, 0], [0, 1]], [0.1, 0.1], r=2)
    >>> reg.vertex, round(reg.tau, 12)
    (0, 0.6)
    """
    return inner_region_from_weights(barycentric(simplex, x), r, m=m, tol=tol)


def outer_region_from_coords(c, r: float, outer: int = -1, tol: float = DEFAULT_TOL) -> OuterRegion:
    """Region of a point with cone coordinates ``c`` in its outer simplex.

    Raises
    ------
    NotInOuterSimplex
        If the coordinates do not describe a point of the outer simplex.
    """
    r = check_expansion(r)
    c = np.asarray(c, dtype=float)
    s = float(c.sum())
    if np.any(c < -tol) or s < 1.0 - tol:
        raise NotInOuterSimplex("point is not in the outer simplex")
    return OuterRegion(int(outer), 1.0 + r * (max(s, 1.0) - 1.0))


def pe_region_outer(tess: Tessellation, outer: int, x, r: float, tol: float = DEFAULT_TOL) -> OuterRegion:
    """Outer proportional-edge region of ``x`` in outer simplex ``outer``."""
    return outer_region_from_coords(tess.cone_coords(outer, x), r, outer=outer, tol=tol)


def cccd_radii(targets, nontargets, theta: float = 1.0) -> np.ndarray:
    """Ball radii of the class cover catch digraph for every target point.

    For target ``x`` let ``u`` be the nearest non-target and ``l`` the
    farthest target strictly closer than ``u`` (``x`` itself when none is).
    The radius is ``(1 - theta) |x - l| + theta |x - u|``; ``theta = 0`` is
    replaced by machine epsilon so the ball stays larger than ``|x - l|``.

    Raises
    ------
    EmptyNonTarget
        If there are no non-target points.
    CoincidentPoints
        If a target coincides with a non-target.
    """
    theta = check_theta(theta)
    T = np.atleast_2d(np.asarray(targets, dtype=float))
    N = np.atleast_2d(np.asarray(nontargets, dtype=float))
    if N.shape[0] == 0 or N.size == 0:
        raise EmptyNonTarget("the CCCD radius needs at least one non-target point")
    d_u = pairwise_distances(T, N).min(axis=1)
    if np.any(d_u == 0.0):
        raise CoincidentPoints("a target point coincides with a non-target point")
    D = pairwise_distances(T, T)
    closer = np.where(D < d_u[:, None], D, 0.0)
    d_l = closer.max(axis=1)
    return (1.0 - theta) * d_l + theta * d_u


def cccd_radius(x, targets, nontargets, theta: float = 1.0) -> float:
    """CCCD radius of a single point ``x`` (which should be one of ``targets``)."""
    T = np.vstack([np.atleast_2d(np.asarray(x, dtype=float)), np.atleast_2d(targets)])
    return float(cccd_radii(T, nontargets, theta)[0])


def pairwise_distances(A, B) -> np.ndarray:
    """Euclidean distances between rows, computed by explicit differences."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    out = np.empty((A.shape[0], B.shape[0]))
    step = max(1, 2_000_000 // max(1, B.shape[0] * A.shape[1]))
    for a in range(0, A.shape[0], step):
        diff = A[a:a + step, None, :] - B[None, :, :]
        out[a:a + step] = np.sqrt((diff * diff).sum(axis=2))
    return out


@dataclass(frozen=True, eq=False)
class Digraph:
    """Directed graph on ``n`` vertices stored as a boolean matrix (no self loops)."""

    adj: np.ndarray

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    def closed(self) -> np.ndarray:
        """Closed out-neighbourhood matrix: each row includes its own vertex."""
        A = self.adj.copy()
        np.fill_diagonal(A, True)
        return A

    def out_neighbors(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.adj[v])

    @property
    def n_arcs(self) -> int:
        return int(self.adj.sum())


def _groups(index: np.ndarray, mask: np.ndarray):
    rows = np.flatnonzero(mask)
    for g in np.unique(index[rows]):
        yield int(g), rows[index[rows] == g]


def build_pe_pcd(tess: Tessellation, loc: Located, r: float, tol: float = DEFAULT_TOL) -> Digraph:
    """Proportional-edge catch digraph of located target points.

    Arcs only join points in the same cell or the same outer simplex.
    """
    r = check_expansion(r)
    n = loc.kind.shape[0]
    A = np.zeros((n, n), dtype=bool)
    for _, rows in _groups(loc.index, loc.in_hull):
        W = loc.W[rows]
        v = W.argmax(axis=1)
        tau = 1.0 - r * (1.0 - W[np.arange(rows.size), v])
        A[np.ix_(rows, rows)] = W[:, v].T >= tau[:, None] - tol
    for _, rows in _groups(loc.index, loc.outer):
        s = loc.C[rows].sum(axis=1)
        cap = 1.0 + r * (s - 1.0)
        A[np.ix_(rows, rows)] = s[None, :] <= cap[:, None] + tol
    np.fill_diagonal(A, False)
    return Digraph(A)


def build_cccd(targets, nontargets, theta: float = 1.0) -> tuple[Digraph, np.ndarray]:
    """Class cover catch digraph and the ball radii it was built from."""
    T = np.atleast_2d(np.asarray(targets, dtype=float))
    radii = cccd_radii(T, nontargets, theta)
    D = pairwise_distances(T, T)
    A = D <= radii[:, None] * (1.0 + 1e-12)
    np.fill_diagonal(A, False)
    return Digraph(A), radii
