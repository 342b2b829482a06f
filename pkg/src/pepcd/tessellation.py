"""Delaunay tessellation of a point set and the outer simplices beyond its hull.

The tessellation partitions space into the Delaunay cells of the non-target
points and, outside their convex hull, one unbounded *outer simplex* per hull
facet: the part of the cone from the hull center through the facet that lies
beyond the facet.  Every point of space is located in exactly one of these
pieces (ties on shared faces go to the lowest index).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import _kernels
from .errors import DegenerateInput, DimensionMismatch, InsufficientPoints, ValidationError
from .geometry import DEFAULT_TOL

MAX_DIM = 8


class Kind(IntEnum):
    INSIDE_CELL = 0
    IN_OUTER = 1
    ON_HULL_BOUNDARY = 2
    DEGENERATE = 3


@dataclass(frozen=True)
class Location:
    """Where a single point falls.

    ``coords`` are barycentric weights for cells and cone coordinates for
    outer simplices; ``index`` is -1 for degenerate input.
    """

    kind: Kind
    index: int
    coords: np.ndarray

    @property
    def in_hull(self) -> bool:
        return self.kind in (Kind.INSIDE_CELL, Kind.ON_HULL_BOUNDARY)


@dataclass(frozen=True)
class Located:
    """Batch location result, one entry per query row.

    ``W`` holds barycentric weights (valid for in-hull rows) and ``C`` cone
    coordinates (valid for outer rows).
    """

    kind: np.ndarray
    index: np.ndarray
    W: np.ndarray
    C: np.ndarray

    @property
    def in_hull(self) -> np.ndarray:
        return (self.kind == Kind.INSIDE_CELL) | (self.kind == Kind.ON_HULL_BOUNDARY)

    @property
    def outer(self) -> np.ndarray:
        return self.kind == Kind.IN_OUTER

    def __getitem__(self, i: int) -> Location:
        k = Kind(int(self.kind[i]))
        coords = self.C[i] if k == Kind.IN_OUTER else self.W[i]
        return Location(k, int(self.index[i]), coords.copy())


@dataclass(frozen=True, eq=False)
class Tessellation:
    """Delaunay cells plus outer simplices of a finite point set.

    Attributes
    ----------
    points : ndarray, shape (n, d)
        The input points; cell and facet entries index into this array.
    cells : ndarray of int, shape (K, d + 1)
    neighbors : ndarray of int, shape (K, d + 1)
        Cell across the facet opposite each vertex, -1 on the hull.
    hull_facets : ndarray of int, shape (L, d)
        Vertex indices of each hull facet; outer simplex ``l`` sits on facet ``l``.
    hull_center : ndarray, shape (d,)
        Mean of the distinct points on the hull boundary.
    seed : int
        Seed of the randomized insertion order.
    """

    points: np.ndarray
    cells: np.ndarray
    neighbors: np.ndarray
    hull_facets: np.ndarray
    hull_center: np.ndarray
    seed: int = 0
    tol: float = DEFAULT_TOL
    origins: np.ndarray = field(init=False, repr=False)
    tinv: np.ndarray = field(init=False, repr=False)
    outer_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        P = self.points
        S = P[self.cells]
        origins = S[:, 0, :].copy()
        tinv = np.linalg.inv(np.transpose(S[:, 1:, :] - S[:, :1, :], (0, 2, 1)))
        rays = P[self.hull_facets] - self.hull_center
        outer_inv = np.linalg.inv(np.transpose(rays, (0, 2, 1)))
        object.__setattr__(self, "origins", origins)
        object.__setattr__(self, "tinv", tinv)
        object.__setattr__(self, "outer_inv", outer_inv)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def n_outer(self) -> int:
        return self.hull_facets.shape[0]

    @property
    def hull_vertices(self) -> np.ndarray:
        return np.unique(self.hull_facets)

    def cell_vertices(self, k: int) -> np.ndarray:
        return self.points[self.cells[k]]

    def outer_rays(self, l: int) -> np.ndarray:
        """Ray directions (rows) of outer simplex ``l``."""
        return self.points[self.hull_facets[l]] - self.hull_center

    def barycentric(self, k: int, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        tail = (X - self.origins[k]) @ self.tinv[k].T
        return np.concatenate([1.0 - tail.sum(axis=-1, keepdims=True), tail], axis=-1)

    def cone_coords(self, l: int, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.hull_center) @ self.outer_inv[l].T

    def locate(self, x) -> Location:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionMismatch(f"expected a point of dimension {self.dim}")
        return self.locate_many(x[None, :])[0]

    def locate_many(self, X) -> Located:
        """Locate each row of ``X`` in a cell or an outer simplex."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise DimensionMismatch(f"expected an (m, {self.dim}) array")
        m, d = X.shape
        tol = self.tol
        kind = np.full(m, int(Kind.DEGENERATE), dtype=np.int64)
        index = np.full(m, -1, dtype=np.int64)
        W = np.zeros((m, d + 1))
        C = np.zeros((m, d))
        finite = np.all(np.isfinite(X), axis=1)
        rows = np.flatnonzero(finite)
        if rows.size == 0:
            return Located(kind, index, W, C)
        cell_idx, Wc = _kernels.locate_cells(X[rows], self.origins, self.tinv, tol)
        W[rows] = Wc
        hit = cell_idx >= 0
        index[rows[hit]] = cell_idx[hit]
        kind[rows[hit]] = int(Kind.INSIDE_CELL)
        on_hull = self._touches_hull(cell_idx[hit], Wc[hit])
        kind[rows[hit][on_hull]] = int(Kind.ON_HULL_BOUNDARY)

        rest = rows[~hit]
        if rest.size:
            cc = np.einsum("lij,mj->mli", self.outer_inv, X[rest] - self.hull_center)
            score = np.minimum(cc.min(axis=2), cc.sum(axis=2) - 1.0)
            ok = score >= -tol
            pick = np.where(ok.any(axis=1), ok.argmax(axis=1), score.argmax(axis=1))
            kind[rest] = int(Kind.IN_OUTER)
            index[rest] = pick
            C[rest] = cc[np.arange(rest.size), pick]
        return Located(kind, index, W, C)

    def _touches_hull(self, cell_idx, W) -> np.ndarray:
        if cell_idx.size == 0:
            return np.zeros(0, dtype=bool)
        hull_face = self.neighbors[cell_idx] < 0
        return np.any(hull_face & (np.abs(W) <= self.tol), axis=1)

    def to_dict(self) -> dict:
        """Debug view: points, cells, and each outer simplex's facet and rays."""
        return {
            "points": self.points.tolist(),
            "cells": self.cells.tolist(),
            "outer": [
                {"facet_ids": f.tolist(), "ray_dirs": self.outer_rays(l).tolist()}
                for l, f in enumerate(self.hull_facets)
            ],
            "hull_center": self.hull_center.tolist(),
            "seed": self.seed,
        }

    @classmethod
    def from_cells(cls, points, cells, seed: int = 0, tol: float = DEFAULT_TOL) -> "Tessellation":
        """Rebuild adjacency, hull facets and center from stored cells."""
        P = np.asarray(points, dtype=float)
        cells = np.asarray(cells, dtype=np.int64)
        neighbors = _face_neighbors(cells)
        facets = _hull_facets(cells, neighbors)
        return cls(P, cells, neighbors, facets, _hull_center(P, facets), seed=seed, tol=tol)


def _face_neighbors(cells: np.ndarray) -> np.ndarray:
    nv = cells.shape[1]
    nbr = np.full(cells.shape, -1, dtype=np.int64)
    seen: dict[tuple, tuple[int, int]] = {}
    for c, verts in enumerate(cells.tolist()):
        for k in range(nv):
            key = tuple(sorted(verts[:k] + verts[k + 1:]))
            other = seen.pop(key, None)
            if other is None:
                seen[key] = (c, k)
            else:
                nbr[c, k] = other[0]
                nbr[other[0], other[1]] = c
    return nbr


def _hull_facets(cells: np.ndarray, neighbors: np.ndarray) -> np.ndarray:
    nv = cells.shape[1]
    out = []
    for c, k in zip(*np.nonzero(neighbors < 0)):
        out.append([cells[c, j] for j in range(nv) if j != k])
    return np.array(out, dtype=np.int64).reshape(-1, nv - 1)


def _hull_center(points: np.ndarray, facets: np.ndarray) -> np.ndarray:
    return points[np.unique(facets)].mean(axis=0)


def _enclosing_simplex(center: np.ndarray, radius: float) -> np.ndarray:
    """Regular simplex whose inscribed ball is centered at ``center`` with ``radius``."""
    d = center.shape[0]
    E = np.eye(d + 1) - 1.0 / (d + 1)
    # orthonormal basis of the hyperplane sum(x) = 0
    basis = np.linalg.svd(E)[2][:d]
    V = E @ basis.T
    V *= d / np.linalg.norm(V[0])  # circumradius d gives inradius 1
    return center + radius * V


def _facet_normal(F: np.ndarray, inside: np.ndarray) -> np.ndarray:
    """Unit normal of the hyperplane through rows of ``F``, pointing away from ``inside``."""
    d = F.shape[1]
    if d == 1:
        n = np.ones(1)
    else:
        n = np.linalg.svd(F[1:] - F[0])[2][-1]
    if n @ (inside - F[0]) > 0:
        n = -n
    return n / np.linalg.norm(n)


def _fill_hull(P, cells, nbr, extent):
    """Add Delaunay cells along hull pockets left by the enclosing simplex.

    Any boundary facet with input points strictly beyond it is closed by the
    point whose sphere through the facet is smallest on that side, which keeps
    the empty-sphere property (the wall-advancing step of DeWall).
    """
    nv = P.shape[1] + 1
    eps = 1e-9 * extent
    boundary: dict[tuple, tuple[int, int]] = {}
    queue = []
    for c, k in zip(*np.nonzero(np.array(nbr).reshape(-1, nv) < 0)):
        c, k = int(c), int(k)
        key = tuple(sorted(cells[c][:k] + cells[c][k + 1:]))
        boundary[key] = (c, k)
        queue.append(key)
    while queue:
        key = queue.pop(0)
        if key not in boundary:
            continue
        c, k = boundary[key]
        facet = [v for j, v in enumerate(cells[c]) if j != k]
        F = P[facet]
        n = _facet_normal(F, P[cells[c][k]])
        beyond = np.flatnonzero((P - F[0]) @ n > eps)
        if beyond.size == 0:
            continue
        rel = F[1:] - F[0]
        best, best_q = np.inf, -1
        for q in beyond:
            M = np.vstack([rel, P[q] - F[0]])
            try:
                x = np.linalg.solve(2.0 * M, (M * M).sum(axis=1))
            except np.linalg.LinAlgError:
                continue
            s = x @ n
            if s < best - 1e-12 * extent:
                best, best_q = s, int(q)
        if best_q < 0:
            continue
        nid = len(cells)
        verts = facet[:k] + [best_q] + facet[k:]
        cells.append(verts)
        nbr.append([-1] * nv)
        nbr[nid][k] = c
        nbr[c][k] = nid
        del boundary[key]
        for j in range(nv):
            if j == k:
                continue
            fkey = tuple(sorted(verts[:j] + verts[j + 1:]))
            other = boundary.pop(fkey, None)
            if other is None:
                boundary[fkey] = (nid, j)
                queue.append(fkey)
            else:
                nbr[nid][j] = other[0]
                nbr[other[0]][other[1]] = nid
    return cells, nbr


def tessellate(points, seed: int = 0, tol: float = DEFAULT_TOL, enclosing_scale: float = 100.0) -> Tessellation:
    """Delaunay tessellation of ``points`` with outer simplices.

    Points are inserted one at a time in a seeded random order into a large
    enclosing simplex (Bowyer-Watson); cells touching the enclosing simplex
    are then dropped and any hull pockets this leaves are filled.  Duplicate
    points are kept in ``points`` but only their first copy is a vertex.

    Parameters
    ----------
    points : array_like, shape (n, d)
    seed : int
        Seed of the insertion order.  Results are identical for equal seeds.
    tol : float
        Location tolerance stored on the result.
    enclosing_scale : float
        Inradius of the enclosing simplex relative to the data radius.

    Raises
    ------
    InsufficientPoints
        Fewer than ``d + 1`` distinct points.
    DegenerateInput
        The points span a lower-dimensional affine subspace.

    Examples
    --------
    >>> t = tessellate([[0, 0], [4, 0], [0, 4], [1, 1]])
    >>> t.n_cells, t.n_outer
    (3, 3)
    >>> t.locate([10.0, 10.0]).kind.name
    'IN_OUTER'
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[1] < 1:
        raise DimensionMismatch("points must be an (n, d) array")
    n, d = P.shape
    if d > MAX_DIM:
        raise ValidationError(f"dimension {d} exceeds the supported maximum {MAX_DIM}")
    if not np.all(np.isfinite(P)):
        raise ValidationError("points contain NaN or infinite values")
    _, first = np.unique(P, axis=0, return_index=True)
    first = np.sort(first)
    if first.size < d + 1:
        raise InsufficientPoints(f"need at least {d + 1} distinct points in dimension {d}, got {first.size}")
    U = P[first]
    center = U.mean(axis=0)
    sv = np.linalg.svd(U - center, compute_uv=False)
    if sv[0] == 0.0 or sv[d - 1] <= 1e-10 * sv[0]:
        raise DegenerateInput("points lie in a lower-dimensional affine subspace")
    radius = float(np.max(np.linalg.norm(U - center, axis=1)))
    extent = float(np.max(U.max(axis=0) - U.min(axis=0)))

    rng = np.random.default_rng(seed)
    order = first[rng.permutation(first.size)]
    scale = float(enclosing_scale)
    for _ in range(4):
        enclosing = _enclosing_simplex(center, scale * radius)
        work = np.vstack([P, enclosing])
        cells, nbr = _kernels.bowyer_watson(work, order, 1e-10 * extent, 1e-10)
        keep = np.all(cells < n, axis=1)
        if keep.any():
            break
        # every cell reached the enclosing simplex (thin inputs); the fill step needs one seed cell
        scale *= 1e3
    else:
        raise DegenerateInput("no Delaunay cell separates from the enclosing simplex")
    remap = np.full(cells.shape[0] + 1, -1, dtype=np.int64)
    remap[np.flatnonzero(keep)] = np.arange(int(keep.sum()))
    cells_l = cells[keep].tolist()
    nbr_l = remap[nbr[keep]].tolist()
    cells_l, nbr_l = _fill_hull(P, cells_l, nbr_l, extent)
    cells_a = np.array(cells_l, dtype=np.int64).reshape(-1, d + 1)
    nbr_a = np.array(nbr_l, dtype=np.int64).reshape(-1, d + 1)
    facets = _hull_facets(cells_a, nbr_a)
    return Tessellation(P, cells_a, nbr_a, facets, _hull_center(P, facets), seed=seed, tol=tol)
