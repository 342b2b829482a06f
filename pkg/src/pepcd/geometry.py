"""Simplex primitives: barycentric and cone coordinates, vertex regions and
convex distances.

All routines take plain ``numpy`` arrays.  Simplices are ``(d + 1, d)``
arrays of vertices; barycentric weights are ordered like the vertices, so
``w[0]`` is the weight of ``simplex[0]``.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import DegenerateSimplex, DimensionMismatch, OutsideSimplex, UnboundedRay

DEFAULT_TOL = 1e-9


class PointPosition(str, Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    VERTEX = "vertex"
    OUTSIDE = "outside"


def _as_simplex(simplex) -> np.ndarray:
    S = np.asarray(simplex, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] + 1:
        raise DimensionMismatch(f"a simplex needs d + 1 vertices in d dimensions, got shape {S.shape}")
    return S


def simplex_inverse(simplex) -> tuple[np.ndarray, np.ndarray]:
    """Origin vertex and inverse edge matrix used for barycentric solves.

    Returns ``(origin, tinv)`` with ``w[1:] = tinv @ (x - origin)`` and
    ``w[0] = 1 - sum(w[1:])``.

    Raises
    ------
    DegenerateSimplex
        If the vertices are affinely dependent (relative volume below 1e-12).
    """
    S = _as_simplex(simplex)
    A = (S[1:] - S[0]).T
    scale = np.prod(np.linalg.norm(A, axis=0))
    det = np.linalg.det(A) if A.size else 1.0
    if scale == 0.0 or abs(det) <= 1e-12 * scale:
        raise DegenerateSimplex("simplex vertices are affinely dependent")
    return S[0].copy(), np.linalg.inv(A)


def barycentric(simplex, x) -> np.ndarray:
    """Barycentric coordinates of ``x`` with respect to ``simplex``.

    Parameters
    ----------
    simplex : array_like, shape (d + 1, d)
    x : array_like, shape (d,) or (m, d)

    Returns
    -------
    ndarray, shape (d + 1,) or (m, d + 1)
        Weights summing to one; ``x == w @ simplex`` up to rounding.

    Examples
    --------
    >>> barycentric([[0, 0], [1, 0], [0, 1]], [0.5, 0.6]).round(12)
    array([-0.1,  0.5,  0.6])
    """
    S = _as_simplex(simplex)
    X = np.asarray(x, dtype=float)
    if X.shape[-1] != S.shape[1]:
        raise DimensionMismatch(f"point has dimension {X.shape[-1]}, simplex has {S.shape[1]}")
    origin, tinv = simplex_inverse(S)
    return barycentric_from_inverse(origin, tinv, X)


def barycentric_from_inverse(origin, tinv, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    tail = (X - origin) @ tinv.T
    head = 1.0 - tail.sum(axis=-1, keepdims=True)
    return np.concatenate([head, tail], axis=-1)


def classify_location(w, tol: float = DEFAULT_TOL) -> PointPosition:
    """Where a point sits relative to a simplex, from its barycentric weights."""
    w = np.asarray(w, dtype=float)
    if np.any(w < -tol):
        return PointPosition.OUTSIDE
    if np.any(w >= 1.0 - tol):
        return PointPosition.VERTEX
    if np.any(np.abs(w) <= tol):
        return PointPosition.BOUNDARY
    return PointPosition.INTERIOR


def vertex_region(w, m=None, tol: float = DEFAULT_TOL) -> int:
    """Index of the vertex region holding a point with weights ``w``.

    The regions are defined by a center with barycentric weights ``m``
    (the centroid when ``m`` is None).  A point belongs to region ``i`` when
    ``w[i] / m[i]`` is the largest ratio; ties go to the lowest index.

    Raises
    ------
    OutsideSimplex
        If any weight is below ``-tol``.
    """
    w = np.asarray(w, dtype=float)
    if np.any(w < -tol):
        raise OutsideSimplex("point lies outside the simplex")
    if m is None:
        return int(np.argmax(w))
    m = np.asarray(m, dtype=float)
    if m.shape != w.shape or np.any(m <= 0) or abs(m.sum() - 1.0) > 1e-9:
        raise DimensionMismatch("center weights must be positive, sum to one and match w")
    return int(np.argmax(w / m))


def vertex_regions(W) -> np.ndarray:
    """Row-wise centroid vertex regions (argmax of each row, lowest index on ties)."""
    return np.asarray(W).argmax(axis=-1)


def simplex_convex_distance(w) -> np.ndarray | float:
    """Convex distance to a simplex about its centroid, from barycentric weights.

    ``w`` are the weights of the query point with respect to the simplex
    itself.  Values below one are interior, one is the boundary.
    """
    w = np.asarray(w, dtype=float)
    d1 = w.shape[-1]
    out = 1.0 - d1 * w.min(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def simplex_halfspaces(simplex) -> tuple[np.ndarray, np.ndarray]:
    """Half-space form ``A z <= b`` of a simplex (one row per facet)."""
    origin, tinv = simplex_inverse(simplex)
    # w_k(z) >= 0 written as -w_k(z) <= 0, w affine in z
    rows_tail = -tinv
    b_tail = -(tinv @ origin)
    row_head = tinv.sum(axis=0)
    b_head = 1.0 + row_head @ origin
    A = np.vstack([row_head, rows_tail])
    b = np.concatenate([[b_head], b_tail])
    return A, b


def polytope_convex_distance(A, b, center, z) -> np.ndarray | float:
    """Convex distance of ``z`` from a polytope ``{A x <= b}`` about ``center``.

    This is ``|z - center| / |t - center|`` where ``t`` is the point where the
    ray from ``center`` through ``z`` leaves the polytope.  ``center`` must be
    interior.  ``z`` may be a single point or an ``(m, d)`` array.

    Raises
    ------
    UnboundedRay
        If the ray never leaves the polytope.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    center = np.asarray(center, dtype=float)
    Z = np.atleast_2d(np.asarray(z, dtype=float))
    slack = b - A @ center
    if np.any(slack <= 0):
        raise DimensionMismatch("center is not interior to the polytope")
    U = Z - center
    rate = U @ A.T
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rate > 0, rate / slack, 0.0)
    rho = ratio.max(axis=1)
    moving = np.any(U != 0, axis=1)
    if np.any(moving & (rho <= 0)):
        raise UnboundedRay("ray from the center never leaves the polytope")
    return float(rho[0]) if np.ndim(z) == 1 else rho


def cone_coordinates(apex, rays, x) -> np.ndarray:
    """Coefficients ``c`` with ``x - apex = sum_i c_i rays[i]``.

    ``rays`` is a ``(d, d)`` array of ray directions (one per row).
    """
    R = np.asarray(rays, dtype=float)
    X = np.asarray(x, dtype=float)
    M = R.T
    if abs(np.linalg.det(M)) <= 1e-12 * max(1.0, np.prod(np.linalg.norm(R, axis=1))):
        raise DegenerateSimplex("cone rays are linearly dependent")
    return (X - np.asarray(apex, dtype=float)) @ np.linalg.inv(M).T


def circumsphere(simplex) -> tuple[np.ndarray, float]:
    """Center and radius of the sphere through all vertices of a simplex."""
    S = _as_simplex(simplex)
    rel = S[1:] - S[0]
    try:
        x = np.linalg.solve(2.0 * rel, (rel * rel).sum(axis=1))
    except np.linalg.LinAlgError as exc:
        raise DegenerateSimplex("simplex vertices are affinely dependent") from exc
    return S[0] + x, float(np.linalg.norm(x))
