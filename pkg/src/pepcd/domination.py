"""Dominating sets of catch digraphs: greedy, exact per cell, and brute force.

A set ``S`` dominates a digraph when every vertex is in ``S`` or is the head
of an arc from ``S``.  Prototype sets of the class covers are dominating sets
of the proportional-edge or CCCD digraphs of the target class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import _kernels
from .errors import EmptyDigraph, TooLarge
from .geometry import DEFAULT_TOL
from .proximity import Digraph, build_cccd, check_expansion
from .tessellation import Located, Tessellation

BRUTE_FORCE_LIMIT = 25


@dataclass(frozen=True, eq=False)
class PrototypeSet:
    """Prototypes chosen for one target class, split by region family.

    Entries of ``inner``, ``outer`` and ``balls`` index the target points.
    ``radii`` holds the ball radii, aligned with ``balls``.
    """

    n_targets: int
    inner: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    outer: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    balls: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    radii: np.ndarray = field(default_factory=lambda: np.zeros(0))
    per_cell_gamma: dict = field(default_factory=dict)
    per_outer_gamma: dict = field(default_factory=dict)

    @property
    def indices(self) -> np.ndarray:
        return np.sort(np.concatenate([self.inner, self.outer, self.balls]))

    def __len__(self) -> int:
        return int(self.inner.size + self.outer.size + self.balls.size)

    @property
    def reduction(self) -> float | None:
        """Fraction of target points not kept as prototypes."""
        if self.n_targets == 0:
            return None
        return 1.0 - len(self) / self.n_targets


def _closed(adj) -> np.ndarray:
    A = adj.closed() if isinstance(adj, Digraph) else np.array(adj, dtype=bool)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("adjacency must be a square matrix")
    np.fill_diagonal(A, True)
    return A


def greedy_mds(adj) -> np.ndarray:
    """Greedy dominating set, in the order the vertices were picked.

    At each step the vertex (among those not yet dominated) with the largest
    closed out-neighbourhood inside the still-undominated set is picked; ties
    go to the lowest index.

    Raises
    ------
    EmptyDigraph
        If the digraph has no vertices.

    Examples
    --------
    >>> import numpy as np
    >>> star = np.zeros((4, 4), dtype=bool)
    >>> star[2] = True
    >>> greedy_mds(star).tolist()
    [2]
    """
    A = _closed(adj)
    if A.shape[0] == 0:
        raise EmptyDigraph("cannot dominate an empty digraph")
    return _kernels.greedy_dominating_set(A.view(np.uint8))


def _components(A: np.ndarray) -> list[np.ndarray]:
    sym = A | A.T
    n = A.shape[0]
    label = np.full(n, -1)
    comps = []
    for s in range(n):
        if label[s] >= 0:
            continue
        label[s] = len(comps)
        stack, members = [s], [s]
        while stack:
            v = stack.pop()
            for u in np.flatnonzero(sym[v] & (label < 0)):
                label[u] = len(comps)
                stack.append(int(u))
                members.append(int(u))
        comps.append(np.sort(np.array(members)))
    return comps


def brute_force_mds(adj, limit: int = BRUTE_FORCE_LIMIT) -> np.ndarray:
    """Minimum dominating set by exhaustive search.

    Each weakly connected component is searched separately by increasing
    set size; within a size the lexicographically first dominating subset
    is kept.  Returns sorted vertex indices.

    Raises
    ------
    TooLarge
        If a component has more than ``limit`` vertices.

    Examples
    --------
    >>> import numpy as np
    >>> path = np.eye(4, k=1, dtype=bool) | np.eye(4, k=-1, dtype=bool)
    >>> brute_force_mds(path).tolist()
    [0, 2]
    """
    A = _closed(adj)
    if A.shape[0] == 0:
        raise EmptyDigraph("cannot dominate an empty digraph")
    chosen = []
    for comp in _components(A):
        if comp.size > limit:
            raise TooLarge(f"component of size {comp.size} exceeds brute-force limit {limit}")
        sub = A[np.ix_(comp, comp)]
        masks = [int("".join("1" if b else "0" for b in row[::-1]), 2) for row in sub]
        full = (1 << comp.size) - 1
        done = False
        for size in range(1, comp.size + 1):
            for combo in combinations(range(comp.size), size):
                acc = 0
                for v in combo:
                    acc |= masks[v]
                if acc == full:
                    chosen.extend(int(comp[v]) for v in combo)
                    done = True
                    break
            if done:
                break
    return np.sort(np.array(chosen, dtype=np.int64))


def exact_mds_cell(W, r: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Minimum dominating set of the proportional-edge digraph inside one cell.

    ``W`` holds the barycentric weights of the target points in the cell.
    Candidates are the local extrema, the point of each vertex region closest
    to the opposite face; subsets of them are tried by increasing size.
    Returns row indices ordered by vertex.
    """
    r = check_expansion(r)
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if W.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    protos, _ = _kernels.exact_mds_groups(W, np.array([0, W.shape[0]], dtype=np.int64), r, tol)
    return protos


def exact_mds_hull(loc: Located, r: float, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, dict]:
    """Exact dominating set of all in-hull targets, cell by cell.

    Returns target indices and a ``{cell: gamma}`` map over non-empty cells.
    """
    r = check_expansion(r)
    rows = np.flatnonzero(loc.in_hull)
    if rows.size == 0:
        return np.zeros(0, dtype=np.int64), {}
    order = rows[np.argsort(loc.index[rows], kind="stable")]
    cells = loc.index[order]
    cuts = np.flatnonzero(np.diff(cells)) + 1
    starts = np.concatenate([[0], cuts, [order.size]]).astype(np.int64)
    protos, gammas = _kernels.exact_mds_groups(loc.W[order], starts, r, tol)
    per_cell = {int(cells[s]): int(g) for s, g in zip(starts[:-1], gammas)}
    return order[protos], per_cell


def outer_prototypes(loc: Located) -> tuple[np.ndarray, dict]:
    """One prototype per non-empty outer simplex: the target farthest beyond the facet."""
    rows = np.flatnonzero(loc.outer)
    picks, per_outer = [], {}
    for l in np.unique(loc.index[rows]):
        members = rows[loc.index[rows] == l]
        s = loc.C[members].sum(axis=1)
        picks.append(int(members[np.argmax(s)]))
        per_outer[int(l)] = 1
    return np.array(picks, dtype=np.int64), per_outer


def standard_mds(loc: Located, r: float, tol: float = DEFAULT_TOL) -> PrototypeSet:
    """Prototypes of the standard cover: exact in-hull set plus one per outer simplex."""
    inner, per_cell = exact_mds_hull(loc, r, tol)
    outer, per_outer = outer_prototypes(loc)
    return PrototypeSet(loc.kind.size, inner=inner, outer=outer, per_cell_gamma=per_cell, per_outer_gamma=per_outer)


def spherical_mds(targets, nontargets, theta: float = 1.0) -> PrototypeSet:
    """Greedy dominating set of the class cover catch digraph."""
    T = np.atleast_2d(np.asarray(targets, dtype=float))
    if T.shape[0] == 0:
        return PrototypeSet(0)
    graph, radii = build_cccd(T, nontargets, theta)
    picks = np.sort(greedy_mds(graph))
    return PrototypeSet(T.shape[0], balls=picks, radii=radii[picks])


def composite_mds(loc: Located, targets, nontargets, r: float, theta: float = 1.0, tol: float = DEFAULT_TOL) -> PrototypeSet:
    """Prototypes of the composite cover.

    In-hull targets get the exact proportional-edge set; targets outside the
    hull get a greedy CCCD set built against all non-target points.
    """
    T = np.atleast_2d(np.asarray(targets, dtype=float))
    inner, per_cell = exact_mds_hull(loc, r, tol)
    out_rows = np.flatnonzero(~loc.in_hull)
    balls = np.zeros(0, dtype=np.int64)
    radii = np.zeros(0)
    if out_rows.size:
        sph = spherical_mds(T[out_rows], nontargets, theta)
        balls, radii = out_rows[sph.balls], sph.radii
    return PrototypeSet(T.shape[0], inner=inner, balls=balls, radii=radii, per_cell_gamma=per_cell)


def reduction(prototype_counts, class_sizes) -> dict:
    """Data reduction ratios per class and overall.

    Returns ``{"per_class": [...], "all": value}``; a class with no points
    gets ``None``.
    """
    counts = np.asarray(prototype_counts, dtype=float)
    sizes = np.asarray(class_sizes, dtype=float)
    per = [None if n == 0 else float(1.0 - c / n) for c, n in zip(counts, sizes)]
    total = sizes.sum()
    return {"per_class": per, "all": None if total == 0 else float(1.0 - counts.sum() / total)}


def domination_statistics(gammas, max_gamma: int | None = None) -> dict:
    """Empirical distribution of domination numbers.

    Returns the mean, standard error, frequency of each value and the
    cumulative probabilities ``P(gamma <= t)``.
    """
    g = np.asarray(gammas, dtype=np.int64)
    if g.size == 0:
        return {"n": 0, "mean": None, "se": None, "freq": {}, "cdf": {}}
    top = int(g.max()) if max_gamma is None else int(max_gamma)
    values = np.arange(0, top + 1)
    freq = {int(v): float(np.mean(g == v)) for v in values}
    cdf = {int(v): float(np.mean(g <= v)) for v in values}
    se = float(g.std(ddof=1) / np.sqrt(g.size)) if g.size > 1 else 0.0
    return {"n": int(g.size), "mean": float(g.mean()), "se": se, "freq": freq, "cdf": cdf}
