"""Pure Python/numpy versions of the hot loops.

These are the fallback used when the compiled extension is unavailable,
and the reference the compiled versions are checked against.  Both
implementations follow the same visiting order so that, on inputs without
numerical ties, they return identical output.
"""

from itertools import combinations

import numpy as np


def _circumsphere(verts):
    rel = verts[1:] - verts[0]
    try:
        x = np.linalg.solve(2.0 * rel, (rel * rel).sum(axis=1))
    except np.linalg.LinAlgError:
        return verts.mean(axis=0), np.inf
    return verts[0] + x, float(np.sqrt(x @ x))


def _sees(pts, verts, k, x, eps_orient):
    """True if ``x`` lies strictly on the same side of facet ``k`` as vertex ``k``."""
    facet = [v for j, v in enumerate(verts) if j != k]
    base = pts[facet[0]]
    rows = [pts[v] - base for v in facet[1:]]
    dp = np.linalg.det(np.array(rows + [x - base]))
    dv = np.linalg.det(np.array(rows + [pts[verts[k]] - base]))
    if dv == 0.0:
        return False
    return dp / dv > eps_orient


def bowyer_watson(pts, order, eps_in, eps_orient):
    """Incremental Delaunay insertion.

    Parameters
    ----------
    pts : ndarray, shape (n + d + 1, d)
        Input points followed by the ``d + 1`` vertices of an enclosing simplex.
    order : ndarray of int
        Indices of the points to insert, in insertion order.
    eps_in : float
        Absolute slack below which a point is treated as on a circumsphere
        (and therefore not inside it).
    eps_orient : float
        Minimum relative height of the new point above a cavity facet.

    Returns
    -------
    cells, neighbors : ndarray of int, shape (m, d + 1)
        Live cells, and for each cell the index of the cell across the facet
        opposite each vertex (-1 if none).
    """
    pts = np.ascontiguousarray(pts, dtype=float)
    n_all, d = pts.shape
    nv = d + 1
    cap = 256
    centers = np.zeros((cap, d))
    radii = np.full(cap, -np.inf)
    cells = [list(range(n_all - nv, n_all))]
    nbr = [[-1] * nv]
    centers[0], radii[0] = _circumsphere(pts[cells[0]])
    free = []

    for p in order:
        p = int(p)
        x = pts[p]
        slack = radii - np.sqrt(((centers - x) ** 2).sum(axis=1))
        seed = int(np.argmax(slack))
        cav = [seed]
        in_cav = {seed}
        stack = [seed]
        while stack:
            c = stack.pop()
            for nb in nbr[c]:
                if nb >= 0 and nb not in in_cav and slack[nb] > eps_in:
                    in_cav.add(nb)
                    cav.append(nb)
                    stack.append(nb)

        # grow the cavity until every boundary facet faces the new point
        while True:
            grow = -1
            for c in cav:
                for k in range(nv):
                    nb = nbr[c][k]
                    if nb in in_cav:
                        continue
                    if not _sees(pts, cells[c], k, x, eps_orient):
                        if nb < 0:
                            raise RuntimeError("point escaped the enclosing simplex")
                        grow = nb
                        break
                if grow >= 0:
                    break
            if grow < 0:
                break
            in_cav.add(grow)
            cav.append(grow)

        face_map = {}
        for c in cav:
            for k in range(nv):
                nb = nbr[c][k]
                if nb in in_cav:
                    continue
                verts = list(cells[c])
                verts[k] = p
                if free:
                    nid = free.pop()
                    cells[nid] = verts
                    nbr[nid] = [-1] * nv
                else:
                    nid = len(cells)
                    cells.append(verts)
                    nbr.append([-1] * nv)
                    if nid >= cap:
                        centers = np.vstack([centers, np.zeros((cap, d))])
                        radii = np.concatenate([radii, np.full(cap, -np.inf)])
                        cap *= 2
                nbr[nid][k] = nb
                if nb >= 0:
                    nbr[nb][nbr[nb].index(c)] = nid
                centers[nid], radii[nid] = _circumsphere(pts[verts])
                for j in range(nv):
                    if j == k:
                        continue
                    key = tuple(sorted(verts[:j] + verts[j + 1:]))
                    other = face_map.pop(key, None)
                    if other is None:
                        face_map[key] = (nid, j)
                    else:
                        nbr[nid][j] = other[0]
                        nbr[other[0]][other[1]] = nid
        for c in cav:
            radii[c] = -np.inf
            free.append(c)

    alive = [i for i in range(len(cells)) if radii[i] != -np.inf]
    remap = np.full(len(cells) + 1, -1, dtype=np.int64)
    remap[alive] = np.arange(len(alive))
    out_cells = np.array([cells[i] for i in alive], dtype=np.int64).reshape(-1, nv)
    out_nbr = np.array([nbr[i] for i in alive], dtype=np.int64).reshape(-1, nv)
    return out_cells, remap[out_nbr]


def locate_cells(X, origins, tinv, tol):
    """First cell (by index) whose closure holds each query point.

    Returns the cell index (-1 when no cell qualifies) and the barycentric
    coordinates of the point in that cell, or in the cell where its smallest
    coordinate is largest when no cell qualifies.
    """
    X = np.asarray(X, dtype=float)
    m, d = X.shape
    idx = np.full(m, -1, dtype=np.int64)
    W = np.zeros((m, d + 1))
    if origins.shape[0] == 0:
        return idx, W
    chunk = max(1, 200_000 // max(1, origins.shape[0] * d))
    for a in range(0, m, chunk):
        xs = X[a:a + chunk]
        rel = xs[:, None, :] - origins[None, :, :]
        tail = np.einsum("kij,mkj->mki", tinv, rel)
        head = 1.0 - tail.sum(axis=2, keepdims=True)
        w = np.concatenate([head, tail], axis=2)
        wmin = w.min(axis=2)
        ok = wmin >= -tol
        first = np.where(ok.any(axis=1), ok.argmax(axis=1), -1)
        best = np.where(first >= 0, first, wmin.argmax(axis=1))
        idx[a:a + chunk] = first
        W[a:a + chunk] = w[np.arange(len(xs)), best]
    return idx, W


def exact_mds_groups(W, starts, r, tol):
    """Minimum dominating set inside each cell from the local extremum points.

    ``W`` holds barycentric rows grouped by cell, group ``g`` being rows
    ``starts[g]:starts[g + 1]``.  Returns the chosen row indices (grouped,
    in vertex order) and the per-group set sizes.
    """
    W = np.asarray(W, dtype=float)
    protos = []
    gammas = np.zeros(len(starts) - 1, dtype=np.int64)
    for g in range(len(starts) - 1):
        a, b = int(starts[g]), int(starts[g + 1])
        if a == b:
            continue
        block = W[a:b]
        region = block.argmax(axis=1)
        ext, verts = [], []
        for i in range(block.shape[1]):
            rows = np.flatnonzero(region == i)
            if rows.size:
                ext.append(int(rows[np.argmin(block[rows, i])]))
                verts.append(i)
        tau = [1.0 - r * (1.0 - block[e, i]) for e, i in zip(ext, verts)]
        cover = np.array([block[:, i] >= t - tol for i, t in zip(verts, tau)])
        for size in range(1, len(ext) + 1):
            hit = None
            for combo in combinations(range(len(ext)), size):
                if cover[list(combo)].any(axis=0).all():
                    hit = combo
                    break
            if hit is not None:
                protos.extend(a + ext[e] for e in hit)
                gammas[g] = size
                break
    return np.array(protos, dtype=np.int64), gammas


def greedy_dominating_set(adj):
    """Greedy dominating set on a closed-neighbourhood boolean matrix.

    Each step picks, among the still-undominated vertices, the one whose
    closed out-neighbourhood covers the most undominated vertices (lowest
    index on ties) and removes that neighbourhood.
    """
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    open_ = np.ones(n, dtype=bool)
    picks = []
    while open_.any():
        counts = adj[:, open_].sum(axis=1)
        counts[~open_] = -1
        v = int(np.argmax(counts))
        picks.append(v)
        open_ &= ~adj[v]
        open_[v] = False
    return np.array(picks, dtype=np.int64)
