# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; see ``_pykernels`` for the reference."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY

cnp.import_array()

ctypedef cnp.int64_t i64

cdef enum:
    MAXD = 12


cdef int _solve(double* A, double* b, int n) noexcept nogil:
    """Gaussian elimination with partial pivoting; solution left in ``b``."""
    cdef int i, j, k, piv
    cdef double m, t, best
    for k in range(n):
        piv = k
        best = fabs(A[k * n + k])
        for i in range(k + 1, n):
            if fabs(A[i * n + k]) > best:
                best = fabs(A[i * n + k])
                piv = i
        if best == 0.0:
            return 0
        if piv != k:
            for j in range(n):
                t = A[k * n + j]
                A[k * n + j] = A[piv * n + j]
                A[piv * n + j] = t
            t = b[k]
            b[k] = b[piv]
            b[piv] = t
        for i in range(k + 1, n):
            m = A[i * n + k] / A[k * n + k]
            for j in range(k, n):
                A[i * n + j] -= m * A[k * n + j]
            b[i] -= m * b[k]
    for i in range(n - 1, -1, -1):
        t = b[i]
        for j in range(i + 1, n):
            t -= A[i * n + j] * b[j]
        b[i] = t / A[i * n + i]
    return 1


cdef double _det(double* A, int n) noexcept nogil:
    cdef int i, j, k, piv
    cdef double m, t, best, det = 1.0
    for k in range(n):
        piv = k
        best = fabs(A[k * n + k])
        for i in range(k + 1, n):
            if fabs(A[i * n + k]) > best:
                best = fabs(A[i * n + k])
                piv = i
        if best == 0.0:
            return 0.0
        if piv != k:
            det = -det
            for j in range(n):
                t = A[k * n + j]
                A[k * n + j] = A[piv * n + j]
                A[piv * n + j] = t
        det *= A[k * n + k]
        for i in range(k + 1, n):
            m = A[i * n + k] / A[k * n + k]
            for j in range(k, n):
                A[i * n + j] -= m * A[k * n + j]
    return det


cdef void _circumsphere(double[:, ::1] pts, i64* verts, int d,
                        double* center, double* radius) noexcept nogil:
    cdef double A[MAXD * MAXD]
    cdef double b[MAXD]
    cdef int i, j
    cdef double diff, s
    for i in range(d):
        s = 0.0
        for j in range(d):
            diff = pts[verts[i + 1], j] - pts[verts[0], j]
            A[i * d + j] = 2.0 * diff
            s += diff * diff
        b[i] = s
    if not _solve(A, b, d):
        for j in range(d):
            s = 0.0
            for i in range(d + 1):
                s += pts[verts[i], j]
            center[j] = s / (d + 1)
        radius[0] = INFINITY
        return
    s = 0.0
    for j in range(d):
        center[j] = pts[verts[0], j] + b[j]
        s += b[j] * b[j]
    radius[0] = sqrt(s)


cdef bint _sees(double[:, ::1] pts, i64* verts, int k, int p, int d,
                double eps_orient) noexcept nogil:
    cdef double A[MAXD * MAXD]
    cdef double B[MAXD * MAXD]
    cdef int f0 = -1, row = 0, j, i
    cdef double dp, dv
    for i in range(d + 1):
        if i == k:
            continue
        if f0 < 0:
            f0 = <int>verts[i]
            continue
        for j in range(d):
            A[row * d + j] = pts[verts[i], j] - pts[f0, j]
            B[row * d + j] = A[row * d + j]
        row += 1
    for j in range(d):
        A[row * d + j] = pts[p, j] - pts[f0, j]
        B[row * d + j] = pts[verts[k], j] - pts[f0, j]
    dp = _det(A, d)
    dv = _det(B, d)
    if dv == 0.0:
        return False
    return dp / dv > eps_orient


def bowyer_watson(pts_in, order_in, double eps_in, double eps_orient):
    cdef double[:, ::1] pts = np.ascontiguousarray(pts_in, dtype=np.float64)
    cdef i64[::1] order = np.ascontiguousarray(order_in, dtype=np.int64)
    cdef int n_all = pts.shape[0]
    cdef int d = pts.shape[1]
    cdef int nv = d + 1
    if d > MAXD - 1:
        raise ValueError("dimension too large for the compiled kernel")
    cdef Py_ssize_t cap = 256, n_slots = 1, n_free = 0
    cells_a = np.full((cap, nv), -1, dtype=np.int64)
    nbr_a = np.full((cap, nv), -1, dtype=np.int64)
    cen_a = np.zeros((cap, d))
    rad_a = np.full(cap, -INFINITY)
    mark_a = np.full(cap, -1, dtype=np.int64)
    free_a = np.zeros(cap, dtype=np.int64)
    cav_a = np.zeros(cap, dtype=np.int64)
    cdef i64[:, ::1] cells = cells_a
    cdef i64[:, ::1] nbr = nbr_a
    cdef double[:, ::1] cen = cen_a
    cdef double[::1] rad = rad_a
    cdef i64[::1] mark = mark_a
    cdef i64[::1] freel = free_a
    cdef i64[::1] cav = cav_a
    cdef Py_ssize_t i, j, k, c, nb, seed, n_cav, head, it, nid, grow, q
    cdef int p
    cdef double s, diff, best, sl
    cdef i64 verts[MAXD]

    for j in range(nv):
        cells[0, j] = n_all - nv + j
    _circumsphere(pts, &cells[0, 0], d, &cen[0, 0], &rad[0])

    for it in range(order.shape[0]):
        p = <int>order[it]
        seed = 0
        best = -INFINITY
        for c in range(n_slots):
            if rad[c] == -INFINITY:
                continue
            s = 0.0
            for j in range(d):
                diff = cen[c, j] - pts[p, j]
                s += diff * diff
            sl = rad[c] - sqrt(s)
            if sl > best:
                best = sl
                seed = c
        cav[0] = seed
        n_cav = 1
        mark[seed] = it
        # depth-first flood over cells whose circumsphere holds p
        stack = [seed]
        while stack:
            c = stack.pop()
            for k in range(nv):
                nb = nbr[c, k]
                if nb < 0 or mark[nb] == it:
                    continue
                s = 0.0
                for j in range(d):
                    diff = cen[nb, j] - pts[p, j]
                    s += diff * diff
                if rad[nb] - sqrt(s) > eps_in:
                    mark[nb] = it
                    if n_cav >= cav.shape[0]:
                        cav_a = np.concatenate([cav_a, np.zeros(cav.shape[0], dtype=np.int64)])
                        cav = cav_a
                    cav[n_cav] = nb
                    n_cav += 1
                    stack.append(nb)

        while True:
            grow = -1
            for i in range(n_cav):
                c = cav[i]
                for k in range(nv):
                    nb = nbr[c, k]
                    if nb >= 0 and mark[nb] == it:
                        continue
                    if not _sees(pts, &cells[c, 0], <int>k, p, d, eps_orient):
                        if nb < 0:
                            raise RuntimeError("point escaped the enclosing simplex")
                        grow = nb
                        break
                if grow >= 0:
                    break
            if grow < 0:
                break
            mark[grow] = it
            if n_cav >= cav.shape[0]:
                cav_a = np.concatenate([cav_a, np.zeros(cav.shape[0], dtype=np.int64)])
                cav = cav_a
            cav[n_cav] = grow
            n_cav += 1

        face_map = {}
        for i in range(n_cav):
            c = cav[i]
            for k in range(nv):
                nb = nbr[c, k]
                if nb >= 0 and mark[nb] == it:
                    continue
                for j in range(nv):
                    verts[j] = cells[c, j]
                verts[k] = p
                if n_free > 0:
                    n_free -= 1
                    nid = freel[n_free]
                else:
                    nid = n_slots
                    n_slots += 1
                    if nid >= cap:
                        cells_a = np.concatenate([cells_a, np.full((cap, nv), -1, dtype=np.int64)])
                        nbr_a = np.concatenate([nbr_a, np.full((cap, nv), -1, dtype=np.int64)])
                        cen_a = np.concatenate([cen_a, np.zeros((cap, d))])
                        rad_a = np.concatenate([rad_a, np.full(cap, -INFINITY)])
                        mark_a = np.concatenate([mark_a, np.full(cap, -1, dtype=np.int64)])
                        free_a = np.concatenate([free_a, np.zeros(cap, dtype=np.int64)])
                        cap *= 2
                        cells = cells_a
                        nbr = nbr_a
                        cen = cen_a
                        rad = rad_a
                        mark = mark_a
                        freel = free_a
                for j in range(nv):
                    cells[nid, j] = verts[j]
                    nbr[nid, j] = -1
                mark[nid] = -1
                nbr[nid, k] = nb
                if nb >= 0:
                    for j in range(nv):
                        if nbr[nb, j] == c:
                            nbr[nb, j] = nid
                            break
                _circumsphere(pts, &cells[nid, 0], d, &cen[nid, 0], &rad[nid])
                for j in range(nv):
                    if j == k:
                        continue
                    key = tuple(sorted([verts[q] for q in range(nv) if q != j]))
                    other = face_map.pop(key, None)
                    if other is None:
                        face_map[key] = (nid, j)
                    else:
                        nbr[nid, j] = other[0]
                        nbr[other[0], other[1]] = nid
        for i in range(n_cav):
            c = cav[i]
            rad[c] = -INFINITY
            freel[n_free] = c
            n_free += 1

    alive = np.flatnonzero(rad_a[:n_slots] != -INFINITY)
    remap = np.full(n_slots + 1, -1, dtype=np.int64)
    remap[alive] = np.arange(alive.size)
    return cells_a[alive].copy(), remap[nbr_a[alive]]


def locate_cells(X_in, origins_in, tinv_in, double tol):
    cdef double[:, ::1] X = np.ascontiguousarray(X_in, dtype=np.float64)
    cdef double[:, ::1] org = np.ascontiguousarray(origins_in, dtype=np.float64)
    cdef double[:, :, ::1] T = np.ascontiguousarray(tinv_in, dtype=np.float64)
    cdef Py_ssize_t m = X.shape[0], d = X.shape[1], K = org.shape[0]
    idx_a = np.full(m, -1, dtype=np.int64)
    W_a = np.zeros((m, d + 1))
    cdef i64[::1] idx = idx_a
    cdef double[:, ::1] W = W_a
    cdef double rel[MAXD]
    cdef double w[MAXD]
    cdef double bw[MAXD]
    cdef Py_ssize_t a, k, i, j, best_k
    cdef double s, wmin, best
    if K == 0:
        return idx_a, W_a
    with nogil:
        for a in range(m):
            best = -INFINITY
            best_k = 0
            for k in range(K):
                for j in range(d):
                    rel[j] = X[a, j] - org[k, j]
                s = 0.0
                wmin = INFINITY
                for i in range(d):
                    w[i + 1] = 0.0
                    for j in range(d):
                        w[i + 1] += T[k, i, j] * rel[j]
                    s += w[i + 1]
                    if w[i + 1] < wmin:
                        wmin = w[i + 1]
                w[0] = 1.0 - s
                if w[0] < wmin:
                    wmin = w[0]
                if wmin >= -tol:
                    idx[a] = k
                    for i in range(d + 1):
                        W[a, i] = w[i]
                    break
                if wmin > best:
                    best = wmin
                    best_k = k
                    for i in range(d + 1):
                        bw[i] = w[i]
            if idx[a] < 0:
                for i in range(d + 1):
                    W[a, i] = bw[i]
    return idx_a, W_a


def exact_mds_groups(W_in, starts_in, double r, double tol):
    cdef double[:, ::1] W = np.ascontiguousarray(W_in, dtype=np.float64)
    cdef i64[::1] starts = np.ascontiguousarray(starts_in, dtype=np.int64)
    cdef Py_ssize_t G = starts.shape[0] - 1, nv = W.shape[1]
    cdef Py_ssize_t n = W.shape[0]
    gam_a = np.zeros(G, dtype=np.int64)
    out_a = np.zeros(n, dtype=np.int64)
    mask_a = np.zeros(n, dtype=np.uint32)
    cdef i64[::1] gam = gam_a
    cdef i64[::1] out = out_a
    cdef cnp.uint32_t[::1] cover = mask_a
    cdef Py_ssize_t g, a, b, row, i, E, t, n_out = 0, pos
    cdef i64 ext[MAXD]
    cdef i64 vert[MAXD]
    cdef double tau[MAXD]
    cdef int comb[MAXD]
    cdef int reg
    cdef double best
    cdef cnp.uint32_t sub
    cdef bint ok, found
    with nogil:
        for g in range(G):
            a = starts[g]
            b = starts[g + 1]
            if a == b:
                continue
            for i in range(nv):
                ext[i] = -1
            for row in range(a, b):
                reg = 0
                best = W[row, 0]
                for i in range(1, nv):
                    if W[row, i] > best:
                        best = W[row, i]
                        reg = <int>i
                if ext[reg] < 0 or W[row, reg] < W[ext[reg], reg]:
                    ext[reg] = row
            E = 0
            for i in range(nv):
                if ext[i] >= 0:
                    ext[E] = ext[i]
                    vert[E] = i
                    tau[E] = 1.0 - r * (1.0 - W[ext[i], i])
                    E += 1
            for row in range(a, b):
                cover[row] = 0
                for i in range(E):
                    if W[row, vert[i]] >= tau[i] - tol:
                        cover[row] |= (<cnp.uint32_t>1) << i
            found = False
            for t in range(1, E + 1):
                for i in range(t):
                    comb[i] = <int>i
                while True:
                    sub = 0
                    for i in range(t):
                        sub |= (<cnp.uint32_t>1) << comb[i]
                    ok = True
                    for row in range(a, b):
                        if (cover[row] & sub) == 0:
                            ok = False
                            break
                    if ok:
                        for i in range(t):
                            out[n_out] = ext[comb[i]]
                            n_out += 1
                        gam[g] = t
                        found = True
                        break
                    # next combination in lexicographic order
                    pos = t - 1
                    while pos >= 0 and comb[pos] == E - t + pos:
                        pos -= 1
                    if pos < 0:
                        break
                    comb[pos] += 1
                    for i in range(pos + 1, t):
                        comb[i] = comb[i - 1] + 1
                if found:
                    break
    return out_a[:n_out].copy(), gam_a


def greedy_dominating_set(adj_in):
    cdef cnp.uint8_t[:, ::1] adj = np.ascontiguousarray(adj_in, dtype=np.uint8)
    cdef Py_ssize_t n = adj.shape[0], v, u, best_v, n_open = n, n_pick = 0
    cdef long cnt, best
    open_a = np.ones(n, dtype=np.uint8)
    pick_a = np.zeros(n, dtype=np.int64)
    cdef cnp.uint8_t[::1] op = open_a
    cdef i64[::1] pick = pick_a
    with nogil:
        while n_open > 0:
            best = -1
            best_v = -1
            for v in range(n):
                if not op[v]:
                    continue
                cnt = 0
                for u in range(n):
                    if op[u] and adj[v, u]:
                        cnt += 1
                if cnt > best:
                    best = cnt
                    best_v = v
            pick[n_pick] = best_v
            n_pick += 1
            for u in range(n):
                if op[u] and (adj[best_v, u] or u == best_v):
                    op[u] = 0
                    n_open -= 1
    return pick_a[:n_pick].copy()
