import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.spatial import ConvexHull, Delaunay

import oracles
from pepcd import _kernels
from pepcd.errors import DegenerateInput, DimensionMismatch, InsufficientPoints, ValidationError
from pepcd.tessellation import Kind, Tessellation, _enclosing_simplex, tessellate


def cell_set(cells):
    return {tuple(sorted(c)) for c in np.asarray(cells).tolist()}


def assert_empty_circumspheres(tess, tol=1e-9):
    P = tess.points
    for cell in tess.cells:
        c, r = oracles.circumcenter(P[cell])
        others = np.setdiff1d(np.arange(P.shape[0]), cell)
        dist = np.linalg.norm(P[others] - c, axis=1)
        assert np.all(dist >= r - tol * max(1.0, r)), "point inside a circumsphere"


def assert_covers_hull(tess):
    vol = sum(abs(np.linalg.det(tess.points[c[1:]] - tess.points[c[0]])) for c in tess.cells)
    hull_vol = ConvexHull(tess.points).volume * np.prod(np.arange(1, tess.dim + 1))
    assert vol == pytest.approx(hull_vol, rel=1e-9)


class TestSmall:
    def test_triangle(self):
        t = tessellate([[0, 0], [1, 0], [0, 1]])
        assert t.n_cells == 1 and t.n_outer == 3

    def test_point_inside_triangle(self):
        t = tessellate([[0, 0], [4, 0], [0, 4], [1, 1]])
        assert t.n_cells == 3 and t.n_outer == 3
        assert_empty_circumspheres(t)

    def test_hexagon(self):
        ang = np.arange(6) * np.pi / 3
        P = np.column_stack([np.cos(ang), np.sin(ang)])
        t = tessellate(P)
        assert t.n_outer == 6
        assert t.n_cells == 4

    def test_hexagon_with_center(self):
        ang = np.arange(6) * np.pi / 3
        P = np.vstack([np.column_stack([np.cos(ang), np.sin(ang)]), [[0, 0]]])
        t = tessellate(P)
        assert t.n_cells == 6 and t.n_outer == 6
        np.testing.assert_allclose(t.hull_center, [0, 0], atol=1e-15)

    def test_hull_center_ignores_interior_points(self):
        P = np.array([[0, 0], [3, 0], [0, 3], [0.5, 0.5], [0.6, 0.4]])
        t = tessellate(P)
        np.testing.assert_allclose(t.hull_center, [1, 1])


class TestErrors:
    def test_too_few(self):
        with pytest.raises(InsufficientPoints):
            tessellate([[0, 0], [1, 1]])

    def test_duplicates_do_not_count(self):
        with pytest.raises(InsufficientPoints):
            tessellate([[0, 0], [1, 1], [1, 1], [0, 0]])

    def test_collinear(self):
        with pytest.raises(DegenerateInput):
            tessellate([[0, 0], [1, 1], [2, 2], [3, 3]])

    def test_coplanar_3d(self):
        rng = np.random.default_rng(0)
        P = np.column_stack([rng.uniform(size=(20, 2)), np.zeros(20)])
        with pytest.raises(DegenerateInput):
            tessellate(P)

    def test_non_finite(self):
        with pytest.raises(ValidationError):
            tessellate([[0, 0], [1, 0], [0, np.nan]])

    def test_dimension_cap(self):
        with pytest.raises(ValidationError):
            tessellate(np.random.default_rng(0).normal(size=(20, 9)))

    def test_shape(self):
        with pytest.raises(DimensionMismatch):
            tessellate([1.0, 2.0, 3.0])


@pytest.mark.parametrize("d, n", [(2, 200), (3, 150), (4, 80), (5, 40)])
def test_matches_qhull(d, n):
    P = np.random.default_rng(100 + d).uniform(size=(n, d))
    t = tessellate(P, seed=3)
    ref = Delaunay(P)
    assert cell_set(t.cells) == cell_set(ref.simplices)
    ref_facets = {tuple(sorted(f)) for f in ref.convex_hull.tolist()}
    assert {tuple(sorted(f)) for f in t.hull_facets.tolist()} == ref_facets
    assert t.n_outer >= d + 1


@pytest.mark.parametrize("d, n", [(2, 200), (3, 120), (4, 60), (5, 30)])
def test_empty_circumsphere_and_hull_cover(d, n):
    P = np.random.default_rng(200 + d).normal(size=(n, d))
    t = tessellate(P)
    assert_empty_circumspheres(t)
    assert_covers_hull(t)


@pytest.mark.parametrize("scale", [1.2, 3.0])
def test_small_enclosing_simplex_is_repaired(scale):
    # a tight bootstrap simplex loses hull cells that the fill step must restore
    P = np.random.default_rng(7).uniform(size=(300, 2))
    t = tessellate(P, enclosing_scale=scale)
    assert cell_set(t.cells) == cell_set(Delaunay(P).simplices)


@pytest.mark.parametrize("d", [2, 3])
def test_lattice_inputs(d):
    g = np.arange(5.0)
    P = np.stack(np.meshgrid(*([g] * d)), axis=-1).reshape(-1, d)
    t = tessellate(P)
    assert_empty_circumspheres(t)
    vol = sum(abs(np.linalg.det(P[c[1:]] - P[c[0]])) for c in t.cells)
    fact = np.prod(np.arange(1, d + 1))
    assert vol / fact == pytest.approx(4.0**d)
    # every interior facet is shared by exactly two cells
    assert np.sum(t.neighbors < 0) == t.n_outer


def test_thin_triangle():
    # circumcircle far larger than the data; every bootstrap cell touches the enclosing simplex
    P = np.array([[0.35847586, 0.81564875], [0.12302635, 0.22264518], [0.41476334, 0.95558762]])
    t = tessellate(P)
    assert t.n_cells == 1 and t.n_outer == 3


@pytest.mark.parametrize("d", [2, 3])
def test_small_inputs_match_qhull(d):
    rng = np.random.default_rng(90 + d)
    for _ in range(300):
        P = rng.uniform(size=(int(rng.integers(d + 1, 9)), d))
        t = tessellate(P, seed=int(rng.integers(1 << 30)))
        assert cell_set(t.cells) == cell_set(Delaunay(P).simplices)


def test_cocircular_points():
    ang = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    P = np.column_stack([np.cos(ang), np.sin(ang)])
    t = tessellate(P)
    assert t.n_cells == 10 and t.n_outer == 12
    assert_covers_hull(t)


def test_duplicate_points_are_kept_in_store():
    P = np.array([[0, 0], [1, 0], [0, 1], [1, 0], [0.2, 0.2]])
    t = tessellate(P)
    assert t.points.shape[0] == 5
    assert 3 not in t.cells


def test_deterministic_for_seed():
    P = np.random.default_rng(1).uniform(size=(100, 3))
    a, b = tessellate(P, seed=5), tessellate(P, seed=5)
    assert np.array_equal(a.cells, b.cells)


class TestLocate:
    def setup_method(self):
        self.P = np.random.default_rng(11).uniform(size=(60, 2))
        self.t = tessellate(self.P)

    def test_cell_centroid(self):
        loc = self.t.locate(self.P[self.t.cells[0]].mean(axis=0))
        assert loc.kind == Kind.INSIDE_CELL and loc.index == 0

    def test_far_point_is_outer(self):
        l = 2
        x = self.t.hull_center + 10 * self.t.outer_rays(l).mean(axis=0)
        loc = self.t.locate(x)
        assert loc.kind == Kind.IN_OUTER and loc.index == l
        assert loc.coords.min() >= 0 and loc.coords.sum() >= 1

    def test_shared_facet_goes_to_lower_cell(self):
        k = int(np.argmax((self.t.neighbors >= 0).all(axis=1)))
        j = int(self.t.neighbors[k, 0])
        shared = np.delete(self.t.cells[k], 0)
        x = self.P[shared].mean(axis=0)
        loc = self.t.locate(x)
        assert loc.index == min(k, j)

    def test_hull_boundary(self):
        f = self.t.hull_facets[0]
        loc = self.t.locate(self.P[f].mean(axis=0))
        assert loc.kind == Kind.ON_HULL_BOUNDARY and loc.in_hull

    def test_degenerate(self):
        assert self.t.locate([np.nan, 0.0]).kind == Kind.DEGENERATE

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            self.t.locate([0.0, 0.0, 0.0])

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_totality_and_exclusivity(self, d):
        rng = np.random.default_rng(50 + d)
        P = rng.uniform(size=(40, d))
        t = tessellate(P)
        lo, hi = P.min(axis=0), P.max(axis=0)
        span = hi - lo
        X = rng.uniform(lo - span, hi + span, size=(2000, d))
        loc = t.locate_many(X)
        assert np.all(np.isin(loc.kind, [Kind.INSIDE_CELL, Kind.IN_OUTER, Kind.ON_HULL_BOUNDARY]))
        ref = Delaunay(P)
        inside_ref = ref.find_simplex(X) >= 0
        W_all = np.stack([t.barycentric(k, X) for k in range(t.n_cells)], axis=1)
        margin = W_all.min(axis=2).max(axis=1)
        clear = np.abs(margin) > 1e-7
        assert np.array_equal(loc.in_hull[clear], inside_ref[clear])
        outer_rows = np.flatnonzero(loc.outer & clear)
        for i in outer_rows:
            members = []
            for l in range(t.n_outer):
                c = t.cone_coords(l, X[i])
                if c.min() > 1e-7 and c.sum() > 1 + 1e-7:
                    members.append(l)
            assert len(members) <= 1
            if members:
                assert members[0] == loc.index[i]

    def test_outer_simplex_is_facet_extrusion(self):
        # the cone test agrees with "beyond the facet and inside the rays" built from hyperplanes
        rng = np.random.default_rng(3)
        X = rng.uniform(-2, 3, size=(500, 2))
        loc = self.t.locate_many(X)
        for i in np.flatnonzero(loc.outer):
            l = loc.index[i]
            F = self.P[self.t.hull_facets[l]]
            assert oracles.pe_outer_member(F, self.t.hull_center, X[i], 1e9, X[i], tol=1e-7)


def test_round_trip_from_cells():
    P = np.random.default_rng(4).uniform(size=(50, 3))
    t = tessellate(P)
    u = Tessellation.from_cells(t.points, t.cells, seed=t.seed)
    assert np.array_equal(u.neighbors, t.neighbors)
    assert np.array_equal(u.hull_facets, t.hull_facets)
    np.testing.assert_allclose(u.hull_center, t.hull_center)


def test_debug_export():
    t = tessellate([[0, 0], [1, 0], [0, 1]])
    d = t.to_dict()
    assert set(d) == {"points", "cells", "outer", "hull_center", "seed"}
    assert len(d["outer"]) == 3 and set(d["outer"][0]) == {"facet_ids", "ray_dirs"}


@pytest.mark.skipif(_kernels.compiled_backend is None, reason="compiled backend not built")
@pytest.mark.parametrize("d, n", [(2, 150), (3, 80)])
def test_backends_agree(d, n):
    rng = np.random.default_rng(d)
    P = rng.uniform(size=(n, d))
    X = rng.uniform(-0.5, 1.5, size=(300, d))
    outs = []
    for backend in (_kernels.python_backend, _kernels.compiled_backend):
        order = np.random.default_rng(0).permutation(n)
        c = P.mean(axis=0)
        work = np.vstack([P, _enclosing_simplex(c, 100 * np.linalg.norm(P - c, axis=1).max())])
        cells, nbr = backend.bowyer_watson(work, order, 1e-10, 1e-10)
        outs.append((cell_set(cells), cells.shape))
    assert outs[0] == outs[1]
    t = tessellate(P)
    a = _kernels.python_backend.locate_cells(X, t.origins, t.tinv, 1e-9)
    b = _kernels.compiled_backend.locate_cells(X, t.origins, t.tinv, 1e-9)
    assert np.array_equal(a[0], b[0])
    np.testing.assert_allclose(a[1], b[1], atol=1e-12)


def test_pure_python_backend_selected_by_env():
    env = dict(os.environ, PEPCD_PURE_PYTHON="1")
    code = "import pepcd; print(pepcd.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
