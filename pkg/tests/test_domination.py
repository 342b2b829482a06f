import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from pepcd import _kernels
from pepcd.domination import (
    brute_force_mds,
    composite_mds,
    domination_statistics,
    exact_mds_cell,
    exact_mds_hull,
    greedy_mds,
    reduction,
    spherical_mds,
    standard_mds,
)
from pepcd.errors import EmptyDigraph, TooLarge
from pepcd.proximity import Digraph, build_cccd, build_pe_pcd, inner_region_from_weights
from pepcd.tessellation import tessellate

UNIT = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def closed(adj):
    A = np.array(adj, dtype=bool)
    np.fill_diagonal(A, True)
    return A


def cycle5():
    A = np.zeros((5, 5), dtype=bool)
    for i in range(5):
        A[i, (i + 1) % 5] = A[(i + 1) % 5, i] = True
    return A


class TestGreedy:
    def test_star(self):
        A = np.zeros((6, 6), dtype=bool)
        A[3, :] = True
        assert list(greedy_mds(A)) == [3]

    def test_arcless(self):
        assert sorted(greedy_mds(np.zeros((4, 4), dtype=bool))) == [0, 1, 2, 3]

    def test_five_cycle(self):
        picks = greedy_mds(cycle5())
        assert len(picks) == 2 == oracles.min_dominating_size(closed(cycle5()))
        assert oracles.dominates(closed(cycle5()), picks)

    def test_empty(self):
        with pytest.raises(EmptyDigraph):
            greedy_mds(np.zeros((0, 0), dtype=bool))

    def test_accepts_digraph(self):
        g = Digraph(cycle5())
        assert len(greedy_mds(g)) == 2

    def test_ratio_bound(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(1, 11))
            A = rng.random((n, n)) < rng.uniform(0.05, 0.5)
            g = greedy_mds(A)
            assert oracles.dominates(closed(A), g)
            assert len(g) <= (1 + np.log(n)) * oracles.min_dominating_size(closed(A))

    @pytest.mark.skipif(_kernels.compiled_backend is None, reason="compiled backend not built")
    def test_backends_agree(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            A = closed(rng.random((30, 30)) < 0.1).view(np.uint8)
            a = _kernels.python_backend.greedy_dominating_set(A)
            b = _kernels.compiled_backend.greedy_dominating_set(A)
            assert np.array_equal(a, b)


class TestBruteForce:
    def test_complete(self):
        assert list(brute_force_mds(np.ones((5, 5), dtype=bool))) == [0]

    def test_arcless(self):
        assert list(brute_force_mds(np.zeros((4, 4), dtype=bool))) == [0, 1, 2, 3]

    def test_five_cycle_lexicographic(self):
        assert list(brute_force_mds(cycle5())) == [0, 2]

    def test_too_large(self):
        A = np.zeros((30, 30), dtype=bool)
        A[0, 1:] = True
        with pytest.raises(TooLarge):
            brute_force_mds(A)

    def test_large_graph_with_small_components(self):
        A = np.zeros((60, 60), dtype=bool)
        for start in range(0, 60, 5):
            A[start, start:start + 5] = True
        assert len(brute_force_mds(A)) == 12

    def test_matches_enumeration(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            n = int(rng.integers(1, 10))
            A = rng.random((n, n)) < rng.uniform(0.0, 0.6)
            picks = brute_force_mds(A)
            assert oracles.dominates(closed(A), picks)
            assert len(picks) == oracles.min_dominating_size(closed(A))


class TestExactCell:
    def test_single(self):
        assert list(exact_mds_cell([[0.2, 0.3, 0.5]], r=1.5)) == [0]

    def test_one_vertex_region(self):
        W = np.array([[0.7, 0.2, 0.1], [0.5, 0.3, 0.2], [0.6, 0.1, 0.3]])
        picks = exact_mds_cell(W, r=1.1)
        # the point closest to the opposite face has the largest region
        assert list(picks) == [1]

    def test_three_near_faces_need_three(self):
        W = np.array([[0.98, 0.01, 0.01], [0.01, 0.98, 0.01], [0.01, 0.01, 0.98]])
        assert len(exact_mds_cell(W, r=1.0 + 1e-6)) == 3

    def test_empty(self):
        assert exact_mds_cell(np.zeros((0, 3)), r=2).size == 0

    @pytest.mark.parametrize("d", [2, 3])
    def test_matches_brute_force(self, d):
        rng = np.random.default_rng(d)
        for _ in range(200):
            n = int(rng.integers(1, 15))
            W = rng.dirichlet(np.ones(d + 1) * rng.uniform(0.3, 3), size=n)
            r = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
            A = np.zeros((n, n), dtype=bool)
            for u in range(n):
                reg = inner_region_from_weights(W[u], r)
                A[u] = [reg.contains(W[v]) for v in range(n)]
            picks = exact_mds_cell(W, r)
            assert oracles.dominates(A, picks)
            assert len(picks) == len(brute_force_mds(A)) <= d + 1


def random_instance(rng, d, n_nontarget, n_target, spread=0.3):
    N = rng.uniform(size=(n_nontarget, d))
    T = rng.uniform(-spread, 1 + spread, size=(n_target, d))
    t = tessellate(N)
    return t, T, t.locate_many(T)


class TestHullAndStandard:
    def test_no_targets_in_hull(self):
        t = tessellate(UNIT)
        loc = t.locate_many(np.array([[2.0, 2.0], [-1.0, -1.0]]))
        protos, per_cell = exact_mds_hull(loc, r=2)
        assert protos.size == 0 and per_cell == {}

    def test_one_target_per_cell(self):
        N = np.random.default_rng(0).uniform(size=(15, 2))
        t = tessellate(N)
        X = np.array([t.cell_vertices(k).mean(axis=0) for k in range(t.n_cells)])
        protos, per_cell = exact_mds_hull(t.locate_many(X), r=2)
        assert protos.size == t.n_cells and set(per_cell.values()) == {1}

    def test_outer_only(self):
        t = tessellate(UNIT)
        c = t.hull_center
        rays = t.outer_rays(0)
        T = c + np.array([[0.6, 0.6], [1.0, 0.5], [0.7, 0.9]]) @ rays
        loc = t.locate_many(T)
        assert np.all(loc.index == 0) and np.all(loc.outer)
        ps = standard_mds(loc, r=1.5)
        assert list(ps.outer) == [2] and ps.per_outer_gamma == {0: 1}

    def test_additivity(self):
        t = tessellate(UNIT)
        c = t.hull_center
        T = np.vstack([c + np.array([[0.8, 0.8]]) @ t.outer_rays(0),
                       c + np.array([[0.9, 0.9]]) @ t.outer_rays(1),
                       [[0.2, 0.2]]])
        assert len(standard_mds(t.locate_many(T), r=2)) == 3

    @pytest.mark.parametrize("d", [2, 3])
    def test_standard_equals_brute_force(self, d):
        rng = np.random.default_rng(10 + d)
        for _ in range(60):
            t, T, loc = random_instance(rng, d, 12, 30)
            r = float(rng.choice([1.5, 2.0, 3.0]))
            g = build_pe_pcd(t, loc, r)
            ps = standard_mds(loc, r)
            assert oracles.dominates(g.closed(), ps.indices)
            assert len(ps) == len(brute_force_mds(g))
            assert all(v <= d + 1 for v in ps.per_cell_gamma.values())
            assert set(ps.per_outer_gamma.values()) <= {1}

    def test_composite_covers(self):
        rng = np.random.default_rng(4)
        t, T, loc = random_instance(rng, 2, 20, 50, spread=0.5)
        ps = composite_mds(loc, T, t.points, r=2, theta=0.5)
        assert ps.outer.size == 0
        inside = np.flatnonzero(loc.in_hull)
        outside = np.flatnonzero(~loc.in_hull)
        g = build_pe_pcd(t, loc, 2)
        A = g.closed()
        assert A[np.ix_(ps.inner, inside)].any(axis=0).all()
        dist = np.linalg.norm(T[outside][:, None] - T[ps.balls][None], axis=2)
        assert np.all((dist <= ps.radii * (1 + 1e-12)).any(axis=1))

    def test_spherical(self):
        rng = np.random.default_rng(5)
        T, N = rng.uniform(size=(40, 2)), rng.uniform(size=(10, 2))
        ps = spherical_mds(T, N, 1.0)
        g, _ = build_cccd(T, N, 1.0)
        assert oracles.dominates(g.closed(), ps.balls)
        assert ps.reduction == pytest.approx(1 - len(ps) / 40)


class TestStatistics:
    def test_reduction(self):
        out = reduction([10, 5], [100, 0])
        assert out["per_class"] == [pytest.approx(0.9), None]
        assert out["all"] == pytest.approx(0.85)

    def test_empty_class(self):
        assert reduction([0], [0]) == {"per_class": [None], "all": None}

    def test_distribution(self):
        s = domination_statistics([1, 1, 2, 3], max_gamma=3)
        assert s["cdf"] == {0: 0.0, 1: 0.5, 2: 0.75, 3: 1.0}
        assert s["mean"] == pytest.approx(1.75)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 9), st.floats(0.0, 0.7), st.integers(0, 2**32 - 1))
def test_property_exact_never_worse_than_greedy(n, p, seed):
    A = np.random.default_rng(seed).random((n, n)) < p
    assert len(brute_force_mds(A)) <= len(greedy_mds(A))
