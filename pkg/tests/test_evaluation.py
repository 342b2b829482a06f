from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, special, stats

import oracles
from pepcd.classify import train
from pepcd.dataio import load_csv
from pepcd.errors import InvalidParameter, RankDeficient, TooFewPoints, ValidationError
from pepcd.evaluation import (
    betainc,
    cv_folds,
    cv_scores,
    evaluate,
    f_upper_p,
    five_by_two_cv,
    overlap_shift,
    paired_tests,
    pca_fit,
    pca_reduce,
    score_auc,
    stratified_halves,
    t_two_sided_p,
)

IRIS = Path(__file__).parent / "data" / "iris.csv"

# score differences of the worked 5x2 example, one row per repetition
EXAMPLE = [(0.02, 0.01), (0.03, 0.02), (0.01, 0.00), (0.02, 0.03), (0.02, 0.02)]
# upper tail of F(10, 5) at 10 and two-sided t(5) tail at sqrt(10), by 40-digit quadrature
EXAMPLE_F_P = 0.010115089469742805566
EXAMPLE_T_P = 0.025031015818452945537


def quad_betainc(a, b, x):
    mpmath.mp.dps = 30
    val = mpmath.quad(lambda t: t ** (a - 1) * (1 - t) ** (b - 1), [0, x]) / mpmath.beta(a, b)
    return float(val)


class TestOverlap:
    def test_endpoints(self):
        for d in (1, 2, 5):
            assert overlap_shift(1.0, d) == 0.0
            assert overlap_shift(0.0, d) == 1.0

    def test_value_against_numeric_inversion(self):
        nu = optimize.brentq(lambda v: oracles.overlap_ratio(v, 2) - 0.5, 0.0, 1.0, xtol=1e-15)
        assert overlap_shift(0.5, 2) == pytest.approx(nu, abs=1e-12)
        assert overlap_shift(0.5, 2) == pytest.approx(0.18350, abs=1e-5)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.0, 1.0), st.integers(1, 10))
    def test_round_trip(self, zeta, d):
        assert oracles.overlap_ratio(overlap_shift(zeta, d), d) == pytest.approx(zeta, abs=1e-12)

    def test_invalid(self):
        with pytest.raises(InvalidParameter):
            overlap_shift(1.5, 2)
        with pytest.raises(InvalidParameter):
            overlap_shift(0.5, 0)


class TestMetrics:
    def test_perfect(self):
        m = evaluate([0, 1, 1], [0, 1, 1])
        assert m.ccr == (1.0, 1.0) and m.auc == 1.0

    def test_majority_predictor(self):
        m = evaluate([0] * 9 + [1], [0] * 10)
        assert m.ccr == (1.0, 0.0) and m.auc == 0.5 and m.accuracy == 0.9

    def test_mean_of_rates(self):
        y = np.array([0] * 10 + [1] * 10)
        p = np.array([0] * 9 + [1] + [1] * 7 + [0] * 3)
        m = evaluate(y, p)
        assert m.ccr == pytest.approx((0.9, 0.7)) and m.auc == pytest.approx(0.8)

    def test_errors(self):
        with pytest.raises(ValidationError):
            evaluate([0, 1], [0])

    def test_score_auc_matches_rank_statistic(self):
        rng = np.random.default_rng(0)
        y = rng.integers(0, 2, 200)
        s = rng.normal(size=200) + y
        u = stats.mannwhitneyu(s[y == 1], s[y == 0]).statistic
        assert score_auc(s, y) == pytest.approx(u / ((y == 1).sum() * (y == 0).sum()))


class TestIncompleteBeta:
    @pytest.mark.parametrize("a, b", [(0.5, 0.5), (2.5, 5.0), (5.0, 2.5), (1.0, 1.0), (30.0, 0.5), (0.5, 30.0)])
    @pytest.mark.parametrize("x", [0.001, 0.1, 0.5, 0.9, 0.999])
    def test_against_quadrature(self, a, b, x):
        assert betainc(a, b, x) == pytest.approx(quad_betainc(a, b, x), rel=1e-9, abs=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.05, 50), st.floats(0.05, 50), st.floats(0, 1))
    def test_against_scipy(self, a, b, x):
        assert betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), rel=1e-8, abs=1e-13)

    def test_edges(self):
        assert betainc(2, 3, 0.0) == 0.0 and betainc(2, 3, 1.0) == 1.0

    def test_distribution_tails(self):
        for t in (0.1, 1.0, 2.5, 10.0):
            assert t_two_sided_p(t, 5) == pytest.approx(2 * stats.t.sf(t, 5), rel=1e-9)
        for f in (0.2, 1.0, 3.3, 10.0):
            assert f_upper_p(f, 10, 5) == pytest.approx(stats.f.sf(f, 10, 5), rel=1e-9)


class TestPairedTests:
    def test_worked_example(self):
        # exact arithmetic on the example: sum of squares 0.004, variance total 0.0002
        D = [[Fraction(str(a)), Fraction(str(b))] for a, b in EXAMPLE]
        s2 = [sum((v - (r[0] + r[1]) / 2) ** 2 for v in r) for r in D]
        ss = sum(v * v for r in D for v in r)
        f_exact = ss / (2 * sum(s2))
        assert f_exact == 10
        res = paired_tests(EXAMPLE)
        assert res.f == pytest.approx(float(f_exact), abs=1e-10)
        assert res.t == pytest.approx(np.sqrt(10.0), abs=1e-10)
        assert res.f_p == pytest.approx(EXAMPLE_F_P, abs=1e-10)
        assert res.t_p == pytest.approx(EXAMPLE_T_P, abs=1e-10)
        np.testing.assert_allclose(res.variances, [float(v) for v in s2], atol=1e-15)

    def test_identical(self):
        res = paired_tests(np.zeros((5, 2)))
        assert res.f_p == 1.0 and res.t_p == 1.0 and not res.rejects()

    def test_constant_nonzero(self):
        res = paired_tests(np.ones((5, 2)))
        assert res.f_p == 0.0 and res.t_p == 0.0 and res.rejects()

    def test_shape(self):
        with pytest.raises(InvalidParameter):
            paired_tests(np.zeros((4, 2)))

    def test_p_values_in_range(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            res = paired_tests(rng.normal(size=(5, 2)))
            assert res.f >= 0 and 0 <= res.f_p <= 1 and 0 <= res.t_p <= 1


class TestCrossValidation:
    def test_stratified_halves(self):
        y = np.repeat([0, 1, 2], [10, 7, 4])
        a, b = stratified_halves(y, np.random.default_rng(0))
        assert np.intersect1d(a, b).size == 0 and a.size + b.size == y.size
        for j, n in zip(range(3), (10, 7, 4)):
            assert abs((y[a] == j).sum() - (y[b] == j).sum()) <= 1

    def test_folds_are_seeded_and_complementary(self):
        y = np.repeat([0, 1], [12, 9])
        folds = cv_folds(y, seed=3)
        assert len(folds) == 5
        for (a, b), (c, e) in zip(folds, cv_folds(y, seed=3)):
            np.testing.assert_array_equal(a, c)
            assert np.array_equal(np.sort(np.concatenate([a, b])), np.arange(21))

    def test_self_comparison_never_rejects(self):
        rng = np.random.default_rng(1)
        X = np.vstack([rng.uniform(0, 1, (60, 2)), rng.uniform(0.3, 1.3, (30, 2))])
        y = np.repeat([0, 1], [60, 30])

        def knn(Xtr, ytr, Xte):
            return train(Xtr, ytr, "knn", k=1).predict(Xte)

        for seed in range(5):
            res = five_by_two_cv(knn, knn, X, y, seed=seed)
            assert not res.rejects()

    def test_cv_scores_repeatable(self):
        X, y = load_csv(IRIS).X, load_csv(IRIS).y

        def knn(Xtr, ytr, Xte):
            return train(Xtr, ytr, "knn", k=3).predict(Xte)

        a = cv_scores(knn, X, y, seed=4)
        assert a.shape == (5, 2) and np.all(a > 0.85)
        np.testing.assert_array_equal(a, cv_scores(knn, X, y, seed=4))


class TestPCA:
    def setup_method(self):
        self.iris = load_csv(IRIS)

    def test_iris_loads(self):
        assert self.iris.X.shape == (150, 4) and self.iris.n_classes == 3

    def test_iris_two_components(self):
        model = pca_fit(self.iris.X, 2)
        assert model.explained_ratio.sum() > 0.95
        # reference: eigenvalues of the sample covariance
        vals = np.sort(np.linalg.eigvalsh(np.cov(self.iris.X, rowvar=False)))[::-1]
        np.testing.assert_allclose(model.explained_variance, vals[:2], rtol=1e-10)
        assert model.explained_ratio.sum() == pytest.approx(vals[:2].sum() / vals.sum(), rel=1e-12)

    def test_matches_svd_up_to_sign_convention(self):
        X = self.iris.X
        Xc = X - X.mean(axis=0)
        _, _, vt = np.linalg.svd(Xc, full_matrices=False)
        model = pca_fit(X, 3)
        for k in range(3):
            ref = vt[k] * np.sign(vt[k][np.abs(vt[k]).argmax()])
            np.testing.assert_allclose(model.components[k], ref, atol=1e-9)

    def test_full_dim_is_rotation(self):
        X = np.random.default_rng(0).normal(size=(40, 4))
        Z = pca_fit(X, 4).transform(X)
        D = np.linalg.norm(X[:, None] - X[None], axis=2)
        E = np.linalg.norm(Z[:, None] - Z[None], axis=2)
        np.testing.assert_allclose(D, E, atol=1e-8)

    def test_line_in_3d(self):
        t = np.linspace(0, 1, 30)[:, None]
        X = np.array([1.0, 2.0, -1.0]) * t + np.array([0.5, 0.0, 2.0])
        model = pca_fit(X, 1)
        back = model.transform(X) @ model.components + model.mean
        assert np.sum((X - back) ** 2) / X.shape[0] <= 1e-10

    def test_rank_deficient_keeps_available(self):
        t = np.linspace(0, 1, 30)[:, None]
        X = np.hstack([t, 2 * t, -t])
        assert pca_fit(X, 3).components.shape == (1, 3)

    def test_idempotent(self):
        X = self.iris.X
        Z = pca_fit(X, 2).transform(X)
        Z2 = pca_fit(Z, 2).transform(Z)
        # projecting already-reduced centered data changes nothing up to sign/rotation
        np.testing.assert_allclose(np.abs(Z2), np.abs(Z - Z.mean(axis=0)), atol=1e-9)

    def test_fit_on_train_only(self):
        X = self.iris.X
        Ztr, Zte, model = pca_reduce(X[:100], X[100:], 2)
        np.testing.assert_allclose(model.mean, X[:100].mean(axis=0))
        np.testing.assert_allclose(Zte, (X[100:] - X[:100].mean(axis=0)) @ model.components.T)

    def test_errors(self):
        with pytest.raises(TooFewPoints):
            pca_fit(np.zeros((1, 3)), 1)
        with pytest.raises(RankDeficient):
            pca_fit(np.ones((5, 3)), 1)
        with pytest.raises(InvalidParameter):
            pca_fit(np.random.default_rng(0).normal(size=(5, 3)), 4)
