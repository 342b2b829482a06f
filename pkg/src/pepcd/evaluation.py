"""Evaluation utilities: overlap shift, accuracy metrics, paired 5x2 cross
validation tests and principal component reduction."""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, lgamma, log, log1p, sqrt
from typing import Callable

import numpy as np

from .errors import InvalidParameter, RankDeficient, TooFewPoints, ValidationError


def overlap_shift(zeta: float, d: int) -> float:
    """Shift ``nu`` such that ``U[0,1]^d`` and ``U[nu,1+nu]^d`` overlap in a ``zeta``
    fraction of their union.

    Examples
    --------
    >>> round(overlap_shift(0.5, 2), 5)
    0.1835
    """
    zeta = float(zeta)
    if not 0.0 <= zeta <= 1.0:
        raise InvalidParameter(f"overlap ratio must lie in [0, 1], got {zeta}")
    if int(d) < 1:
        raise InvalidParameter(f"dimension must be positive, got {d}")
    return 1.0 - (2.0 * zeta / (1.0 + zeta)) ** (1.0 / int(d))


@dataclass(frozen=True)
class Metrics:
    """Per-class correct classification rates and their mean (``auc``)."""

    ccr: tuple
    auc: float
    accuracy: float
    counts: tuple

    def to_dict(self) -> dict:
        return {"ccr": list(self.ccr), "auc": self.auc, "accuracy": self.accuracy, "counts": list(self.counts)}


def evaluate(y_true, y_pred, n_classes: int | None = None) -> Metrics:
    """Correct classification rate of each class and their average.

    The average of the per-class rates is reported as ``auc`` (balanced
    accuracy).  Classes absent from ``y_true`` get a rate of NaN and are left
    out of the average.
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.size == 0:
        raise ValidationError("labels and predictions must be non-empty and of equal length")
    J = int(max(y_true.max(), y_pred.max())) + 1 if n_classes is None else int(n_classes)
    ccr, counts = [], []
    for j in range(J):
        mask = y_true == j
        counts.append(int(mask.sum()))
        ccr.append(float(np.mean(y_pred[mask] == j)) if mask.any() else float("nan"))
    present = [c for c in ccr if not np.isnan(c)]
    return Metrics(tuple(ccr), float(np.mean(present)), float(np.mean(y_true == y_pred)), tuple(counts))


def score_auc(scores, y_true) -> float:
    """Area under the ROC curve from scores (larger favours class 1); ties count half."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(y_true)
    pos, neg = s[y == 1], s[y == 0]
    if pos.size == 0 or neg.size == 0:
        raise ValidationError("both classes are needed for a score-based AUC")
    greater = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return float((greater + 0.5 * ties) / (pos.size * neg.size))


_TINY = 1e-300


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, 10_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        step = d * c
        h *= step
        if abs(step - 1.0) < 1e-15:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function ``I_x(a, b)``."""
    if a <= 0 or b <= 0:
        raise InvalidParameter("betainc needs positive shape parameters")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = exp(lgamma(a + b) - lgamma(a) - lgamma(b) + a * log(x) + b * log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    """Two-sided p-value of Student's t with ``df`` degrees of freedom."""
    if np.isinf(t):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


def f_upper_p(f: float, df1: float, df2: float) -> float:
    """Upper-tail p-value of the F distribution."""
    if np.isinf(f):
        return 0.0
    if f <= 0:
        return 1.0
    return betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))


@dataclass(frozen=True)
class PairedTest:
    """5x2 cross-validation statistics for two classifiers.

    ``differences[i, j]`` is the score of classifier A minus that of B on
    fold ``j`` of repetition ``i``.
    """

    differences: np.ndarray
    variances: np.ndarray
    t: float
    t_p: float
    f: float
    f_p: float
    scores_a: np.ndarray | None = None
    scores_b: np.ndarray | None = None

    def rejects(self, alpha: float = 0.05, test: str = "f") -> bool:
        return (self.f_p if test == "f" else self.t_p) < alpha

    def to_dict(self) -> dict:
        out = {
            "differences": self.differences.tolist(), "variances": self.variances.tolist(),
            "t": _finite_or_str(self.t), "t_p": self.t_p, "f": _finite_or_str(self.f), "f_p": self.f_p,
        }
        if self.scores_a is not None:
            out["scores_a"] = self.scores_a.tolist()
            out["scores_b"] = self.scores_b.tolist()
        return out


def _finite_or_str(v: float):
    return v if np.isfinite(v) else str(v)


def paired_tests(differences) -> PairedTest:
    """5x2cv paired t and combined F statistics from a (5, 2) array of differences.

    With ``s_i^2 = sum_j (d_ij - mean_i)^2``: ``t = d_11 / sqrt(sum s_i^2 / 5)``
    on 5 degrees of freedom and ``F = sum d_ij^2 / (2 sum s_i^2)`` on (10, 5).
    When every ``s_i^2`` is zero both p-values are 1 if all differences are
    zero and 0 otherwise.
    """
    D = np.asarray(differences, dtype=float)
    if D.shape != (5, 2):
        raise InvalidParameter("expected a (5, 2) array of score differences")
    s2 = ((D - D.mean(axis=1, keepdims=True)) ** 2).sum(axis=1)
    total = float(s2.sum())
    if total == 0.0:
        if np.all(D == 0):
            return PairedTest(D, s2, 0.0, 1.0, float("nan"), 1.0)
        t = float(np.copysign(np.inf, D[0, 0])) if D[0, 0] else 0.0
        return PairedTest(D, s2, t, 0.0, float("inf"), 0.0)
    t = float(D[0, 0] / sqrt(total / 5.0))
    f = float((D ** 2).sum() / (2.0 * total))
    return PairedTest(D, s2, t, t_two_sided_p(t, 5), f, f_upper_p(f, 10, 5))


def stratified_halves(y, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Split indices into two halves with each class divided as evenly as possible."""
    y = np.asarray(y)
    first, second = [], []
    for j in np.unique(y):
        idx = np.flatnonzero(y == j)
        idx = idx[rng.permutation(idx.size)]
        h = idx.size // 2
        first.append(idx[:h])
        second.append(idx[h:])
    return np.sort(np.concatenate(first)), np.sort(np.concatenate(second))


def cv_folds(y, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """The five stratified half splits used by the 5x2 procedure for ``seed``."""
    rng = np.random.default_rng(seed)
    return [stratified_halves(y, rng) for _ in range(5)]


FitPredict = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def cv_scores(fit_predict: FitPredict, X, y, seed: int = 0, score: Callable | None = None) -> np.ndarray:
    """Scores of one classifier on the 5x2 folds drawn from ``seed``, shape (5, 2).

    ``fit_predict(X_train, y_train, X_test)`` returns predicted labels and
    ``score(y_true, y_pred)`` defaults to the mean per-class correct
    classification rate.  Equal seeds give equal folds, so scores of
    different classifiers can be paired.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if score is None:
        J = int(y.max()) + 1

        def score(t, p):
            return evaluate(t, p, J).auc

    S = np.zeros((5, 2))
    for i, (h1, h2) in enumerate(cv_folds(y, seed)):
        for j, (tr, te) in enumerate(((h1, h2), (h2, h1))):
            S[i, j] = score(y[te], fit_predict(X[tr], y[tr], X[te]))
    return S


def five_by_two_cv(fit_predict_a: FitPredict, fit_predict_b: FitPredict, X, y, seed: int = 0,
                   score: Callable | None = None) -> PairedTest:
    """Compare two classifiers with five repetitions of stratified 2-fold CV."""
    SA = cv_scores(fit_predict_a, X, y, seed, score)
    SB = cv_scores(fit_predict_b, X, y, seed, score)
    res = paired_tests(SA - SB)
    return PairedTest(res.differences, res.variances, res.t, res.t_p, res.f, res.f_p, SA, SB)


@dataclass(frozen=True)
class PCAModel:
    """Principal axes fitted on training data.

    ``components`` rows are unit eigenvectors of the covariance, sorted by
    decreasing eigenvalue, each signed so its largest-magnitude entry is
    positive.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    explained_ratio: np.ndarray

    def transform(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.mean.shape[0]:
            raise InvalidParameter(f"expected {self.mean.shape[0]} features, got {X.shape[1]}")
        return (X - self.mean) @ self.components.T

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "components": self.components.tolist(),
                "explained_variance": self.explained_variance.tolist(),
                "explained_ratio": self.explained_ratio.tolist()}


def pca_fit(X, target_dim: int, rank_tol: float = 1e-12) -> PCAModel:
    """Fit principal components; keeps fewer than ``target_dim`` if the data has lower rank.

    Raises
    ------
    TooFewPoints
        Fewer than two rows.
    RankDeficient
        The data has no variance at all.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise TooFewPoints("PCA needs at least two points")
    if not 1 <= int(target_dim) <= X.shape[1]:
        raise InvalidParameter(f"target dimension must lie in [1, {X.shape[1]}]")
    mean = X.mean(axis=0)
    cov = np.cov(X - mean, rowvar=False).reshape(X.shape[1], X.shape[1])
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals, kind="stable")[::-1]
    vals, vecs = vals[order], vecs[:, order].T
    total = vals.clip(min=0).sum()
    if total <= 0:
        raise RankDeficient("data has zero variance")
    keep = min(int(target_dim), int(np.sum(vals > rank_tol * vals[0])))
    vecs = vecs[:keep]
    signs = np.sign(vecs[np.arange(keep), np.abs(vecs).argmax(axis=1)])
    vecs = vecs * signs[:, None]
    return PCAModel(mean, vecs, vals[:keep], vals[:keep] / total)


def pca_reduce(X_train, X_test, target_dim: int) -> tuple[np.ndarray, np.ndarray, PCAModel]:
    """Fit PCA on the training rows only and project both sets."""
    model = pca_fit(X_train, target_dim)
    return model.transform(X_train), model.transform(X_test), model
