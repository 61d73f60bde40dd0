import numpy as np
import pytest

from fiprobe.core import LabeledFeatureSet, ValidationError
from fiprobe.classify import (FitConfig, evaluate, fit_erm01_1d, fit_erm01_2d,
                              fit_logreg, fit_ncc)
from fiprobe.gaussian import GaussianTaskSpec, bayes_optimal_error, draw_query, draw_train, illustrative_spec
from fiprobe.kernels import erm01_2d_search, erm01_2d_search_pure

from oracles import erm01_1d_exhaustive, erm01_2d_exhaustive


def lfs(feats, labels, n_classes=2):
    return LabeledFeatureSet(np.asarray(feats, dtype=float),
                             np.asarray(labels), n_classes)


class TestNcc:
    def test_single_shot_centroids_equal_samples(self):
        train = lfs([[1.0, 2.0], [3.0, 4.0]], [0, 1])
        clf = fit_ncc(train)
        assert np.array_equal(clf.centroids, train.features)

    def test_distance_logits_example(self):
        train = lfs([[0.0, 0.0], [2.0, 0.0]], [0, 1])
        clf = fit_ncc(train)
        q = np.array([[0.5, 0.0]])
        d = -((q[:, None, :] - clf.centroids[None]) ** 2).sum(-1)
        assert np.allclose(d[0], [-0.25, -2.25])
        assert clf.predict(q)[0] == 0

    def test_tie_breaks_to_class_zero(self):
        train = lfs([[0.0], [2.0]], [0, 1])
        clf = fit_ncc(train)
        assert clf.predict(np.array([[1.0]]))[0] == 0

    def test_linear_identity_exact(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            C = rng.integers(2, 6)
            n, dim = 4 * C, rng.integers(1, 6)
            labels = np.arange(n) % C
            train = lfs(rng.normal(size=(n, dim)) * 3, labels, C)
            clf = fit_ncc(train)
            q = rng.normal(size=(25, dim)) * 3
            d = ((q[:, None, :] - clf.centroids[None]) ** 2).sum(-1)
            assert np.array_equal(np.argmin(d, axis=1), clf.predict(q))

    def test_shift_invariance(self):
        rng = np.random.default_rng(1)
        train = lfs(rng.normal(size=(8, 3)), np.arange(8) % 2)
        q = rng.normal(size=(30, 3))
        shift = rng.normal(size=3)
        base = fit_ncc(train).predict(q)
        shifted_train = lfs(train.features + shift, train.labels)
        assert np.array_equal(base, fit_ncc(shifted_train).predict(q + shift))


class TestLogreg:
    def test_separable_perfect_train_accuracy(self):
        train = lfs([[0.0], [1.0]], [0, 1])
        clf = fit_logreg(train)
        assert evaluate(clf, train) == 0.0

    def test_symmetric_data_boundary_through_origin(self):
        rng = np.random.default_rng(2)
        half = rng.normal(size=(40, 2)) + [2.0, 1.0]
        feats = np.vstack([half, -half])
        labels = np.array([0] * 40 + [1] * 40)
        clf = fit_logreg(lfs(feats, labels))
        # the unique regularized optimum inherits the negation symmetry
        assert abs(clf.b[1] - clf.b[0]) < 1e-6

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        train = lfs(rng.normal(size=(30, 2)), np.arange(30) % 3, 3)
        a, b = fit_logreg(train), fit_logreg(train)
        assert np.array_equal(a.W, b.W) and np.array_equal(a.b, b.b)

    def test_optimizers_agree(self):
        rng = np.random.default_rng(4)
        train = lfs(rng.normal(size=(24, 2)) + rng.normal(size=(1, 2)),
                    np.arange(24) % 2)
        a = fit_logreg(train, FitConfig(step_policy="lbfgs", tolerance=1e-9))
        b = fit_logreg(train, FitConfig(step_policy="nesterov",
                                        tolerance=1e-9, max_iters=4000))
        assert np.allclose(a.W, b.W, atol=1e-4)
        assert np.allclose(a.b, b.b, atol=1e-4)

    def test_one_shot_matches_ncc_predictions(self):
        spec = illustrative_spec()
        rng = np.random.default_rng(5)
        for t in range(20):
            train = draw_train(spec, 1, rng)
            query = draw_query(spec, 50, rng)
            p_ncc = fit_ncc(train).predict(query.features)
            p_lr = fit_logreg(train).predict(query.features)
            assert np.array_equal(p_ncc, p_lr)

    def test_high_shot_approaches_bayes(self):
        spec = illustrative_spec()
        rng = np.random.default_rng(6)
        train = draw_train(spec, 10_000, rng)
        clf = fit_logreg(train)
        query = draw_query(spec, 100_000, rng)
        err = evaluate(clf, query)
        bayes = bayes_optimal_error(spec, (0, 1)).error
        assert abs(err - bayes) < 0.003


class TestErm1d:
    def test_separable_midpoint(self):
        fit = fit_erm01_1d(lfs([[0.0], [1.0]], [0, 1]))
        assert fit.train_error == 0.0
        # boundary at 0.5 with class 1 above
        assert fit.classifier.predict(np.array([[0.49], [0.51]])).tolist() == [0, 1]

    def test_one_third_example(self):
        data = lfs([[0.0], [1.0], [0.5]], [0, 0, 1])
        fit = fit_erm01_1d(data)
        assert fit.train_error == pytest.approx(1.0 / 3.0)
        assert erm01_1d_exhaustive(data.features[:, 0], data.labels) == 1

    def test_indistinguishable_points(self):
        fit = fit_erm01_1d(lfs([[2.0], [2.0], [2.0], [2.0]], [0, 1, 0, 1]))
        assert fit.train_error == 0.5

    def test_matches_exhaustive_on_fuzz(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            n = int(rng.integers(2, 25))
            x = (rng.integers(-3, 4, size=n).astype(float)
                 if rng.random() < 0.5 else rng.normal(size=n))
            y = rng.integers(0, 2, size=n)
            data = lfs(x[:, None], y) if len(set(y)) == 2 else None
            if data is None:
                continue
            fit = fit_erm01_1d(data)
            assert round(fit.train_error * n) == erm01_1d_exhaustive(x, y)

    def test_erm_beats_or_ties_other_fits(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            n = 12
            feats = rng.normal(size=(n, 1)) + rng.normal(size=(1, 1))
            labels = rng.integers(0, 2, size=n)
            if len(set(labels.tolist())) < 2:
                continue
            data = lfs(feats, labels)
            erm = fit_erm01_1d(data).train_error
            assert erm <= evaluate(fit_ncc(data), data) + 1e-12
            assert erm <= evaluate(fit_logreg(data), data) + 1e-12


class TestErm2d:
    def test_separable_four_points(self):
        data = lfs([[0, 0], [0, 1], [1, 0], [1, 1]], [0, 0, 1, 1])
        assert fit_erm01_2d(data).train_error == 0.0

    def test_xor_quarter(self):
        data = lfs([[0, 0], [1, 1], [0, 1], [1, 0]], [0, 0, 1, 1])
        assert fit_erm01_2d(data).train_error == pytest.approx(0.25)

    def test_matches_exhaustive_random(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            n = int(rng.integers(2, 21))
            X = rng.normal(size=(n, 2))
            y = rng.integers(0, 2, size=n)
            if len(set(y.tolist())) < 2:
                continue
            fit = fit_erm01_2d(lfs(X, y))
            assert round(fit.train_error * n) == erm01_2d_exhaustive(X, y)

    def test_matches_exhaustive_degenerate(self):
        rng = np.random.default_rng(10)
        for _ in range(60):
            n = int(rng.integers(2, 15))
            r = rng.random()
            if r < 0.4:
                X = rng.integers(-2, 3, size=(n, 2)).astype(float)
            elif r < 0.6:
                X = np.zeros((n, 2))
                X[:, 0] = rng.integers(-2, 3, size=n)
            else:
                X = rng.normal(size=(n, 2))
            y = rng.integers(0, 2, size=n)
            if len(set(y.tolist())) < 2:
                continue
            fit = fit_erm01_2d(lfs(X, y))
            assert round(fit.train_error * n) == erm01_2d_exhaustive(X, y)

    def test_backends_agree_on_loss(self):
        rng = np.random.default_rng(11)
        for _ in range(150):
            n = int(rng.integers(2, 40))
            X = rng.normal(size=(n, 2)) * rng.uniform(0.1, 10)
            y = rng.integers(0, 2, size=n)
            _, _, l_fast = erm01_2d_search(X, y)
            _, _, l_pure = erm01_2d_search_pure(X, y)
            assert l_fast == l_pure

    def test_erm_beats_or_ties_other_fits(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            feats = rng.normal(size=(14, 2)) + rng.normal(size=(1, 2))
            labels = rng.integers(0, 2, size=14)
            if len(set(labels.tolist())) < 2:
                continue
            data = lfs(feats, labels)
            erm = fit_erm01_2d(data).train_error
            assert erm <= evaluate(fit_ncc(data), data) + 1e-12
            assert erm <= evaluate(fit_logreg(data), data) + 1e-12

    def test_wrong_dim_rejected(self):
        data = lfs([[0.0, 1.0, 2.0], [1.0, 2.0, 3.0]], [0, 1])
        with pytest.raises(ValidationError, match="dim"):
            fit_erm01_2d(data)


class TestEvaluate:
    def test_all_correct(self):
        train = lfs([[0.0], [10.0]], [0, 1])
        clf = fit_ncc(train)
        query = lfs([[1.0], [9.0]], [0, 1])
        assert evaluate(clf, query) == 0.0

    def test_all_flipped(self):
        train = lfs([[0.0], [10.0]], [0, 1])
        clf = fit_ncc(train)
        query = lfs([[1.0], [9.0]], [1, 0])
        assert evaluate(clf, query) == 1.0

    def test_constant_classifier_half(self):
        train = lfs([[0.0], [10.0]], [0, 1])
        clf = fit_ncc(train)
        query = lfs([[-5.0], [-6.0]], [0, 1])
        assert evaluate(clf, query) == 0.5

    def test_dim_mismatch(self):
        clf = fit_ncc(lfs([[0.0], [1.0]], [0, 1]))
        with pytest.raises(ValidationError, match="dimension"):
            evaluate(clf, lfs([[0.0, 1.0], [1.0, 2.0]], [0, 1]))
