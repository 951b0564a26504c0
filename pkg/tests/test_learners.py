import numpy as np
import pytest

from behaviorbench.datamodel import FeatureMatrix
from behaviorbench.errors import InvalidLabels, NumericError, SchemaError
from behaviorbench.learners import (DEFAULTS, KINDS, LearnerSpec, fit,
                                    load_model, model_from_doc, model_to_doc,
                                    predict_labels, predict_scores, save_model)
from behaviorbench.learners.net import NetParams, init_params, loss_and_grads

ALL_KINDS = list(KINDS)

FAST_PARAMS = {
    "rf": {"n_trees": 40, "max_depth": 10},
    "xgb": {"n_rounds": 30, "max_depth": 3, "learning_rate": 0.3},
    "svm": {},
    "nn": {"epochs": 150, "learning_rate": 0.1},
}


def xor_matrix(repeat=50):
    pts = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    labs = np.array([0, 1, 1, 0])
    X = np.tile(pts, (repeat, 1))
    y = np.tile(labs, repeat)
    return FeatureMatrix(("x1", "x2"), X, y, 2)


def multiclass_blobs(seed=0, n_per=40, classes=3):
    rng = np.random.default_rng(seed)
    parts, labels = [], []
    for c in range(classes):
        center = np.zeros(4)
        center[c % 4] = 4.0 * (1 + c // 4)
        parts.append(rng.normal(0, 1, (n_per, 4)) + center)
        labels += [c] * n_per
    return FeatureMatrix(tuple(f"f{i}" for i in range(4)),
                         np.vstack(parts), np.array(labels), 7 if classes > 3 else 3)


class TestSpecValidation:
    def test_defaults_fill_in(self):
        spec = LearnerSpec("rf")
        assert spec.params["n_trees"] == 500
        assert spec.params["mtry"] == "sqrt"

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            LearnerSpec("boost")

    def test_unknown_parameter(self):
        with pytest.raises(ValueError, match="unknown parameters"):
            LearnerSpec("rf", params={"depth": 3})

    @pytest.mark.parametrize("kind,params", [
        ("rf", {"n_trees": 0}),
        ("xgb", {"learning_rate": -0.1}),
        ("svm", {"C": 0.0}),
        ("nn", {"hidden": 0}),
    ])
    def test_invalid_values(self, kind, params):
        with pytest.raises(ValueError):
            LearnerSpec(kind, params=params)


class TestFitContracts:
    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_separable_blobs_accuracy(self, kind, small_blobs):
        spec = LearnerSpec(kind, seed=1, params=FAST_PARAMS[kind])
        model = fit(spec, small_blobs)
        acc = (predict_labels(model, small_blobs) == small_blobs.labels).mean()
        assert acc >= 0.95

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_scores_are_probabilities(self, kind, small_blobs):
        model = fit(LearnerSpec(kind, seed=2, params=FAST_PARAMS[kind]),
                    small_blobs)
        scores = predict_scores(model, small_blobs)
        assert np.all(scores >= 0)
        assert np.allclose(scores.sum(axis=1), 1.0, atol=1e-9)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_deterministic_given_seed(self, kind, small_blobs):
        spec = LearnerSpec(kind, seed=9, params=FAST_PARAMS[kind])
        s1 = predict_scores(fit(spec, small_blobs), small_blobs)
        s2 = predict_scores(fit(spec, small_blobs), small_blobs)
        assert np.array_equal(s1, s2)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_multiclass(self, kind):
        m = multiclass_blobs(seed=3)
        model = fit(LearnerSpec(kind, seed=3, params=FAST_PARAMS[kind]), m)
        acc = (predict_labels(model, m) == m.labels).mean()
        assert acc >= 0.9
        assert predict_scores(model, m).shape == (m.n_rows, 3)

    def test_constant_labels_rejected(self):
        X = np.random.default_rng(0).normal(size=(20, 3))
        m = FeatureMatrix(("a", "b", "c"), X, np.zeros(20, dtype=int), 2)
        for kind in ALL_KINDS:
            with pytest.raises(InvalidLabels):
                fit(LearnerSpec(kind, params=FAST_PARAMS[kind]), m)

    def test_schema_mismatch_rejected(self, small_blobs):
        model = fit(LearnerSpec("rf", seed=0, params=FAST_PARAMS["rf"]),
                    small_blobs)
        with pytest.raises(SchemaError):
            predict_scores(model, np.zeros((3, 9)))

    def test_non_finite_prediction_rows_rejected(self, small_blobs):
        model = fit(LearnerSpec("rf", seed=0, params=FAST_PARAMS["rf"]),
                    small_blobs)
        bad = np.full((2, 5), np.nan)
        with pytest.raises(NumericError):
            predict_scores(model, bad)

    def test_argmax_tie_breaks_to_lowest_class(self):
        scores = np.array([[0.5, 0.5], [0.2, 0.8]])
        assert np.argmax(scores, axis=1).tolist() == [0, 1]


class TestRandomForest:
    def test_bootstrap_unique_fraction(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(292, 6))
        y = rng.integers(0, 2, 292)
        m = FeatureMatrix(tuple(f"f{i}" for i in range(6)), X, y, 2)
        model = fit(LearnerSpec("rf", seed=5,
                                params={"n_trees": 200, "max_depth": 4}), m)
        frac = model.payload.inbag_unique_fraction.mean()
        assert frac == pytest.approx(0.632, abs=0.02)

    def test_oob_indices_recorded(self, small_blobs):
        model = fit(LearnerSpec("rf", seed=1, params={"n_trees": 20}), small_blobs)
        oob = model.payload.oob_masks
        assert oob.shape == (20, small_blobs.n_rows)
        # every tree leaves some rows out
        assert (oob.sum(axis=1) > 0).all()

    def test_importances_shape(self, small_blobs):
        model = fit(LearnerSpec("rf", seed=1, params={"n_trees": 15}), small_blobs)
        imp = model.payload.importances
        assert imp.shape == (15, 5)
        # the separating feature should dominate
        assert imp.mean(axis=0).argmax() == 0

    def test_row_permutation_with_fixed_resampler(self, small_blobs):
        # permuting rows changes only the seeded resampling path; with the
        # seed fixed the fit itself stays deterministic
        spec = LearnerSpec("rf", seed=11, params={"n_trees": 25})
        grid = np.random.default_rng(0).normal(size=(30, 5))
        base = predict_labels(fit(spec, small_blobs), grid)
        again = predict_labels(fit(spec, small_blobs), grid)
        assert np.array_equal(base, again)


class TestBoosting:
    def test_lr_zero_predicts_prior_argmax(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(60, 3))
        y = np.array([0] * 40 + [1] * 20)
        m = FeatureMatrix(("a", "b", "c"), X, y, 2)
        model = fit(LearnerSpec("xgb", params={"learning_rate": 0.0,
                                               "n_rounds": 5}), m)
        preds = predict_labels(model, rng.normal(size=(50, 3)))
        assert (preds == 0).all()
        scores = predict_scores(model, rng.normal(size=(10, 3)))
        assert np.allclose(scores, [40 / 60, 20 / 60], atol=1e-9)

    def test_min_gain_prunes_everything(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(80, 3))
        y = rng.integers(0, 2, 80)
        m = FeatureMatrix(("a", "b", "c"), X, y, 2)
        model = fit(LearnerSpec("xgb", params={"min_gain": 1e9, "n_rounds": 3}), m)
        # every tree collapses to a root leaf; scores stay at the prior
        scores = predict_scores(model, X)
        assert np.allclose(scores, scores[0], atol=1e-6)


def _blob_like_grid(seed, n=40):
    """Probe points drawn from the training distribution (mixture of the
    two blobs); decisions there are stable at the solver's tolerance."""
    rng = np.random.default_rng(seed)
    pts = rng.normal(0, 1, (n, 5))
    pts[n // 2:, 0] += 4.0
    return pts


class TestSvm:
    def test_solver_matches_qp_oracle(self):
        # independent ground truth: the dual solved as a generic QP
        from cvxopt import matrix, solvers

        from behaviorbench.learners._kernels import smo_solve
        solvers.options["show_progress"] = False
        rng = np.random.default_rng(0)
        X = np.vstack([rng.normal(0, 1, (30, 3)), rng.normal(0, 1, (30, 3)) + 2])
        y = np.array([1.0] * 30 + [-1.0] * 30)
        d2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
        K = np.exp(-d2 / 3.0)
        C = 1.0
        alpha, _, _ = smo_solve(K, y, C, 1e-6, 1_000_000)
        n = y.size
        Q = np.outer(y, y) * K
        sol = solvers.qp(matrix(Q), matrix(-np.ones(n)),
                         matrix(np.vstack([-np.eye(n), np.eye(n)])),
                         matrix(np.hstack([np.zeros(n), C * np.ones(n)])),
                         matrix(y.reshape(1, -1)), matrix(np.zeros(1)))
        a_qp = np.array(sol["x"]).ravel()
        obj = 0.5 * alpha @ Q @ alpha - alpha.sum()
        obj_qp = 0.5 * a_qp @ Q @ a_qp - a_qp.sum()
        assert obj <= obj_qp + 1e-6
        assert np.abs(alpha - a_qp).max() < 5e-3

    def test_order_free_dual(self, small_blobs):
        spec = LearnerSpec("svm")
        grid = _blob_like_grid(1)
        base = predict_labels(fit(spec, small_blobs), grid)
        perm = np.random.default_rng(2).permutation(small_blobs.n_rows)
        shuffled = small_blobs.select_rows(perm)
        permuted = predict_labels(fit(spec, shuffled), grid)
        assert np.array_equal(base, permuted)

    def test_binary_scores_continuous(self, small_blobs):
        model = fit(LearnerSpec("svm"), small_blobs)
        scores = predict_scores(model, small_blobs)
        assert len(np.unique(scores[:, 0])) > 10

    def test_duplicate_zero_weight_vector_invariance(self, small_blobs):
        # duplicating a zero-dual-weight row must not move the decision;
        # probe points sit well inside each blob so a refit cannot flip them
        spec = LearnerSpec("svm")
        rng = np.random.default_rng(3)
        grid = rng.normal(0, 0.5, (40, 5))
        grid[20:, 0] += 4.0
        model = fit(spec, small_blobs)
        base = predict_labels(model, grid)
        # deepest row of the positive blob is certainly not a support vector
        deep = int(np.argmax(small_blobs.values[:, 0]))
        X = np.vstack([small_blobs.values, small_blobs.values[deep:deep + 1]])
        y = np.concatenate([small_blobs.labels, small_blobs.labels[deep:deep + 1]])
        dup = FeatureMatrix(small_blobs.column_names, X, y, 2)
        dup_labels = predict_labels(fit(spec, dup), grid)
        assert np.array_equal(base, dup_labels)

    def test_linear_kernel(self, small_blobs):
        model = fit(LearnerSpec("svm", params={"kernel": "linear"}), small_blobs)
        acc = (predict_labels(model, small_blobs) == small_blobs.labels).mean()
        assert acc >= 0.95


class TestNeuralNet:
    def test_xor_training_accuracy(self):
        m = xor_matrix(repeat=50)
        model = fit(LearnerSpec("nn", seed=0,
                                params={"hidden": 8, "epochs": 600,
                                        "learning_rate": 0.5}), m)
        acc = (predict_labels(model, m) == m.labels).mean()
        assert acc == 1.0

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(12)
        X = rng.normal(size=(16, 4))
        Y = np.zeros((16, 3))
        Y[np.arange(16), rng.integers(0, 3, 16)] = 1.0
        params = init_params(4, 6, 3, rng)
        _, grads = loss_and_grads(params, X, Y)

        eps = 1e-6
        worst = 0.0
        for name in ("W1", "b1", "W2", "b2"):
            theta = getattr(params, name)
            analytic = getattr(grads, name)
            flat = theta.reshape(-1)
            for idx in range(flat.size):
                orig = flat[idx]
                flat[idx] = orig + eps
                up, _ = loss_and_grads(params, X, Y)
                flat[idx] = orig - eps
                down, _ = loss_and_grads(params, X, Y)
                flat[idx] = orig
                numeric = (up - down) / (2 * eps)
                a = analytic.reshape(-1)[idx]
                rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
                worst = max(worst, rel)
        assert worst <= 1e-4

    def test_row_permutation_with_fixed_shuffler(self, small_blobs):
        spec = LearnerSpec("nn", seed=5, params={"epochs": 50})
        grid = np.random.default_rng(4).normal(size=(20, 5))
        a = predict_scores(fit(spec, small_blobs), grid)
        b = predict_scores(fit(spec, small_blobs), grid)
        assert np.array_equal(a, b)


class TestPersistence:
    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_save_load_round_trip(self, kind, small_blobs, tmp_path):
        model = fit(LearnerSpec(kind, seed=3, params=FAST_PARAMS[kind]),
                    small_blobs)
        path = tmp_path / f"{kind}.model"
        save_model(model, path)
        back = load_model(path)
        assert back.kind == kind
        assert back.column_names == model.column_names
        assert np.allclose(predict_scores(back, small_blobs),
                           predict_scores(model, small_blobs), atol=1e-12)

    def test_doc_version_checked(self, small_blobs):
        model = fit(LearnerSpec("nn", seed=1, params=FAST_PARAMS["nn"]),
                    small_blobs)
        doc = model_to_doc(model)
        doc["format"] = 99
        with pytest.raises(ValueError, match="format"):
            model_from_doc(doc)
