"""Multinomial logistic regression: gradient oracles, training, imputation.

The gradient is pinned two independent ways before anything else relies on
it: a fully hand-computed two-class case with frozen literals, and central
finite differences of the loss itself.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stressorlens.corpus import FlairGroup, FlairSource
from stressorlens.errors import NumericalError
from stressorlens.flairclf import (
    CLASS_ORDER,
    FlairClassifier,
    LogRegModel,
    TrainConfig,
    assemble_features,
    impute_flairs,
    load_logreg,
    loss_and_gradient,
    predict_proba,
    save_logreg,
    select_support_subset,
    train,
)
from stressorlens.textprep import Weighting
from stressorlens.topicmodel import LdaConfig, fit_vb

from conftest import dtm, make_post


def finite_difference_gradient(weights, X_aug, Y, l2, step=1e-5):
    grad = np.zeros_like(weights)
    for i in range(weights.shape[0]):
        for j in range(weights.shape[1]):
            up = weights.copy()
            up[i, j] += step
            down = weights.copy()
            down[i, j] -= step
            lu, _ = loss_and_gradient(up, X_aug, Y, l2)
            ld, _ = loss_and_gradient(down, X_aug, Y, l2)
            grad[i, j] = (lu - ld) / (2 * step)
    return grad


class TestLossAndGradient:
    def test_hand_computed_two_class_case(self):
        # one sample, x = [2] with bias -> [2, 1]; true class 0; lambda = 2
        weights = np.array([[0.5, 0.0], [-0.5, 0.0]])
        X_aug = np.array([[2.0, 1.0]])
        Y = np.array([[1.0, 0.0]])
        loss, grad = loss_and_gradient(weights, X_aug, Y, l2_lambda=2.0)
        assert loss == pytest.approx(0.6269280110429725, abs=1e-12)
        expected = np.array(
            [
                [0.7615941559557649, -0.11920292202211757],
                [-0.7615941559557649, 0.11920292202211756],
            ]
        )
        np.testing.assert_allclose(grad, expected, atol=1e-12, rtol=0)

    def test_matches_central_differences(self):
        rng = np.random.default_rng(42)
        X_aug = np.hstack([rng.standard_normal((5, 211)), np.ones((5, 1))])
        Y = np.zeros((5, 4))
        Y[np.arange(5), rng.integers(0, 4, size=5)] = 1.0
        weights = 0.1 * rng.standard_normal((4, 212))
        _, analytic = loss_and_gradient(weights, X_aug, Y, l2_lambda=0.7)
        fd = finite_difference_gradient(weights, X_aug, Y, 0.7)
        rel = np.abs(analytic - fd) / np.maximum.reduce(
            [np.abs(analytic), np.abs(fd), np.ones_like(fd)]
        )
        assert rel.max() <= 1e-4

    def test_bias_column_is_not_regularized(self):
        # with zero data influence removed, only the penalty remains
        weights = np.array([[0.0, 5.0], [0.0, -5.0]])
        X_aug = np.array([[0.0, 1.0]])
        Y = np.array([[1.0, 0.0]])
        _, g_low = loss_and_gradient(weights, X_aug, Y, l2_lambda=0.0)
        _, g_high = loss_and_gradient(weights, X_aug, Y, l2_lambda=100.0)
        np.testing.assert_allclose(g_low, g_high, atol=1e-12)

    def test_loss_is_stable_for_large_scores(self):
        weights = np.array([[500.0, 0.0], [-500.0, 0.0]])
        X_aug = np.array([[2.0, 1.0]])
        Y = np.array([[0.0, 1.0]])
        loss, grad = loss_and_gradient(weights, X_aug, Y, l2_lambda=0.0)
        assert np.isfinite(loss)
        assert np.isfinite(grad).all()


class TestSoftmaxRoute:
    def zero_model(self, n_features=3):
        return LogRegModel(
            classes=CLASS_ORDER,
            weights=np.zeros((4, n_features + 1)),
            train_config=TrainConfig(),
            loss_trace=(),
        )

    def test_zero_weights_give_uniform_probabilities(self):
        probs = predict_proba(self.zero_model(), np.ones(3))
        np.testing.assert_allclose(probs, np.full(4, 0.25), atol=1e-15)

    def test_hand_computed_probabilities(self):
        # scores [ln 2, 0, 0, 0] -> [2/5, 1/5, 1/5, 1/5]
        model = LogRegModel(
            classes=CLASS_ORDER,
            weights=np.array(
                [[np.log(2.0), 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]
            ),
            train_config=TrainConfig(),
            loss_trace=(),
        )
        probs = predict_proba(model, np.ones(1))
        np.testing.assert_allclose(probs, [0.4, 0.2, 0.2, 0.2], atol=1e-12)

    def test_matrix_input_returns_matrix(self):
        probs = predict_proba(self.zero_model(), np.ones((5, 3)))
        assert probs.shape == (5, 4)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)

    def test_wrong_width_rejected(self):
        with pytest.raises(ValueError):
            predict_proba(self.zero_model(3), np.ones(2))

    @settings(max_examples=50, deadline=None)
    @given(
        shift=st.floats(min_value=-50, max_value=50),
        raw=st.lists(st.floats(min_value=-5, max_value=5), min_size=4, max_size=4),
    )
    def test_probabilities_are_shift_invariant(self, shift, raw):
        # adding a constant to every class bias must not change the output
        base = np.zeros((4, 2))
        base[:, 0] = raw
        shifted = base.copy()
        shifted[:, 1] += shift
        model_a = LogRegModel(CLASS_ORDER, base, TrainConfig(), ())
        model_b = LogRegModel(CLASS_ORDER, shifted, TrainConfig(), ())
        pa = predict_proba(model_a, np.ones(1))
        pb = predict_proba(model_b, np.ones(1))
        np.testing.assert_allclose(pa, pb, atol=1e-9)


def separable_toy_set(n_per_class=12, seed=0):
    """Four well-separated Gaussian blobs in 2-D, one per flair class."""
    rng = np.random.default_rng(seed)
    centers = np.array([[4.0, 0.0], [-4.0, 0.0], [0.0, 4.0], [0.0, -4.0]])
    X, labels = [], []
    for cls, center in zip(CLASS_ORDER, centers):
        X.append(center + 0.3 * rng.standard_normal((n_per_class, 2)))
        labels.extend([cls] * n_per_class)
    return np.vstack(X), labels


class TestTrain:
    def test_separable_set_reaches_high_accuracy(self):
        X, labels = separable_toy_set()
        model = train(X, labels, TrainConfig(learning_rate=0.1, l2_lambda=0.01, max_epochs=500))
        probs = predict_proba(model, X)
        predicted = [model.classes[i] for i in probs.argmax(axis=1)]
        accuracy = np.mean([p is t for p, t in zip(predicted, labels)])
        assert accuracy >= 0.95

    def test_loss_trace_decreases(self):
        X, labels = separable_toy_set()
        model = train(X, labels, TrainConfig(learning_rate=0.05, l2_lambda=0.1, max_epochs=200))
        trace = model.loss_trace
        assert trace[-1] < trace[0]

    def test_stronger_l2_shrinks_weights(self):
        X, labels = separable_toy_set()
        light = train(X, labels, TrainConfig(learning_rate=0.05, l2_lambda=0.01, max_epochs=300))
        heavy = train(X, labels, TrainConfig(learning_rate=0.05, l2_lambda=5.0, max_epochs=300))
        assert np.linalg.norm(heavy.weights[:, :-1]) < np.linalg.norm(light.weights[:, :-1])

    def test_single_class_rejected(self):
        X = np.ones((3, 2))
        labels = [FlairGroup.EXPERIENCE] * 3
        with pytest.raises(ValueError, match="two distinct"):
            train(X, labels)

    def test_labels_outside_the_four_classes_rejected(self):
        X = np.ones((2, 2))
        with pytest.raises(ValueError):
            train(X, [FlairGroup.EXPERIENCE, FlairGroup.OTHER])
        with pytest.raises(ValueError):
            train(X, [FlairGroup.EXPERIENCE, FlairGroup.UNLABELLED])

    def test_label_count_mismatch_rejected(self):
        with pytest.raises(ValueError):
            train(np.ones((3, 2)), [FlairGroup.EXPERIENCE, FlairGroup.NEWS_RESOURCES])

    @pytest.mark.filterwarnings("ignore:overflow encountered")
    def test_divergence_raises_numerical_error(self):
        X, labels = separable_toy_set()
        with pytest.raises(NumericalError, match="learning rate"):
            train(X * 100, labels, TrainConfig(learning_rate=50.0, max_epochs=200))

    def test_deterministic_from_fixed_data(self):
        X, labels = separable_toy_set()
        cfg = TrainConfig(learning_rate=0.05, max_epochs=100)
        a = train(X, labels, cfg)
        b = train(X, labels, cfg)
        assert np.array_equal(a.weights, b.weights)

    def test_class_order_is_fixed(self):
        X, labels = separable_toy_set()
        model = train(X, labels, TrainConfig(max_epochs=20))
        assert model.classes == (
            FlairGroup.MENTAL_HEALTH_SUPPORT,
            FlairGroup.DISCUSSION_QUESTIONS,
            FlairGroup.NEWS_RESOURCES,
            FlairGroup.EXPERIENCE,
        )


class TestTrainConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(Exception):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(Exception):
            TrainConfig(max_epochs=0)
        with pytest.raises(Exception):
            TrainConfig(l2_lambda=-1.0)

    def test_dict_round_trip(self):
        cfg = TrainConfig(learning_rate=0.2, l2_lambda=0.3, max_epochs=50, tol=1e-5, seed=4)
        assert TrainConfig.from_dict(cfg.to_dict()) == cfg


class TestAssembleFeatures:
    def build(self, texts, n_topics=2):
        posts = [make_post(f"p{i}", text=t) for i, t in enumerate(texts)]
        counts = dtm(np.eye(len(texts)) + 1.0)
        lda = fit_vb(counts, LdaConfig(n_topics=n_topics, seed=0, max_iters=10))
        tfidf = dtm(np.ones((len(texts), 3)), weighting=Weighting.TFIDF)
        return posts, lda, tfidf

    def test_block_layout(self):
        posts, lda, tfidf = self.build(["plain text", "see https://x.example"])
        out = assemble_features(posts, lda, tfidf, lda_width=2, tfidf_width=3)
        assert out.shape == (2, 2 + 3 + 1)
        np.testing.assert_allclose(out[:, :2], lda.doc_topic)
        np.testing.assert_allclose(out[:, 2:5], tfidf.toarray())
        assert out[0, 5] == 0.0  # no link
        assert out[1, 5] == 1.0  # hyperlink flag

    def test_width_mismatches_rejected(self):
        posts, lda, tfidf = self.build(["a", "b"])
        with pytest.raises(ValueError):
            assemble_features(posts, lda, tfidf, lda_width=5, tfidf_width=3)
        with pytest.raises(ValueError):
            assemble_features(posts, lda, tfidf, lda_width=2, tfidf_width=9)


class TestImputeFlairs:
    def confident_model(self):
        # large weights on feature 0 decide the class outright
        weights = np.zeros((4, 3))
        weights[2, 0] = 10.0  # feature 0 -> NewsResources
        weights[0, 1] = 10.0  # feature 1 -> MentalHealthSupport
        return LogRegModel(CLASS_ORDER, weights, TrainConfig(), ())

    def test_unlabelled_posts_get_argmax_class(self):
        posts = [
            make_post("a", group=FlairGroup.UNLABELLED, source=FlairSource.UNLABELLED),
            make_post("b", group=FlairGroup.UNLABELLED, source=FlairSource.UNLABELLED),
        ]
        X = np.array([[1.0, 0.0], [0.0, 1.0]])
        out = impute_flairs(posts, self.confident_model(), X)
        assert out[0].flair_group is FlairGroup.NEWS_RESOURCES
        assert out[1].flair_group is FlairGroup.MENTAL_HEALTH_SUPPORT
        assert all(p.flair_source is FlairSource.PREDICTED for p in out)

    def test_labelled_posts_pass_through_unchanged(self):
        posts = [make_post("a", group=FlairGroup.EXPERIENCE)]
        out = impute_flairs(posts, self.confident_model(), np.array([[1.0, 0.0]]))
        assert out[0] is posts[0]

    def test_row_count_mismatch_rejected(self):
        posts = [make_post("a")]
        with pytest.raises(ValueError):
            impute_flairs(posts, self.confident_model(), np.ones((2, 2)))


class TestSupportSubset:
    def test_keeps_only_support_posts(self):
        posts = [
            make_post("a", group=FlairGroup.MENTAL_HEALTH_SUPPORT),
            make_post("b", group=FlairGroup.EXPERIENCE),
            make_post(
                "c",
                group=FlairGroup.MENTAL_HEALTH_SUPPORT,
                source=FlairSource.PREDICTED,
            ),
        ]
        subset = select_support_subset(posts)
        assert [p.id for p in subset] == ["a", "c"]

    def test_pending_unlabelled_posts_block_selection(self):
        posts = [
            make_post("a", group=FlairGroup.MENTAL_HEALTH_SUPPORT),
            make_post("zz", group=FlairGroup.UNLABELLED, source=FlairSource.UNLABELLED),
        ]
        with pytest.raises(ValueError, match="zz"):
            select_support_subset(posts)


class TestSaveLoad:
    def test_round_trip(self, tmp_path):
        X, labels = separable_toy_set()
        model = train(X, labels, TrainConfig(learning_rate=0.05, max_epochs=50))
        save_logreg(model, tmp_path / "clf")
        back = load_logreg(tmp_path / "clf")
        assert np.array_equal(back.weights, model.weights)
        assert back.classes == model.classes
        assert back.train_config == model.train_config
        assert back.loss_trace == model.loss_trace


class TestEstimatorFacade:
    def test_fit_predict(self):
        X, labels = separable_toy_set()
        clf = FlairClassifier(learning_rate=0.1, l2_lambda=0.01, max_epochs=300)
        clf.fit(X, [l.value for l in labels])
        predictions = clf.predict(X)
        accuracy = np.mean([p == t.value for p, t in zip(predictions, labels)])
        assert accuracy >= 0.95
        assert list(clf.classes_) == [c.value for c in CLASS_ORDER]

    def test_predict_proba_rows_normalize(self):
        X, labels = separable_toy_set()
        clf = FlairClassifier(max_epochs=50).fit(X, labels)
        np.testing.assert_allclose(clf.predict_proba(X).sum(axis=1), 1.0, atol=1e-12)

    def test_get_params_round_trip(self):
        clf = FlairClassifier(learning_rate=0.37)
        params = clf.get_params()
        assert params["learning_rate"] == 0.37
        assert FlairClassifier(**params).get_params() == params
