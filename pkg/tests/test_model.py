import math

import numpy as np
import pytest

from readgrade import (
    DivergenceError,
    GradeLevel,
    ModelFormatError,
    TrainConfig,
    ValidationError,
    fit_standardizer,
    load_model,
    loss_and_gradient,
    predict_grade,
    predict_posterior,
    save_model,
    train,
)
from readgrade.model import GradeModel, Standardizer


def finite_difference_gradient(W, X, Y, l2, h=1e-5):
    """Central-difference gradient of the loss; the independent oracle."""
    grad = np.zeros_like(W)
    for i in range(W.shape[0]):
        for j in range(W.shape[1]):
            plus = W.copy()
            plus[i, j] += h
            minus = W.copy()
            minus[i, j] -= h
            loss_plus, _ = loss_and_gradient(plus, X, Y, l2)
            loss_minus, _ = loss_and_gradient(minus, X, Y, l2)
            grad[i, j] = (loss_plus - loss_minus) / (2 * h)
    return grad


def _onehot(labels, n_classes):
    Y = np.zeros((len(labels), n_classes))
    Y[np.arange(len(labels)), labels] = 1.0
    return Y


def _grade_mix(rng, n, classes=(7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 12.5)):
    return [GradeLevel.from_value(v) for v in rng.choice(classes, size=n)]


class TestStandardizer:
    def test_two_point_column(self):
        s = fit_standardizer(np.asarray([[1.0], [3.0]]))
        assert s.means[0] == 2.0 and s.stds[0] == 1.0
        assert s.apply([1.0]).tolist() == [-1.0]
        assert s.apply([3.0]).tolist() == [1.0]

    def test_constant_column_names_the_feature(self):
        X = np.asarray([[1.0, 5.0], [2.0, 5.0]])
        with pytest.raises(ValidationError, match="flat"):
            fit_standardizer(X, feature_names=["ok", "flat"])

    def test_zero_mean_unit_variance(self):
        rng = np.random.default_rng(2)
        X = rng.normal(loc=5.0, scale=[1.0, 10.0, 0.1], size=(40, 3))
        s = fit_standardizer(X)
        Z = np.vstack([s.apply(row) for row in X])
        assert np.allclose(Z.mean(axis=0), 0.0, atol=1e-12)
        assert np.allclose(Z.std(axis=0), 1.0, atol=1e-12)

    def test_permutation_invariant_fit(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(30, 4))
        perm = rng.permutation(30)
        a = fit_standardizer(X)
        b = fit_standardizer(X[perm])
        assert a.means.tolist() == b.means.tolist()
        assert a.stds.tolist() == b.stds.tolist()


class TestLossAndGradient:
    def test_zero_weights_two_classes_gives_log2(self):
        X = np.asarray([[0.5], [-0.5], [1.0]])
        Y = _onehot([0, 1, 0], 2)
        W = np.zeros((2, 2))
        loss, _ = loss_and_gradient(W, X, Y, 0.0)
        assert loss == pytest.approx(math.log(2.0), abs=1e-12)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(101)
        X = rng.normal(size=(12, 4))
        Y = _onehot(rng.integers(3, size=12), 3)
        for _ in range(5):
            W = rng.normal(scale=0.5, size=(3, 5))
            _, analytic = loss_and_gradient(W, X, Y, 0.01)
            numeric = finite_difference_gradient(W, X, Y, 0.01)
            denom = max(np.abs(numeric).max(), 1e-12)
            assert np.abs(analytic - numeric).max() / denom < 1e-6

    def test_penalty_excludes_bias(self):
        X = np.asarray([[1.0], [2.0]])
        Y = _onehot([0, 1], 2)
        W = np.zeros((2, 2))
        W[:, -1] = 100.0  # huge biases, but same for both classes
        loss_with_l2, _ = loss_and_gradient(W, X, Y, 10.0)
        loss_without, _ = loss_and_gradient(W, X, Y, 0.0)
        assert loss_with_l2 == pytest.approx(loss_without)

    def test_loss_decreases_under_small_steps(self):
        rng = np.random.default_rng(3)
        X = np.concatenate([rng.normal(-2.0, 0.5, 10), rng.normal(2.0, 0.5, 10)])[:, None]
        Y = _onehot([0] * 10 + [1] * 10, 2)
        W = np.zeros((2, 2))
        losses = []
        for _ in range(200):
            loss, grad = loss_and_gradient(W, X, Y, 0.0)
            losses.append(loss)
            W = W - 0.1 * grad
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


class TestTrain:
    def test_separable_data_reaches_full_accuracy(self):
        rng = np.random.default_rng(4)
        low = rng.normal(-3.0, 0.5, size=(10, 1))
        high = rng.normal(3.0, 0.5, size=(10, 1))
        X = np.vstack([low, high])
        grades = [GradeLevel.GRADE_7] * 10 + [GradeLevel.GRADE_12] * 10
        model = train(X, grades, ["nWD"], TrainConfig(epochs=500))
        correct = sum(
            predict_grade(model, {"nWD": x[0]})[1] is g for x, g in zip(X, grades)
        )
        assert correct == 20

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(30, 3))
        grades = _grade_mix(rng, 30, classes=(7.0, 9.0, 11.0))
        cfg = TrainConfig(epochs=50)
        m1 = train(X, grades, ["aWS", "aSPW", "P3T"], cfg)
        m2 = train(X, grades, ["aWS", "aSPW", "P3T"], cfg)
        assert m1.weights.tolist() == m2.weights.tolist()

    def test_row_permutation_is_bit_identical(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(40, 4))
        grades = _grade_mix(rng, 40)
        perm = rng.permutation(40)
        codes = ["aWS", "aSPW", "P3T", "nWD"]
        cfg = TrainConfig(epochs=120)
        base = train(X, grades, codes, cfg)
        shuffled = train(X[perm], [grades[i] for i in perm], codes, cfg)
        assert base.weights.tolist() == shuffled.weights.tolist()
        assert base.standardizer.means.tolist() == shuffled.standardizer.means.tolist()

    def test_seven_class_expected_grade_tracks_truth(self):
        rng = np.random.default_rng(7)
        grades = []
        rows = []
        for v in (7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 12.5):
            for _ in range(30):
                grades.append(GradeLevel.from_value(v))
                rows.append([v + rng.normal(scale=0.15), rng.normal()])
        X = np.asarray(rows)
        model = train(X, grades, ["aWS", "P3T"], TrainConfig(epochs=2000))
        errors = [
            abs(predict_grade(model, {"aWS": x[0], "P3T": x[1]})[0] - g.value)
            for x, g in zip(X, grades)
        ]
        assert sum(errors) / len(errors) < 0.5

    def test_single_class_rejected(self):
        X = np.zeros((5, 1)) + np.arange(5)[:, None]
        with pytest.raises(ValidationError):
            train(X, [GradeLevel.GRADE_7] * 5, ["nWD"])

    def test_divergence_raises(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(10, 1))
        grades = [GradeLevel.GRADE_7] * 5 + [GradeLevel.GRADE_12] * 5
        with pytest.raises(DivergenceError):
            train(X, grades, ["nWD"], TrainConfig(learning_rate=1e12, epochs=50))

    def test_loss_history_non_increasing_at_default_rate(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(50, 3))
        grades = _grade_mix(rng, 50, classes=(7.0, 9.0, 12.5))
        model = train(X, grades, ["aWS", "aSPW", "P3T"], TrainConfig(epochs=300))
        losses = model.loss_history
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


class TestPredict:
    def _zero_model(self):
        classes = tuple(sorted(GradeLevel))
        return GradeModel(
            classes=classes,
            weights=np.zeros((7, 2)),
            selected=("nWD",),
            standardizer=Standardizer(means=np.asarray([0.0]), stds=np.asarray([1.0])),
            train_config=TrainConfig(),
        )

    def test_zero_weight_model_is_uniform(self):
        posterior = predict_posterior(self._zero_model(), {"nWD": 3.0})
        for p in posterior.probs.values():
            assert p == pytest.approx(1.0 / 7.0, abs=1e-12)

    def test_probs_sum_to_one_for_random_inputs(self):
        rng = np.random.default_rng(10)
        X = rng.normal(size=(25, 2))
        grades = _grade_mix(rng, 25, classes=(7.0, 10.0, 12.5))
        model = train(X, grades, ["aWS", "nWD"], TrainConfig(epochs=100))
        for _ in range(100):
            values = {"aWS": rng.normal(scale=50), "nWD": rng.normal(scale=50)}
            posterior = predict_posterior(model, values)
            assert sum(posterior.probs.values()) == pytest.approx(1.0, abs=1e-9)
            assert all(p >= 0.0 for p in posterior.probs.values())

    def test_large_logit_saturates(self):
        model = self._zero_model()
        W = np.zeros((7, 2))
        W[3, 0] = 50.0
        saturated = GradeModel(
            classes=model.classes, weights=W, selected=model.selected,
            standardizer=model.standardizer, train_config=model.train_config,
        )
        posterior = predict_posterior(saturated, {"nWD": 1.0})
        assert posterior.probs[model.classes[3]] > 0.99

    def test_expected_grade_of_uniform_posterior(self):
        expected, argmax = predict_grade(self._zero_model(), {"nWD": 0.0})
        values = [g.value for g in sorted(GradeLevel)]
        assert expected == pytest.approx(sum(values) / 7.0)
        assert expected == pytest.approx(9.928571428571429)
        # exact tie: argmax goes to the lowest grade
        assert argmax is GradeLevel.GRADE_7

    def test_one_hot_posterior_at_top_grade(self):
        model = self._zero_model()
        W = np.zeros((7, 2))
        W[6, -1] = 60.0  # saturate the 12.5 class via its bias
        saturated = GradeModel(
            classes=model.classes, weights=W, selected=model.selected,
            standardizer=model.standardizer, train_config=model.train_config,
        )
        expected, argmax = predict_grade(saturated, {"nWD": 0.0})
        assert expected == pytest.approx(12.5, abs=1e-9)
        assert argmax is GradeLevel.GRADE_12_5

    def test_uniform_over_two_grades(self):
        classes = (GradeLevel.GRADE_7, GradeLevel.GRADE_8)
        model = GradeModel(
            classes=classes,
            weights=np.zeros((2, 2)),
            selected=("nWD",),
            standardizer=Standardizer(means=np.asarray([0.0]), stds=np.asarray([1.0])),
            train_config=TrainConfig(),
        )
        expected, argmax = predict_grade(model, {"nWD": 1.0})
        assert expected == pytest.approx(7.5, abs=1e-12)
        assert argmax is GradeLevel.GRADE_7  # tie breaks toward the lower grade

    def test_expected_grade_stays_in_class_range(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(30, 1))
        grades = _grade_mix(rng, 30, classes=(8.0, 11.0))
        model = train(X, grades, ["nWD"], TrainConfig(epochs=200))
        for _ in range(50):
            expected, _ = predict_grade(model, {"nWD": rng.normal(scale=20)})
            assert 8.0 <= expected <= 11.0

    def test_missing_feature_names_code(self):
        with pytest.raises(ValidationError, match="nWD"):
            predict_posterior(self._zero_model(), {"aWS": 1.0})


class TestSerialization:
    def _model(self):
        rng = np.random.default_rng(12)
        X = rng.normal(size=(40, 3))
        grades = _grade_mix(rng, 40)
        return train(X, grades, ["aWS", "aSPW", "P3T"], TrainConfig(epochs=150))

    def test_round_trip_predictions_bit_identical(self):
        model = self._model()
        again = load_model(save_model(model))
        rng = np.random.default_rng(13)
        for _ in range(100):
            values = {
                "aWS": rng.normal(scale=10),
                "aSPW": rng.normal(scale=10),
                "P3T": rng.normal(scale=10),
            }
            p1 = predict_posterior(model, values).probs
            p2 = predict_posterior(again, values).probs
            assert {g.label: p for g, p in p1.items()} == {
                g.label: p for g, p in p2.items()
            }

    def test_truncated_stream_is_a_parse_error(self):
        text = save_model(self._model())
        with pytest.raises(ModelFormatError):
            load_model(text[: len(text) // 2])

    def test_unknown_version_rejected(self):
        text = save_model(self._model()).replace('"version": 1', '"version": 99')
        with pytest.raises(ModelFormatError, match="version"):
            load_model(text)

    def test_wrong_format_tag_rejected(self):
        with pytest.raises(ModelFormatError):
            load_model('{"format": "something-else", "version": 1}')


class TestLogisticBeatsLinearOnSaturatingData:
    @staticmethod
    def make_saturating_corpus(seed, n_per_grade=100):
        """Dominant feature saturates while grades keep climbing."""
        rng = np.random.default_rng(seed)
        centers = {
            7.0: 0.0, 8.0: 2.2, 9.0: 3.4, 10.0: 4.0,
            11.0: 4.35, 12.0: 4.55, 12.5: 4.65,
        }
        X, grades = [], []
        for value, center in centers.items():
            for _ in range(n_per_grade):
                X.append([center + rng.normal(scale=0.02)])
                grades.append(GradeLevel.from_value(value))
        return np.asarray(X), grades

    @staticmethod
    def ols_baseline(X, y):
        Xb = np.hstack([X, np.ones((X.shape[0], 1))])
        coef, *_ = np.linalg.lstsq(Xb, y, rcond=None)
        return Xb @ coef

    def test_logistic_mae_strictly_below_linear(self):
        X, grades = self.make_saturating_corpus(seed=20)
        y = np.asarray([g.value for g in grades])
        model = train(X, grades, ["nWD"], TrainConfig(epochs=2000))
        logistic_preds = np.asarray(
            [predict_grade(model, {"nWD": x[0]})[0] for x in X]
        )
        linear_preds = self.ols_baseline(X, y)
        logistic_mae = np.abs(logistic_preds - y).mean()
        linear_mae = np.abs(linear_preds - y).mean()
        assert logistic_mae < linear_mae
