# tests/test_models.py
import numpy as np
import pytest

from rgd_app.errors import InvalidInputError
from rgd_app.models import (
    Dataset,
    LinearModel,
    LogisticModel,
    least_squares_weights,
    loss_and_grad_rows,
    misclassification_rate,
    predict,
)


def _finite_difference(risk, w, h=1e-6):
    grad = np.zeros_like(w)
    for k in range(w.size):
        step = np.zeros_like(w)
        step[k] = h
        grad[k] = (risk(w + step) - risk(w - step)) / (2 * h)
    return grad


def _relative_error(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-12))


def test_dataset_validation():
    with pytest.raises(InvalidInputError):
        Dataset(np.ones((3, 2)), np.ones(4))
    with pytest.raises(InvalidInputError):
        Dataset(np.array([[np.nan]]), np.ones(1))
    with pytest.raises(InvalidInputError):
        Dataset(np.ones((2, 2)), [0, 3], n_classes=3)
    data = Dataset(np.arange(6.0).reshape(3, 2), [0, 1, 2], n_classes=3)
    sub = data.subset([2, 0])
    assert sub.n == 2 and sub.n_features == 2
    assert list(sub.targets) == [2, 0]


def test_linear_gradient_finite_difference(rng):
    x = rng.normal(size=(50, 4))
    data = Dataset(x, x @ np.array([1.0, -2.0, 0.5, 3.0]) + rng.normal(size=50))
    for _ in range(10):
        w = rng.normal(size=4)
        model = LinearModel(w)
        _, rows = loss_and_grad_rows(model, data)
        numeric = _finite_difference(lambda v: model.with_weights(v).empirical_risk(data), w)
        assert _relative_error(rows.column_means(), numeric) < 1e-5


def test_linear_losses_are_half_squared_residuals():
    data = Dataset(np.array([[1.0, 0.0], [0.0, 2.0]]), np.array([1.0, 1.0]))
    losses, rows = LinearModel([2.0, 1.0]).loss_and_grad_rows(data)
    assert np.allclose(losses, [0.5, 0.5])
    assert np.allclose(rows.rows, [[1.0, 0.0], [0.0, 2.0]])


def test_logistic_gradient_finite_difference(rng):
    n_classes, n_features = 3, 4
    x = rng.uniform(size=(40, n_features))
    data = Dataset(x, rng.integers(n_classes, size=40), n_classes)
    for _ in range(10):
        model = LogisticModel.random_init(n_classes, n_features, rng, reg=0.01, width=1.0)
        _, rows = model.loss_and_grad_rows(data)
        numeric = _finite_difference(lambda v: model.with_weights(v).empirical_risk(data), model.weights)
        assert _relative_error(rows.column_means(), numeric) < 1e-5


def test_logistic_reference_class_rows():
    # observaciones de la última clase: el residuo es softmax sin restar 1
    data = Dataset(np.array([[1.0, 2.0]]), [2], n_classes=3)
    model = LogisticModel.zero(3, 2)
    losses, rows = model.loss_and_grad_rows(data)
    assert losses[0] == pytest.approx(np.log(3.0))
    assert np.allclose(rows.rows[0], np.array([1.0, 2.0, 1.0, 2.0]) / 3.0)


def test_logistic_penalty_in_loss():
    data = Dataset(np.zeros((2, 2)), [0, 1], n_classes=2)
    model = LogisticModel(2, 2, np.array([1.0, 2.0]), reg=0.1)
    losses, rows = model.loss_and_grad_rows(data)
    assert np.allclose(losses, np.log(2.0) + 0.1 * 5.0)
    assert np.allclose(rows.rows, 0.2 * np.array([1.0, 2.0]))


def test_zero_weights_predict_first_class(rng):
    data = Dataset(rng.uniform(size=(10, 3)), rng.integers(3, size=10), 3)
    model = LogisticModel.zero(3, 3)
    assert np.all(predict(model, data) == 0)
    assert misclassification_rate(model, data) == pytest.approx(np.mean(data.targets != 0))


def test_random_init_range(rng):
    model = LogisticModel.random_init(4, 5, rng)
    assert model.d == 15
    assert np.all(np.abs(model.weights) <= 0.05)


def test_logistic_shape_errors():
    with pytest.raises(InvalidInputError):
        LogisticModel(3, 2, np.zeros(5))
    with pytest.raises(InvalidInputError):
        LogisticModel.zero(3, 2).loss_and_grad_rows(Dataset(np.ones((1, 3)), [0], 3))
    with pytest.raises(InvalidInputError):
        LinearModel([np.inf])


def test_least_squares_minimizes_empirical_risk(regression_problem):
    data, _ = regression_problem
    w = least_squares_weights(data)
    _, rows = LinearModel(w).loss_and_grad_rows(data)
    assert np.allclose(rows.column_means(), 0.0, atol=1e-10)


def test_empirical_risks_are_convex_along_segments(rng):
    x = rng.normal(size=(50, 3))
    linear = Dataset(x, x @ np.array([1.0, -2.0, 0.5]) + rng.normal(size=50))
    labels = Dataset(x, rng.integers(3, size=50), 3)
    for _ in range(10):
        a, b = rng.normal(size=3) * 3, rng.normal(size=3) * 3
        risk = LinearModel(a).with_weights
        assert risk((a + b) / 2).empirical_risk(linear) <= (
            0.5 * (risk(a).empirical_risk(linear) + risk(b).empirical_risk(linear)) + 1e-12)
        u, v = rng.normal(size=6), rng.normal(size=6)
        model = LogisticModel.zero(3, 3, reg=0.05)
        mid = model.with_weights((u + v) / 2).empirical_risk(labels)
        ends = 0.5 * (model.with_weights(u).empirical_risk(labels) + model.with_weights(v).empirical_risk(labels))
        assert mid <= ends + 1e-12


def test_regularizer_difference_is_penalty(rng):
    x = rng.uniform(size=(30, 4))
    data = Dataset(x, rng.integers(3, size=30), 3)
    w = rng.normal(size=8)
    plain = LogisticModel(3, 4, w, reg=0.0)
    penalized = LogisticModel(3, 4, w, reg=0.3)
    assert penalized.empirical_risk(data) - plain.empirical_risk(data) == pytest.approx(0.3 * float(w @ w))
    _, plain_rows = plain.loss_and_grad_rows(data)
    _, penalized_rows = penalized.loss_and_grad_rows(data)
    assert np.allclose(penalized_rows.column_means() - plain_rows.column_means(), 0.6 * w)
