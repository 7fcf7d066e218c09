# rgd_app/models.py
"""
Modelos de pérdida diferenciables: regresión lineal con pérdida cuadrática y
regresión logística multiclase con regularización ℓ2. Cada modelo entrega la
pérdida y el gradiente por observación que alimentan a GradientSample.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import logsumexp, softmax

from rgd_app.errors import InvalidInputError
from rgd_app.robust_grad import GradientSample


@dataclass(frozen=True)
class Dataset:
    """
    Conjunto de datos etiquetado.

    Args:
        inputs: Matriz n×F de entradas
        targets: n etiquetas (reales en regresión, índice de clase en clasificación)
        n_classes: Número de clases (None para regresión)
    """

    inputs: np.ndarray
    targets: np.ndarray
    n_classes: Optional[int] = None

    def __post_init__(self):
        x = np.asarray(self.inputs, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        y = np.asarray(self.targets).ravel()
        if x.ndim != 2 or x.shape[0] < 1:
            raise InvalidInputError(f"inputs debe ser una matriz n×F no vacía, forma {x.shape}")
        if y.shape[0] != x.shape[0]:
            raise InvalidInputError(f"inputs tiene {x.shape[0]} filas y targets {y.shape[0]} valores")
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("inputs contiene valores no finitos")
        if self.n_classes is None:
            y = y.astype(float)
            if not np.all(np.isfinite(y)):
                raise InvalidInputError("targets contiene valores no finitos")
        else:
            if int(self.n_classes) < 2:
                raise InvalidInputError("n_classes debe ser ≥ 2")
            y = y.astype(int)
            if y.min() < 0 or y.max() >= int(self.n_classes):
                raise InvalidInputError(f"Índices de clase fuera de [0, {self.n_classes})")
        object.__setattr__(self, 'inputs', x)
        object.__setattr__(self, 'targets', y)

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def n_features(self) -> int:
        return self.inputs.shape[1]

    def subset(self, indices) -> 'Dataset':
        """Devuelve las filas indicadas como un nuevo Dataset."""
        idx = np.asarray(indices, dtype=int)
        return Dataset(self.inputs[idx], self.targets[idx], self.n_classes)


def _check_features(dataset: Dataset, n_features: int):
    if dataset.n_features != n_features:
        raise InvalidInputError(
            f"El modelo espera {n_features} características y el conjunto tiene {dataset.n_features}")


@dataclass(frozen=True)
class LinearModel:
    """Regresión lineal con pérdida l(w; z) = (⟨w, x⟩ − y)²/2."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if not np.all(np.isfinite(w)):
            raise InvalidInputError("weights contiene valores no finitos")
        object.__setattr__(self, 'weights', w)

    @property
    def d(self) -> int:
        return self.weights.shape[0]

    def with_weights(self, weights) -> 'LinearModel':
        return replace(self, weights=weights)

    def predict(self, dataset: Dataset) -> np.ndarray:
        _check_features(dataset, self.d)
        return dataset.inputs @ self.weights

    def loss_and_grad_rows(self, dataset: Dataset):
        residuals = self.predict(dataset) - dataset.targets
        losses = 0.5 * residuals ** 2
        return losses, GradientSample(residuals[:, None] * dataset.inputs)

    def empirical_risk(self, dataset: Dataset) -> float:
        residuals = self.predict(dataset) - dataset.targets
        return float(0.5 * np.mean(residuals ** 2))


@dataclass(frozen=True)
class LogisticModel:
    """
    Regresión logística multiclase con C−1 vectores de pesos frente a una clase
    de referencia (la última) con puntuación cero. Los pesos se guardan aplanados
    (d = (C−1)·F) y la pérdida de cada observación incluye a·‖w‖².
    """

    n_classes: int
    n_features: int
    weights: np.ndarray
    reg: float = 0.0

    def __post_init__(self):
        if int(self.n_classes) < 2 or int(self.n_features) < 1:
            raise InvalidInputError("LogisticModel requiere C ≥ 2 y F ≥ 1")
        if float(self.reg) < 0:
            raise InvalidInputError(f"reg debe ser ≥ 0, recibido {self.reg}")
        w = np.asarray(self.weights, dtype=float).ravel()
        expected = (int(self.n_classes) - 1) * int(self.n_features)
        if w.shape[0] != expected:
            raise InvalidInputError(f"Se esperaban {expected} pesos, recibidos {w.shape[0]}")
        if not np.all(np.isfinite(w)):
            raise InvalidInputError("weights contiene valores no finitos")
        object.__setattr__(self, 'weights', w)

    @classmethod
    def zero(cls, n_classes, n_features, reg=0.0) -> 'LogisticModel':
        return cls(n_classes, n_features, np.zeros((n_classes - 1) * n_features), reg)

    @classmethod
    def random_init(cls, n_classes, n_features, rng, reg=0.0, width=0.05) -> 'LogisticModel':
        """Pesos iniciales Unif[−width, width] a partir de un generador con semilla."""
        w = rng.uniform(-width, width, size=(n_classes - 1) * n_features)
        return cls(n_classes, n_features, w, reg)

    @property
    def d(self) -> int:
        return self.weights.shape[0]

    def with_weights(self, weights) -> 'LogisticModel':
        return replace(self, weights=weights)

    def _matrix(self) -> np.ndarray:
        return self.weights.reshape(self.n_classes - 1, self.n_features)

    def scores(self, dataset: Dataset) -> np.ndarray:
        """Puntuaciones n×C; la columna de la clase de referencia es cero."""
        _check_features(dataset, self.n_features)
        free = dataset.inputs @ self._matrix().T
        return np.hstack([free, np.zeros((dataset.n, 1))])

    def predict(self, dataset: Dataset) -> np.ndarray:
        # np.argmax devuelve el primer índice en caso de empate
        return np.argmax(self.scores(dataset), axis=1)

    def _check_labels(self, dataset: Dataset):
        if dataset.n_classes is not None and dataset.n_classes != self.n_classes:
            raise InvalidInputError(
                f"El modelo tiene {self.n_classes} clases y el conjunto {dataset.n_classes}")
        labels = np.asarray(dataset.targets, dtype=int)
        if labels.min() < 0 or labels.max() >= self.n_classes:
            raise InvalidInputError("Etiquetas fuera del rango de clases del modelo")
        return labels

    def loss_and_grad_rows(self, dataset: Dataset):
        labels = self._check_labels(dataset)
        scores = self.scores(dataset)
        penalty = float(self.reg) * float(self.weights @ self.weights)
        losses = logsumexp(scores, axis=1) - scores[np.arange(dataset.n), labels] + penalty

        residual = softmax(scores, axis=1)[:, :-1]
        free = labels < self.n_classes - 1
        residual[np.flatnonzero(free), labels[free]] -= 1.0
        rows = (residual[:, :, None] * dataset.inputs[:, None, :]).reshape(dataset.n, self.d)
        rows += 2.0 * float(self.reg) * self.weights
        return losses, GradientSample(rows)

    def empirical_risk(self, dataset: Dataset) -> float:
        losses, _ = self.loss_and_grad_rows(dataset)
        return float(np.mean(losses))


def loss_and_grad_rows(model, dataset: Dataset):
    """
    Pérdidas y gradientes por observación.

    Args:
        model: LinearModel o LogisticModel
        dataset: Conjunto con dimensiones compatibles

    Returns:
        tuple: (vector de n pérdidas, GradientSample n×d)
    """
    return model.loss_and_grad_rows(dataset)


def predict(model, dataset: Dataset) -> np.ndarray:
    return model.predict(dataset)


def misclassification_rate(model: LogisticModel, dataset: Dataset) -> float:
    """Fracción de observaciones cuya clase predicha difiere de la etiqueta."""
    labels = model._check_labels(dataset)
    return float(np.mean(model.predict(dataset) != labels))


def least_squares_weights(dataset: Dataset) -> np.ndarray:
    """Minimizador del riesgo empírico cuadrático (mínimos cuadrados)."""
    solution, *_ = np.linalg.lstsq(dataset.inputs, dataset.targets, rcond=None)
    return solution
