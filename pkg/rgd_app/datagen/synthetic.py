# rgd_app/datagen/synthetic.py
"""
Generadores sintéticos: el modelo de riesgo cuadrático con ruido, la
construcción de w*, la inicialización y una tarea de clasificación separable
con ruido de etiquetas.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from rgd_app.datagen.noise import NoiseSpec, noise_variance, sample_noise
from rgd_app.errors import InvalidConfigError, InvalidInputError
from rgd_app.logger_config import get_logger
from rgd_app.models import Dataset

logger = get_logger('datagen.synthetic')

# Longitud de la sucesión de la que se toman las coordenadas de w*
W_STAR_POOL = 500


@dataclass(frozen=True)
class SyntheticRisk:
    """
    Riesgo cuadrático R(w) = E(⟨w* − w, x⟩ + ε)²/2 con x ~ N(0, Σ).

    Equivale a ⟨Σw, w⟩/2 + ⟨w, u⟩ + c con u = −Σw* y c = w*ᵀΣw*/2 + Var(ε)/2.
    """

    Sigma: np.ndarray
    w_star: np.ndarray
    noise: NoiseSpec

    def __post_init__(self):
        w_star = np.asarray(self.w_star, dtype=float).ravel()
        sigma = np.asarray(self.Sigma, dtype=float)
        if sigma.shape != (w_star.shape[0], w_star.shape[0]):
            raise InvalidInputError(f"Sigma debe ser {w_star.shape[0]}×{w_star.shape[0]}, forma {sigma.shape}")
        if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-12):
            raise InvalidInputError("Sigma debe ser simétrica")
        try:
            factor = np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            raise InvalidInputError("Sigma debe ser definida positiva") from None
        eigenvalues = np.linalg.eigvalsh(sigma)
        object.__setattr__(self, 'Sigma', sigma)
        object.__setattr__(self, 'w_star', w_star)
        object.__setattr__(self, '_factor', factor)
        object.__setattr__(self, '_eigenvalues', eigenvalues)

    @classmethod
    def isotropic(cls, w_star, noise: NoiseSpec) -> 'SyntheticRisk':
        w_star = np.asarray(w_star, dtype=float).ravel()
        return cls(np.eye(w_star.shape[0]), w_star, noise)

    @property
    def d(self) -> int:
        return self.w_star.shape[0]

    @property
    def kappa(self) -> float:
        """Menor autovalor de Σ."""
        return float(self._eigenvalues[0])

    @property
    def lambda_(self) -> float:
        """Mayor autovalor de Σ."""
        return float(self._eigenvalues[-1])

    @property
    def risk_star(self) -> float:
        return 0.5 * noise_variance(self.noise)

    def excess_risk(self, w) -> float:
        delta = np.asarray(w, dtype=float) - self.w_star
        return float(0.5 * delta @ self.Sigma @ delta)

    def exact_risk(self, w) -> float:
        return self.excess_risk(w) + self.risk_star

    def exact_gradient(self, w) -> np.ndarray:
        return self.Sigma @ (np.asarray(w, dtype=float) - self.w_star)

    def gradient_variance(self, w) -> np.ndarray:
        """
        Varianza exacta de cada coordenada del gradiente de la pérdida cuadrática:
        Var_j = Σ_jj·(aᵀΣa + Var ε) + (Σa)_j² con a = w − w*.
        """
        a = np.asarray(w, dtype=float) - self.w_star
        sa = self.Sigma @ a
        return np.diag(self.Sigma) * (float(a @ sa) + noise_variance(self.noise)) + sa * sa

    def sample(self, n, rng: np.random.Generator) -> Dataset:
        """n observaciones y_i = x_iᵀw* + ε_i con entradas gaussianas."""
        if int(n) < 1:
            raise InvalidInputError("n debe ser ≥ 1")
        inputs = rng.standard_normal((int(n), self.d)) @ self._factor.T
        targets = inputs @ self.w_star + sample_noise(self.noise, int(n), rng)
        return Dataset(inputs, targets)


def w_sequence(k) -> np.ndarray:
    """w_k = π/4 + (−1)^{k−1}·(k−1)·π/8 para k = 1, 2, ..."""
    k = np.asarray(k, dtype=float)
    return math.pi / 4 + np.where(np.mod(k, 2) == 1, 1.0, -1.0) * (k - 1) * math.pi / 8


def gen_w_star(d, rng: np.random.Generator, pool=W_STAR_POOL) -> np.ndarray:
    """Coordenadas de w* tomadas de la sucesión w_k en índices uniformes de [pool]."""
    if int(d) < 1:
        raise InvalidInputError("d debe ser ≥ 1")
    indices = rng.integers(1, int(pool) + 1, size=int(d))
    return w_sequence(indices)


def signal_to_noise(w_star, spec: NoiseSpec) -> float:
    """SN = ‖w*‖² / Var(ε)."""
    variance = noise_variance(spec)
    if variance == 0:
        return math.inf
    return float(np.dot(w_star, w_star) / variance)


def gen_regression(n, d, noise: NoiseSpec, rng: np.random.Generator, w_star=None, Sigma=None):
    """
    Datos de regresión con w* oculto.

    Args:
        n, d: Tamaño muestral y dimensión (≥ 1)
        noise: Especificación de ruido
        rng: Generador con semilla (se consume: w*, entradas, ruido)
        w_star: w* fijo (por defecto gen_w_star)
        Sigma: Covarianza de las entradas (por defecto la identidad)

    Returns:
        tuple: (Dataset, SyntheticRisk)
    """
    if int(n) < 1 or int(d) < 1:
        raise InvalidInputError("n y d deben ser ≥ 1")
    if w_star is None:
        w_star = gen_w_star(d, rng)
    sigma = np.eye(int(d)) if Sigma is None else Sigma
    risk = SyntheticRisk(sigma, w_star, noise)
    logger.debug(f"SN={signal_to_noise(risk.w_star, noise):.4g} para ruido {noise.label()}")
    return risk.sample(n, rng), risk


@dataclass(frozen=True)
class InitSpec:
    """Inicialización: w* + Unif[−Δ, Δ] por coordenada, o un w0 fijo."""

    kind: str = 'uniform_box_around_star'
    delta: Optional[object] = None
    w0: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind == 'uniform_box_around_star':
            delta = np.asarray(self.delta if self.delta is not None else 2.5, dtype=float)
            if not np.all(delta > 0):
                raise InvalidConfigError("delta de inicialización debe ser positivo", field='init_delta')
            object.__setattr__(self, 'delta', delta)
        elif self.kind == 'fixed':
            if self.w0 is None:
                raise InvalidConfigError("La inicialización fija requiere w0", field='w0')
            object.__setattr__(self, 'w0', np.asarray(self.w0, dtype=float).ravel())
        else:
            raise InvalidConfigError(f"Inicialización desconocida: '{self.kind}'", field='init')

    @classmethod
    def uniform_box(cls, delta) -> 'InitSpec':
        return cls('uniform_box_around_star', delta)

    @classmethod
    def fixed(cls, w0) -> 'InitSpec':
        return cls('fixed', w0=w0)

    def draw(self, w_star, rng: np.random.Generator) -> np.ndarray:
        w_star = np.asarray(w_star, dtype=float)
        if self.kind == 'fixed':
            return self.w0.copy()
        return w_star + rng.uniform(-1.0, 1.0, size=w_star.shape) * self.delta


def random_spd(d, rng: np.random.Generator, condition=10.0) -> np.ndarray:
    """Matriz SPD aleatoria con autovalores equiespaciados en [1, condition]."""
    q, _ = np.linalg.qr(rng.standard_normal((int(d), int(d))))
    eigenvalues = np.linspace(1.0, float(condition), int(d))
    matrix = (q * eigenvalues) @ q.T
    return 0.5 * (matrix + matrix.T)


def gen_classification(n, n_features, n_classes, rng: np.random.Generator,
                       label_noise=0.1, spread=0.1) -> Dataset:
    """
    Tarea multiclase separable con ruido: prototipos uniformes en [0,1]^F,
    entradas alrededor del prototipo de su clase recortadas a [0,1] y una
    fracción label_noise de etiquetas reasignadas al azar. La última
    característica es constante 1 (término independiente).
    """
    if int(n_features) < 2:
        raise InvalidInputError("gen_classification requiere n_features ≥ 2")
    if not 0.0 <= float(label_noise) < 1.0:
        raise InvalidInputError("label_noise debe estar en [0, 1)")
    free = int(n_features) - 1
    prototypes = rng.uniform(0.0, 1.0, size=(int(n_classes), free))
    labels = rng.integers(int(n_classes), size=int(n))
    inputs = np.clip(prototypes[labels] + spread * rng.standard_normal((int(n), free)), 0.0, 1.0)
    flip = rng.uniform(size=int(n)) < float(label_noise)
    labels = np.where(flip, rng.integers(int(n_classes), size=int(n)), labels)
    inputs = np.hstack([inputs, np.ones((int(n), 1))])
    return Dataset(inputs, labels, int(n_classes))
