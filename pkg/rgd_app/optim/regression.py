# rgd_app/optim/regression.py
"""
Estimadores de referencia para regresión lineal: mínimos cuadrados, mínimas
desviaciones absolutas y la agregación por mediana geométrica de soluciones
OLS por partición.
"""

from typing import Optional

import numpy as np
from scipy import optimize

from rgd_app.errors import InvalidInputError
from rgd_app.logger_config import get_logger
from rgd_app.models import Dataset, least_squares_weights
from rgd_app.optim.median import block_bounds, geometric_median, partition_count

logger = get_logger('optim.regression')


def ols_fit(dataset: Dataset) -> np.ndarray:
    return least_squares_weights(dataset)


def lad_fit(dataset: Dataset) -> np.ndarray:
    """
    Minimiza Σ|⟨w, x_i⟩ − y_i| como programa lineal.

    Variables (w, u) con u_i ≥ |⟨w, x_i⟩ − y_i|; se minimiza Σu_i.

    Args:
        dataset: Datos de regresión

    Returns:
        np.ndarray: Pesos LAD
    """
    x, y = dataset.inputs, dataset.targets
    n, d = x.shape
    cost = np.concatenate([np.zeros(d), np.ones(n)])
    identity = np.eye(n)
    a_ub = np.block([[x, -identity], [-x, -identity]])
    b_ub = np.concatenate([y, -y])
    bounds = [(None, None)] * d + [(0, None)] * n
    result = optimize.linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method='highs')
    if not result.success:
        raise InvalidInputError(f"LAD no resuelto: {result.message}")
    return result.x[:d]


def minsker_fit(dataset: Dataset, partitions: Optional[int] = None) -> np.ndarray:
    """Soluciones OLS por bloque agregadas con la mediana geométrica."""
    k = partitions or partition_count(dataset.n, dataset.n_features)
    estimates = [least_squares_weights(dataset.subset(np.arange(a, b)))
                 for a, b in block_bounds(dataset.n, k)]
    logger.debug(f"minsker: {k} particiones")
    return geometric_median(np.vstack(estimates))
