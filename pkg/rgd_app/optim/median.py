# rgd_app/optim/median.py
"""
Mediana geométrica (Weiszfeld con el ajuste de Vardi-Zhang) y el descenso
median-of-means que agrega gradientes medios por bloque.
"""

from typing import Optional

import numpy as np

from rgd_app.errors import InvalidConfigError, InvalidInputError
from rgd_app.models import Dataset, loss_and_grad_rows
from rgd_app.optim.descent import _descend, _new_trajectory
from rgd_app.optim.state import Constraint, OptimState, StoppingRule, Trajectory

# Distancia por debajo de la cual el iterado coincide con un punto
COINCIDENCE_TOL = 1e-10


def geometric_median_objective(points, m) -> float:
    """Σ_i ‖m − p_i‖."""
    return float(np.sum(np.linalg.norm(np.asarray(points, dtype=float) - m, axis=1)))


def _optimal_vertex(x):
    """Devuelve el punto de datos que cumple la condición de optimalidad, si existe."""
    diff = x[None, :, :] - x[:, None, :]
    distances = np.linalg.norm(diff, axis=2)
    coincident = distances <= COINCIDENCE_TOL
    with np.errstate(divide='ignore', invalid='ignore'):
        unit = np.where(coincident[:, :, None], 0.0, diff / distances[:, :, None])
    pull = np.linalg.norm(unit.sum(axis=1), axis=1)
    optimal = np.flatnonzero(pull <= coincident.sum(axis=1))
    return x[optimal[0]].copy() if optimal.size else None


def geometric_median(points, tol=1e-10, max_iters=1000) -> np.ndarray:
    """
    Mediana geométrica en norma ℓ2.

    Parte del centroide y aplica la iteración de Weiszfeld. Cuando el iterado
    coincide con uno o varios puntos se usa el paso ajustado de Vardi-Zhang,
    que excluye esos puntos de la media ponderada.

    Args:
        points: Matriz k×d (k ≥ 1)
        tol: Tolerancia relativa sobre el desplazamiento entre iterados
        max_iters: Número máximo de iteraciones

    Returns:
        np.ndarray: Vector m de dimensión d
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1:
        raise InvalidInputError("geometric_median requiere al menos un punto")
    if x.shape[0] == 1:
        return x[0].copy()

    vertex = _optimal_vertex(x)
    if vertex is not None:
        return vertex

    y = x.mean(axis=0)
    for _ in range(int(max_iters)):
        distances = np.linalg.norm(x - y, axis=1)
        coincident = distances <= COINCIDENCE_TOL
        free = ~coincident
        if not free.any():
            return y

        inverse = 1.0 / distances[free]
        target = (inverse[:, None] * x[free]).sum(axis=0) / inverse.sum()

        multiplicity = int(coincident.sum())
        if multiplicity:
            pull = ((x[free] - y) * inverse[:, None]).sum(axis=0)
            r = float(np.linalg.norm(pull))
            if r <= multiplicity:
                # el punto coincidente es óptimo
                return y
            gamma = multiplicity / r
            new = (1.0 - gamma) * target + gamma * y
        else:
            new = target

        step = float(np.linalg.norm(new - y))
        y = new
        if step <= tol * (1.0 + float(np.linalg.norm(y))):
            break
    return y


def partition_count(n: int, d: int) -> int:
    """Número de particiones max(2, ⌊n/(2d)⌋)."""
    return max(2, int(n) // (2 * int(d)))


def block_bounds(n: int, partitions: int):
    """Límites de bloques iguales; las filas sobrantes van al último bloque."""
    if int(partitions) < 2:
        raise InvalidConfigError(f"partitions debe ser ≥ 2, recibido {partitions}", field='partitions')
    if int(n) < int(partitions):
        raise InvalidConfigError(f"n={n} es menor que partitions={partitions}", field='partitions')
    size = int(n) // int(partitions)
    starts = [k * size for k in range(int(partitions))]
    ends = starts[1:] + [int(n)]
    return list(zip(starts, ends))


def block_means(rows, partitions: int) -> np.ndarray:
    """Medias por bloque de una matriz n×d."""
    matrix = np.asarray(rows, dtype=float)
    return np.vstack([matrix[a:b].mean(axis=0) for a, b in block_bounds(matrix.shape[0], partitions)])


def median_of_means_gd_run(model, dataset: Dataset, partitions: int, state0: OptimState,
                           constraint: Optional[Constraint] = None, stop: Optional[StoppingRule] = None,
                           record_every: int = 1) -> Trajectory:
    """
    Descenso con gradiente median-of-means: media por bloque y agregación por
    mediana geométrica.
    """
    block_bounds(dataset.n, partitions)
    stop = stop or StoppingRule(max_iters=100)

    def direction(w):
        _, rows = loss_and_grad_rows(model.with_weights(w), dataset)
        return geometric_median(block_means(rows.rows, partitions))

    return _descend(direction, dataset.n, state0, constraint, stop,
                    _new_trajectory(record_every, None), 'mom_gd')
