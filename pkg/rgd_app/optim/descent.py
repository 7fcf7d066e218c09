# rgd_app/optim/descent.py
"""
Bucles de descenso: RGD (gradiente robusto por coordenadas) y las referencias
ERM-GD, oráculo, re-ponderación, SGD y SVRG.
"""

from typing import Callable, Optional

import numpy as np

from rgd_app.errors import InvalidConfigError, NonFiniteError
from rgd_app.logger_config import get_logger
from rgd_app.mest import RhoFunction
from rgd_app.models import Dataset, loss_and_grad_rows
from rgd_app.optim.state import (
    STATUS_BUDGET,
    STATUS_COMPLETED,
    STATUS_CONVERGED,
    STATUS_DIVERGED,
    Constraint,
    OptimState,
    StoppingRule,
    Trajectory,
)
from rgd_app.robust_grad import RobustConfig, RobustGradientEstimator

logger = get_logger('optim.descent')


def _descend(direction: Callable, cost: int, state0: OptimState, constraint: Optional[Constraint],
             stop: StoppingRule, trajectory: Trajectory, name: str) -> Trajectory:
    """
    Bucle común ŵ_(t+1) = π_W(ŵ_(t) − α·ĝ(ŵ_(t))).

    Args:
        direction: Función w -> ĝ(w)
        cost: Evaluaciones de gradiente por fila cargadas en cada paso
        state0: Estado inicial
        constraint: Conjunto factible (None = sin restricción)
        stop: Regla de parada
        trajectory: Trayectoria vacía donde registrar los estados
        name: Nombre del método para los mensajes

    Returns:
        Trajectory: Estados registrados y estado final de la ejecución
    """
    constraint = constraint or Constraint.unconstrained()
    state = state0
    trajectory.record(state)

    with np.errstate(over='ignore', invalid='ignore'):
        for _ in range(int(stop.max_iters)):
            if not stop.affordable(state.grad_evals, cost):
                return trajectory.finish(STATUS_BUDGET)

            try:
                gradient = direction(state.w)
            except NonFiniteError:
                gradient = np.full(state.w.shape, np.nan)
            if not np.all(np.isfinite(gradient)):
                message = f"{name}: gradiente no finito en t={state.t}"
                logger.warning(message)
                return trajectory.finish(STATUS_DIVERGED, message)
            if stop.gradient_small(gradient):
                return trajectory.finish(STATUS_CONVERGED)

            w = constraint.project(state.w - state.alpha * gradient)
            if not np.all(np.isfinite(w)):
                message = f"{name}: iterado no finito en t={state.t + 1}"
                logger.warning(message)
                return trajectory.finish(STATUS_DIVERGED, message)

            state = state.advance(w, cost)
            trajectory.record(state)

    return trajectory.finish(STATUS_COMPLETED)


def _new_trajectory(record_every, checkpoint_evals):
    return Trajectory(record_every=record_every, checkpoint_evals=checkpoint_evals)


def rgd_run(model, dataset: Dataset, cfg: RobustConfig, state0: OptimState,
            constraint: Optional[Constraint] = None, stop: Optional[StoppingRule] = None,
            rng: Optional[np.random.Generator] = None, variance_fn: Optional[Callable] = None,
            record_every: int = 1, checkpoint_evals: Optional[int] = None) -> Trajectory:
    """
    Descenso de gradiente robusto.

    En cada paso calcula los gradientes por observación (sobre un mini-lote si
    cfg.batch_size está definido), los agrega con RobustGradientEstimator según
    la variante configurada y actualiza el iterado.

    Args:
        model: LinearModel o LogisticModel (sus pesos se ignoran; se usa state0.w)
        dataset: Datos de entrenamiento
        cfg: Configuración robusta
        state0: Estado inicial
        constraint: Restricción opcional (descenso proyectado)
        stop: Regla de parada (por defecto 100 iteraciones)
        rng: Generador para mini-lotes y subconjuntos de coordenadas
        variance_fn: w -> varianzas por coordenada (variante con varianza conocida)
        record_every: Cadencia de registro de iterados
        checkpoint_evals: Registrar al cruzar múltiplos de este número de evaluaciones

    Returns:
        Trajectory: con diagnósticos de respaldo de los puntos fijos
    """
    stop = stop or StoppingRule(max_iters=100)
    rng = rng if rng is not None else np.random.default_rng(0)
    estimator = RobustGradientEstimator(cfg, state0.w.shape[0], rng=rng)

    batch = cfg.batch_size
    if batch is not None and int(batch) > dataset.n:
        raise InvalidConfigError(f"batch_size={batch} supera n={dataset.n}", field='batch_size')
    cost = int(batch) if batch is not None else dataset.n

    def direction(w):
        data = dataset if batch is None else dataset.subset(rng.choice(dataset.n, size=int(batch), replace=False))
        if variance_fn is not None:
            estimator.set_known_variance(variance_fn(w))
        _, rows = loss_and_grad_rows(model.with_weights(w), data)
        return estimator.estimate(rows)

    trajectory = _descend(direction, cost, state0, constraint, stop,
                          _new_trajectory(record_every, checkpoint_evals), 'rgd')
    trajectory.diagnostics.update(estimator.diagnostics.summary())
    if estimator.diagnostics.location_fallbacks.any():
        logger.debug(f"rgd: {trajectory.diagnostics['location_fallbacks']} columnas resueltas por Brent")
    if estimator.diagnostics.unconverged:
        logger.debug(f"rgd: {estimator.diagnostics.unconverged} estimaciones fuera de tolerancia")
    return trajectory


def erm_gd_run(model, dataset: Dataset, state0: OptimState, constraint: Optional[Constraint] = None,
               stop: Optional[StoppingRule] = None, record_every: int = 1,
               checkpoint_evals: Optional[int] = None) -> Trajectory:
    """Descenso sobre el riesgo empírico: ĝ(w) = media de los gradientes por fila."""
    stop = stop or StoppingRule(max_iters=100)

    def direction(w):
        _, rows = loss_and_grad_rows(model.with_weights(w), dataset)
        return rows.column_means()

    return _descend(direction, dataset.n, state0, constraint, stop,
                    _new_trajectory(record_every, checkpoint_evals), 'erm')


def oracle_gd_run(risk, state0: OptimState, constraint: Optional[Constraint] = None,
                  stop: Optional[StoppingRule] = None, record_every: int = 1) -> Trajectory:
    """Descenso ideal con el gradiente exacto del riesgo (SyntheticRisk.exact_gradient)."""
    stop = stop or StoppingRule(max_iters=100)
    return _descend(risk.exact_gradient, 0, state0, constraint, stop,
                    _new_trajectory(record_every, None), 'oracle')


def reweighting_weights(residuals, rho: RhoFunction) -> np.ndarray:
    """
    Pesos ω_i ∝ ψ(r_i)/r_i normalizados a suma uno (ψ'(0) cuando r_i = 0).

    Args:
        residuals: Residuos r_i = ⟨w, x_i⟩ − y_i
        rho: Función ρ que aporta ψ

    Returns:
        np.ndarray: Pesos en [0, 1] que suman uno
    """
    r = np.asarray(residuals, dtype=float)
    zero = r == 0.0
    safe = np.where(zero, 1.0, r)
    raw = np.where(zero, rho.psi_prime(0.0), rho.psi(safe) / safe)
    return raw / raw.sum()


def reweighted_gd_run(model, dataset: Dataset, state0: OptimState, rho: Optional[RhoFunction] = None,
                      constraint: Optional[Constraint] = None, stop: Optional[StoppingRule] = None,
                      record_every: int = 1) -> Trajectory:
    """
    Descenso con observaciones re-ponderadas por ψ(r)/r sobre los residuos de
    un modelo lineal; sustituye los pesos 1/n de ERM-GD.
    """
    rho = rho or RhoFunction('gudermannian')
    stop = stop or StoppingRule(max_iters=100)

    def direction(w):
        current = model.with_weights(w)
        residuals = current.predict(dataset) - dataset.targets
        _, rows = loss_and_grad_rows(current, dataset)
        return rows.rows.T @ reweighting_weights(residuals, rho)

    return _descend(direction, dataset.n, state0, constraint, stop,
                    _new_trajectory(record_every, None), 'reweighted')


def sgd_run(model, dataset: Dataset, state0: OptimState, rng: np.random.Generator,
            constraint: Optional[Constraint] = None, stop: Optional[StoppingRule] = None,
            record_every: int = 1, checkpoint_evals: Optional[int] = None) -> Trajectory:
    """SGD con una fila uniforme por paso (mini-lotes de tamaño 1)."""
    stop = stop or StoppingRule(max_iters=100)

    def direction(w):
        row = dataset.subset([int(rng.integers(dataset.n))])
        _, rows = loss_and_grad_rows(model.with_weights(w), row)
        return rows.rows[0]

    return _descend(direction, 1, state0, constraint, stop,
                    _new_trajectory(record_every, checkpoint_evals), 'sgd')


def svrg_corrected_gradient(model, row: Dataset, w, w_snapshot, full_gradient) -> np.ndarray:
    """Gradiente corregido l'_i(w) − l'_i(w̃) + ĝ(w̃) para una fila."""
    _, current = loss_and_grad_rows(model.with_weights(w), row)
    _, anchor = loss_and_grad_rows(model.with_weights(w_snapshot), row)
    return current.rows[0] - anchor.rows[0] + full_gradient


def svrg_run(model, dataset: Dataset, state0: OptimState, rng: np.random.Generator,
             constraint: Optional[Constraint] = None, stop: Optional[StoppingRule] = None,
             record_every: int = 1, checkpoint_evals: Optional[int] = None) -> Trajectory:
    """
    SVRG: en cada época toma una instantánea con el gradiente completo (n
    evaluaciones) y realiza ⌊n/2⌋ pasos de una fila con gradiente corregido
    (1 evaluación cada uno). Se repite hasta agotar el presupuesto o max_iters
    actualizaciones; la época continúa desde el último iterado interno. Si el
    presupuesto restante no alcanza otra instantánea, se gasta en pasos
    corregidos con la última.
    """
    stop = stop or StoppingRule(max_iters=100)
    constraint = constraint or Constraint.unconstrained()
    trajectory = _new_trajectory(record_every, checkpoint_evals)
    inner = max(dataset.n // 2, 1)
    state = state0
    snapshot = None
    trajectory.record(state)

    with np.errstate(over='ignore', invalid='ignore'):
        while state.t < int(stop.max_iters):
            if stop.affordable(state.grad_evals, dataset.n + 1):
                snapshot = state.w.copy()
                try:
                    _, rows = loss_and_grad_rows(model.with_weights(snapshot), dataset)
                except NonFiniteError:
                    message = f"svrg: gradiente completo no finito en t={state.t}"
                    logger.warning(message)
                    return trajectory.finish(STATUS_DIVERGED, message)
                full_gradient = rows.column_means()
                if stop.gradient_small(full_gradient):
                    return trajectory.finish(STATUS_CONVERGED)
                # la instantánea cuenta como evaluaciones sin actualizar el iterado
                state = OptimState(state.w, state.alpha, state.t, state.grad_evals + dataset.n)
            elif snapshot is None or not stop.affordable(state.grad_evals, 1):
                return trajectory.finish(STATUS_BUDGET)

            for _ in range(inner):
                if state.t >= int(stop.max_iters):
                    break
                if not stop.affordable(state.grad_evals, 1):
                    return trajectory.finish(STATUS_BUDGET)
                row = dataset.subset([int(rng.integers(dataset.n))])
                try:
                    gradient = svrg_corrected_gradient(model, row, state.w, snapshot, full_gradient)
                except NonFiniteError:
                    gradient = np.full(state.w.shape, np.nan)
                w = constraint.project(state.w - state.alpha * gradient)
                if not np.all(np.isfinite(w)):
                    message = f"svrg: iterado no finito en t={state.t + 1}"
                    logger.warning(message)
                    return trajectory.finish(STATUS_DIVERGED, message)
                state = state.advance(w, 1)
                trajectory.record(state)

    return trajectory.finish(STATUS_COMPLETED)
