# rgd_app/bench/experiment.py
"""
Orquestación de experimentos: ensayos independientes con semilla, métricas por
iteración y agregación en tablas largas.

Reglas de semillas:
- semilla del ensayo = semilla base + índice del ensayo
- datos de una condición: default_rng([semilla_ensayo, crc32(clave_de_datos)])
- aleatoriedad interna de un método: default_rng([semilla_ensayo, crc32(método|condición)])
Todos los métodos de un ensayo comparten datos e iterado inicial.
"""

import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np
import pandas as pd

from rgd_app.bench.concentration import noise_concentration_check
from rgd_app.bench.config_loader import ExperimentConfig
from rgd_app.bench.metrics import aggregate, excess_rmse, results_frame, select_top_settings
from rgd_app.datagen import InitSpec, gen_classification, gen_regression
from rgd_app.errors import InvalidConfigError, InvalidInputError
from rgd_app.logger_config import get_logger
from rgd_app.mest import RhoFunction
from rgd_app.models import LinearModel, LogisticModel, least_squares_weights, misclassification_rate
from rgd_app.optim import (
    OptimState,
    StoppingRule,
    erm_gd_run,
    lad_fit,
    median_of_means_gd_run,
    minsker_fit,
    ols_fit,
    oracle_gd_run,
    partition_count,
    reweighted_gd_run,
    rgd_run,
    sgd_run,
    svrg_run,
)

logger = get_logger('bench.experiment')

TRIAL_COMPLETED = 'completed'
TRIAL_ABORTED = 'aborted'

SYNTHETIC_TASKS = ('quadratic_poc', 'init_sweep', 'distribution_sweep', 'n_sweep', 'd_sweep', 'reweighting_demo')


@dataclass
class TrialResult:
    """Filas (condición, método, iteración, métrica, valor) de un ensayo y su estado."""

    trial: int
    seed: int
    rows: list = field(default_factory=list)
    status: str = TRIAL_COMPLETED
    message: str = ''
    diagnostics: dict = field(default_factory=dict)

    def add(self, condition, method, iteration, metric, value):
        self.rows.append((condition, method, int(iteration), metric, float(value)))

    def abort(self, message):
        self.status = TRIAL_ABORTED
        self.message = message if not self.message else f"{self.message}; {message}"


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    results: pd.DataFrame
    summary: pd.DataFrame
    trials: List[TrialResult]
    top_settings: Optional[pd.DataFrame] = None

    @property
    def completed(self) -> int:
        return sum(1 for t in self.trials if t.status == TRIAL_COMPLETED)

    @property
    def aborted(self) -> int:
        return len(self.trials) - self.completed


def derived_rng(trial_seed, key) -> np.random.Generator:
    return np.random.default_rng([int(trial_seed), zlib.crc32(str(key).encode('utf-8'))])


@dataclass(frozen=True)
class SyntheticCondition:
    label: str
    data_key: str
    noise: object
    n: int
    d: int
    init_delta: float


def synthetic_conditions(cfg: ExperimentConfig) -> List[SyntheticCondition]:
    """Condiciones de las tareas sintéticas y de regression_grid según la tarea."""
    conditions = []
    n_values = cfg.n_values if cfg.task in ('n_sweep', 'regression_grid') and cfg.n_values else [cfg.n]
    d_values = cfg.d_values if cfg.task in ('d_sweep', 'regression_grid') and cfg.d_values else [cfg.d]
    deltas = cfg.init_delta if cfg.task == 'init_sweep' else cfg.init_delta[:1]
    for noise in cfg.noise_settings():
        for n in n_values:
            for d in d_values:
                data_key = f"noise={noise.label()}|n={n}|d={d}"
                for delta in deltas:
                    parts = [f"noise={noise.label()}"]
                    if cfg.task == 'init_sweep':
                        parts.append(f"delta={delta:g}")
                    if cfg.task in ('n_sweep', 'regression_grid'):
                        parts.append(f"n={n}")
                    if cfg.task in ('d_sweep', 'regression_grid'):
                        parts.append(f"d={d}")
                    conditions.append(SyntheticCondition('|'.join(parts), data_key, noise, n, d, delta))
    return conditions


def _synthetic_trajectory(method, cfg: ExperimentConfig, train, risk, w0, rng):
    model = LinearModel(w0)
    state0 = OptimState(w0, cfg.alpha)
    stop = StoppingRule(cfg.max_iters, cfg.grad_tol)
    if method == 'oracle':
        return oracle_gd_run(risk, state0, stop=stop)
    if method == 'erm':
        return erm_gd_run(model, train, state0, stop=stop)
    if method == 'rgd':
        return rgd_run(model, train, cfg.robust, state0, stop=stop, rng=rng)
    if method == 'rgd_log_cosh':
        return rgd_run(model, train, replace(cfg.robust, rho=RhoFunction('log_cosh')), state0, stop=stop, rng=rng)
    if method == 'rgd_known_var':
        robust = replace(cfg.robust, known_variance=risk.gradient_variance(w0))
        return rgd_run(model, train, robust, state0, stop=stop, rng=rng, variance_fn=risk.gradient_variance)
    if method == 'mom_gd':
        partitions = partition_count(train.n, train.n_features)
        return median_of_means_gd_run(model, train, partitions, state0, stop=stop)
    if method == 'reweighted':
        return reweighted_gd_run(model, train, state0, rho=cfg.robust.rho, stop=stop)
    raise InvalidConfigError(f"Método desconocido: '{method}'", field='names')


def _run_synthetic(cfg: ExperimentConfig, result: TrialResult):
    for condition in synthetic_conditions(cfg):
        data_rng = derived_rng(result.seed, condition.data_key)
        train, risk = gen_regression(condition.n, condition.d, condition.noise, data_rng)
        init_rng = derived_rng(result.seed, condition.data_key + '|init')
        w0 = InitSpec.uniform_box(condition.init_delta).draw(risk.w_star, init_rng)
        floor = LinearModel(least_squares_weights(train)).empirical_risk(train)

        for method in cfg.methods:
            trajectory = _synthetic_trajectory(method, cfg, train, risk, w0,
                                               derived_rng(result.seed, f"{method}|{condition.label}"))
            if not trajectory.ok:
                result.abort(f"{condition.label} {method}: {trajectory.message}")
                continue
            for state in trajectory.states[1:]:
                model = LinearModel(state.w)
                result.add(condition.label, method, state.t, 'excess_risk', risk.excess_risk(state.w))
                result.add(condition.label, method, state.t, 'excess_empirical_risk',
                           model.empirical_risk(train) - floor)
                result.add(condition.label, method, state.t, 'param_dist',
                           float(np.linalg.norm(state.w - risk.w_star)))
            if trajectory.diagnostics.get('location_fallbacks') or trajectory.diagnostics.get('unconverged'):
                result.diagnostics[f"{condition.label}|{method}"] = trajectory.diagnostics


def _run_regression_grid(cfg: ExperimentConfig, result: TrialResult):
    for condition in synthetic_conditions(cfg):
        data_rng = derived_rng(result.seed, condition.data_key)
        train, risk = gen_regression(condition.n, condition.d, condition.noise, data_rng)
        test = risk.sample(cfg.test_size, data_rng)
        w_ols = ols_fit(train)

        for method in cfg.methods:
            if method == 'ols':
                w_hat = w_ols
            elif method == 'lad':
                w_hat = lad_fit(train)
            elif method == 'minsker':
                w_hat = minsker_fit(train)
            else:
                trajectory = rgd_run(LinearModel(w_ols), train, cfg.robust, OptimState(w_ols, cfg.alpha),
                                     stop=StoppingRule(cfg.max_iters, cfg.grad_tol),
                                     rng=derived_rng(result.seed, f"{method}|{condition.label}"))
                if not trajectory.ok:
                    result.abort(f"{condition.label} {method}: {trajectory.message}")
                    continue
                w_hat = trajectory.final.w
            result.add(condition.label, method, -1, 'excess_rmse', excess_rmse(w_hat, risk.w_star, test))


def classification_settings(cfg: ExperimentConfig, method):
    """Pares (etiqueta, alpha, batch) que explora un método de clasificación."""
    settings = []
    for alpha in cfg.alphas:
        if method == 'rgd_minibatch':
            settings.extend((f"alpha={alpha:g}|batch={b}", alpha, b) for b in cfg.batch_sizes)
        else:
            settings.append((f"alpha={alpha:g}", alpha, None))
    return settings


def _run_classification(cfg: ExperimentConfig, result: TrialResult):
    data_rng = derived_rng(result.seed, 'classification')
    data = gen_classification(cfg.n + cfg.test_size, cfg.n_features, cfg.n_classes, data_rng,
                              label_noise=cfg.label_noise)
    train = data.subset(np.arange(cfg.n))
    test = data.subset(np.arange(cfg.n, data.n))
    initial = LogisticModel.random_init(cfg.n_classes, cfg.n_features, data_rng, reg=cfg.reg)
    budget = cfg.budget_factor * train.n
    checkpoint = max(budget // cfg.checkpoints, 1)

    result.add('baseline', 'zero_weights', -1, 'test_error',
               misclassification_rate(LogisticModel.zero(cfg.n_classes, cfg.n_features, cfg.reg), test))

    for method in cfg.methods:
        for label, alpha, batch in classification_settings(cfg, method):
            rng = derived_rng(result.seed, f"{method}|{label}")
            state0 = OptimState(initial.weights, alpha)
            stop = StoppingRule(max_iters=budget, budget=budget)
            if method == 'erm':
                trajectory = erm_gd_run(initial, train, state0, stop=stop, checkpoint_evals=checkpoint)
            elif method == 'sgd':
                trajectory = sgd_run(initial, train, state0, rng, stop=stop, checkpoint_evals=checkpoint)
            elif method == 'svrg':
                trajectory = svrg_run(initial, train, state0, rng, stop=stop, checkpoint_evals=checkpoint)
            elif method == 'rgd_minibatch':
                robust = replace(cfg.robust, batch_size=int(batch))
                trajectory = rgd_run(initial, train, robust, state0, stop=stop, rng=rng, checkpoint_evals=checkpoint)
            else:
                robust = replace(cfg.robust, coordinate_subset_size=min(cfg.subset_size, initial.d))
                trajectory = rgd_run(initial, train, robust, state0, stop=stop, rng=rng, checkpoint_evals=checkpoint)

            if not trajectory.ok:
                result.abort(f"{label} {method}: {trajectory.message}")
                continue
            for state in trajectory.states:
                result.add(label, method, state.grad_evals, 'test_error',
                           misclassification_rate(initial.with_weights(state.w), test))
            final = trajectory.final
            result.add(label, method, -1, 'test_error', misclassification_rate(initial.with_weights(final.w), test))
            result.add(label, method, -1, 'grad_evals', final.grad_evals)


def _run_concentration(cfg: ExperimentConfig, result: TrialResult):
    for noise in cfg.noise_settings():
        label = f"noise={noise.label()}|n={cfg.n}"
        for method in cfg.methods:
            robust = cfg.robust if method == 'robust' else replace(cfg.robust, rho=RhoFunction('quadratic_test_only'))
            outcome = noise_concentration_check(noise, cfg.n, cfg.robust.delta, cfg.checks,
                                                derived_rng(result.seed, f"{method}|{label}"), robust)
            result.add(label, method, -1, 'violation_rate', outcome.violation_rate)
            result.add(label, method, -1, 'sufficient', 1.0 if outcome.sufficient else 0.0)


TASK_RUNNERS = {
    'regression_grid': _run_regression_grid,
    'classification_budget': _run_classification,
    'concentration': _run_concentration,
}


def run_trial(cfg: ExperimentConfig, trial: int) -> TrialResult:
    """
    Ejecuta un ensayo completo con semilla base + trial.

    Los errores de entrada o configuración detectados durante el ensayo lo
    marcan como abortado sin interrumpir el resto del experimento.
    """
    result = TrialResult(trial=trial, seed=cfg.seed + trial)
    runner = TASK_RUNNERS.get(cfg.task, _run_synthetic)
    logger.debug(f"Ensayo {trial} (semilla {result.seed}) iniciado")
    try:
        with np.errstate(over='ignore', invalid='ignore'):
            runner(cfg, result)
    except (InvalidInputError, InvalidConfigError, np.linalg.LinAlgError) as e:
        result.abort(str(e))
    if result.status != TRIAL_COMPLETED:
        logger.warning(f"Ensayo {trial} abortado: {result.message}")
    else:
        logger.debug(f"Ensayo {trial} completado con {len(result.rows)} filas")
    return result


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Ejecuta los K ensayos del experimento y agrega las métricas.

    Args:
        cfg: Configuración validada

    Returns:
        ExperimentResult: tabla larga, resumen agregado sobre ensayos completos,
        ensayos individuales y, en clasificación, las mejores configuraciones
    """
    if cfg.seed < 0:
        raise InvalidConfigError("La semilla debe ser ≥ 0", field='seed')
    logger.info(f"Experimento '{cfg.name}' ({cfg.task}): {cfg.trials} ensayos, métodos {', '.join(cfg.methods)}")

    trial_ids = list(range(cfg.trials))
    if cfg.parallelism > 1:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            trials = list(pool.map(lambda t: run_trial(cfg, t), trial_ids))
    else:
        trials = [run_trial(cfg, t) for t in trial_ids]
    trials.sort(key=lambda t: t.trial)

    rows = [(cfg.name, condition, method, t.trial, iteration, metric, value)
            for t in trials for condition, method, iteration, metric, value in t.rows]
    results = results_frame(rows)
    completed_ids = [t.trial for t in trials if t.status == TRIAL_COMPLETED]
    summary = aggregate(results[results['trial'].isin(completed_ids)])
    top = select_top_settings(summary) if cfg.task == 'classification_budget' else None

    outcome = ExperimentResult(cfg, results, summary, trials, top)
    logger.info(f"Experimento '{cfg.name}' terminado: {outcome.completed} ensayos completos, "
                f"{outcome.aborted} abortados")
    return outcome
