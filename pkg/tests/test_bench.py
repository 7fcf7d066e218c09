# tests/test_bench.py
import math

import numpy as np
import pandas as pd
import pytest

from rgd_app.bench import (
    RESULT_COLUMNS,
    aggregate,
    concentration_check,
    derived_rng,
    excess_rmse,
    noise_concentration_check,
    parse_experiment_config,
    results_frame,
    rmse,
    run_experiment,
    select_top_settings,
    sufficient_sample_size,
    synthetic_conditions,
    with_overrides,
)
from rgd_app.datagen import NoiseSpec
from rgd_app.errors import InvalidInputError
from rgd_app.mest import RhoFunction
from rgd_app.robust_grad import RobustConfig


def _config(app_config, text):
    return parse_experiment_config(text, app_config=app_config)


POC = """
[experiment]
name = poc
task = quadratic_poc
trials = 2
seed = 7

[data]
n = 100
d = 2
noise = normal:3

[methods]
names = erm, rgd
max_iters = 5
"""


def test_derived_rng_is_stable_and_keyed():
    a = derived_rng(11, 'noise=normal-3').uniform(size=4)
    b = derived_rng(11, 'noise=normal-3').uniform(size=4)
    c = derived_rng(11, 'noise=normal-4').uniform(size=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_rmse_and_excess(regression_problem):
    data, risk = regression_problem
    assert rmse(risk.w_star, data) == pytest.approx(float(np.sqrt(np.mean((data.inputs @ risk.w_star
                                                                            - data.targets) ** 2))))
    assert excess_rmse(risk.w_star, risk.w_star, data) == 0.0


def _long(values):
    rows = [('e', 'c', 'm', trial, 3, 'excess_risk', value) for trial, value in enumerate(values)]
    return results_frame(rows)


def test_aggregate_population_variance():
    summary = aggregate(_long([1.0, 2.0, 4.0]))
    assert list(summary.columns) == ['experiment', 'condition', 'method', 'iteration', 'metric',
                                     'mean', 'variance', 'trials']
    row = summary.iloc[0]
    assert row['mean'] == pytest.approx(7.0 / 3.0)
    assert row['variance'] == pytest.approx(np.var([1.0, 2.0, 4.0]))
    assert row['trials'] == 3
    assert aggregate(_long([5.0])).iloc[0]['variance'] == 0.0


def test_aggregate_ignores_row_order():
    frame = _long([0.5, 1.5, 9.0, -2.0])
    shuffled = frame.sample(frac=1.0, random_state=3).reset_index(drop=True)
    pd.testing.assert_frame_equal(aggregate(frame), aggregate(shuffled))
    assert aggregate(results_frame([])).empty


def test_select_top_settings_uses_tail_median():
    rows = []
    for condition, level in (('alpha=0.1', 0.3), ('alpha=0.5', 0.1), ('alpha=1', 0.2)):
        for iteration in (10, 20, 30):
            rows.append(('e', condition, 'sgd', iteration, 'test_error', level + 1.0 / iteration, 0.0, 1))
        # el punto final (-1) no cuenta en el orden
        rows.append(('e', condition, 'sgd', -1, 'test_error', 0.0, 0.0, 1))
    summary = pd.DataFrame(rows, columns=['experiment', 'condition', 'method', 'iteration', 'metric',
                                          'mean', 'variance', 'trials'])
    top = select_top_settings(summary, k=2)
    assert list(top['condition']) == ['alpha=0.5', 'alpha=1']
    assert list(top['rank']) == [1, 2]


def test_quadratic_poc_rows_and_columns(app_config):
    outcome = run_experiment(_config(app_config, POC))
    assert list(outcome.results.columns) == RESULT_COLUMNS
    # 2 ensayos × 2 métodos × 5 iteraciones × 3 métricas
    assert len(outcome.results) == 60
    assert set(outcome.results['metric']) == {'excess_risk', 'excess_empirical_risk', 'param_dist'}
    assert outcome.completed == 2 and outcome.aborted == 0
    assert set(outcome.summary['trials']) == {2}
    assert outcome.top_settings is None


def test_experiment_is_deterministic_and_parallel_safe(app_config):
    cfg = _config(app_config, POC)
    first = run_experiment(cfg).results
    second = run_experiment(cfg).results
    threaded = run_experiment(with_overrides(cfg, parallelism=2)).results
    pd.testing.assert_frame_equal(first, second)
    pd.testing.assert_frame_equal(first, threaded)
    other = run_experiment(with_overrides(cfg, seed=8)).results
    assert not np.array_equal(first['value'].to_numpy(), other['value'].to_numpy())


def test_methods_share_data_and_start(app_config):
    cfg = _config(app_config, POC.replace('names = erm, rgd', 'names = erm, rgd, oracle'))
    results = run_experiment(cfg).results
    reduced = run_experiment(with_overrides(cfg, methods=['rgd'])).results
    left = results[results['method'] == 'rgd'].reset_index(drop=True)
    pd.testing.assert_frame_equal(left, reduced.reset_index(drop=True))


def test_failing_method_marks_trials_aborted(app_config):
    text = POC.replace('n = 100', 'n = 1').replace('names = erm, rgd', 'names = erm, mom_gd')
    outcome = run_experiment(_config(app_config, text))
    assert outcome.aborted == 2
    assert all(t.message for t in outcome.trials)
    assert outcome.summary.empty


def test_init_sweep_conditions_share_data(app_config):
    cfg = _config(app_config, POC.replace('task = quadratic_poc', 'task = init_sweep')
                  .replace('noise = normal:3', 'noise = normal:3\ninit_delta = 1, 5'))
    conditions = synthetic_conditions(cfg)
    assert [c.label for c in conditions] == ['noise=normal-3|delta=1', 'noise=normal-3|delta=5']
    assert conditions[0].data_key == conditions[1].data_key


def test_sufficient_sample_size():
    assert sufficient_sample_size(2.0, 0.05) == pytest.approx(24.0 * math.log(40.0))


def test_concentration_flags_insufficient_n(rng):
    result = noise_concentration_check(NoiseSpec.calibrated('normal', 3), 50, 0.005, 100, rng,
                                       RobustConfig(delta=0.005))
    assert not result.sufficient
    assert math.isnan(result.violation_rate)
    assert result.threshold > 50


def test_concentration_rejects_infinite_variance(rng):
    with pytest.raises(InvalidInputError):
        noise_concentration_check(NoiseSpec.calibrated('pareto_heavy', 3), 500, 0.05, 10, rng)


def test_sample_mean_concentration_uses_chebyshev(rng):
    cfg = RobustConfig(rho=RhoFunction('quadratic_test_only'), delta=0.05)
    result = concentration_check(lambda size, g: g.standard_normal(size), 0.0, 1.0, 10, 0.05, 500, rng, cfg)
    assert result.sufficient
    assert result.violation_rate <= 0.05


@pytest.mark.slow
def test_robust_estimate_concentrates_under_lognormal_noise(rng):
    spec = NoiseSpec.explicit('lognormal', mean_log=0.0, sigma_log=1.75)
    result = noise_concentration_check(spec, 500, 0.05, 2000, rng, RobustConfig(delta=0.05))
    assert result.sufficient
    assert result.violation_rate <= 0.05


def test_concentration_task_rows(app_config):
    cfg = _config(app_config, """
[experiment]
task = concentration
trials = 1

[data]
n = 200
noise = normal:2
checks = 50

[estimation]
delta = 0.05
""")
    summary = run_experiment(cfg).summary
    assert set(summary['method']) == {'robust', 'mean'}
    assert set(summary['metric']) == {'violation_rate', 'sufficient'}
    assert (summary[summary['metric'] == 'sufficient']['mean'] == 1.0).all()


def test_regression_grid_rows(app_config):
    cfg = _config(app_config, """
[experiment]
task = regression_grid
trials = 2

[data]
n_values = 30
d_values = 5
families = normal
levels = 1-2
test_size = 200
""")
    outcome = run_experiment(cfg)
    results = outcome.results
    assert len(results) == 2 * 2 * 4
    assert set(results['method']) == {'ols', 'lad', 'minsker', 'rgd'}
    assert set(results['iteration']) == {-1}
    assert set(results['condition']) == {'noise=normal-1|n=30|d=5', 'noise=normal-2|n=30|d=5'}
    assert np.all(np.isfinite(results['value']))


CLASSIFICATION = """
[experiment]
task = classification_budget
trials = 1

[data]
n = 200
n_classes = 3
n_features = 20
test_size = 100

[methods]
alphas = 0.1
batch_sizes = 5
subset_size = 10
budget_factor = 20
checkpoints = 10
"""


def test_classification_respects_budget(app_config):
    outcome = run_experiment(_config(app_config, CLASSIFICATION))
    results = outcome.results
    assert outcome.aborted == 0
    baseline = results[results['method'] == 'zero_weights']
    assert len(baseline) == 1 and baseline.iloc[0]['condition'] == 'baseline'

    budget = 20 * 200
    evals = results[results['metric'] == 'grad_evals'].set_index('method')['value']
    for method in ('erm', 'sgd', 'svrg', 'rgd_minibatch', 'rgd_subset'):
        assert evals[method] == budget

    errors = results[(results['metric'] == 'test_error') & (results['iteration'] >= 0)]
    assert errors['value'].between(0.0, 1.0).all()
    assert set(outcome.top_settings['method']) == {'erm', 'sgd', 'svrg', 'rgd_minibatch', 'rgd_subset'}


def _final_excess(outcome, method, condition_prefix='noise='):
    frame = outcome.results
    final = frame['iteration'].max()
    rows = frame[(frame['method'] == method) & (frame['metric'] == 'excess_risk') & (frame['iteration'] == final)
                 & frame['condition'].str.startswith(condition_prefix)]
    return rows.sort_values('trial')['value'].to_numpy()


TREND = """
[experiment]
task = quadratic_poc
trials = 20
seed = 3

[data]
n = 500
d = 2
noise = {noise}

[methods]
names = erm, rgd
alpha = 0.1
max_iters = 50
"""


@pytest.mark.slow
def test_rgd_beats_erm_under_heavy_tails(app_config):
    outcome = run_experiment(_config(app_config, TREND.format(noise='lognormal(mean_log=0, sigma_log=1.75)')))
    erm, rgd = _final_excess(outcome, 'erm'), _final_excess(outcome, 'rgd')
    assert rgd.mean() <= 0.8 * erm.mean()
    assert rgd.var() <= erm.var()


@pytest.mark.slow
def test_rgd_matches_erm_under_gaussian_noise(app_config):
    outcome = run_experiment(_config(app_config, TREND.format(noise='normal(loc=0, scale=20)')))
    erm, rgd = _final_excess(outcome, 'erm'), _final_excess(outcome, 'rgd')
    assert rgd.mean() <= 1.2 * erm.mean()


@pytest.mark.slow
def test_rgd_is_insensitive_to_initialization(app_config):
    text = TREND.format(noise='lognormal(mean_log=0, sigma_log=1.75)').replace('quadratic_poc', 'init_sweep')
    text = text.replace('d = 2', 'd = 2\ninit_delta = 2.5, 10')
    outcome = run_experiment(_config(app_config, text))
    frame = outcome.results
    final = frame['iteration'].max()
    far = frame[(frame['method'] == 'rgd') & (frame['metric'] == 'excess_risk') & (frame['iteration'] == final)
                & frame['condition'].str.endswith('delta=10')]['value'].mean()
    near = frame[(frame['method'] == 'rgd') & (frame['metric'] == 'excess_risk') & (frame['iteration'] == final)
                 & frame['condition'].str.endswith('delta=2.5')]['value'].mean()
    assert far <= 1.5 * near


@pytest.mark.slow
def test_budget_parity_and_accuracy(app_config):
    text = CLASSIFICATION.replace('n = 200', 'n = 2000').replace('test_size = 100', 'test_size = 1000')
    outcome = run_experiment(_config(app_config, text))
    results = outcome.results
    final = results[results['iteration'] == -1]
    baseline = final[final['method'] == 'zero_weights']['value'].iloc[0]
    budget = 20 * 2000
    for method in ('erm', 'sgd', 'svrg', 'rgd_minibatch', 'rgd_subset'):
        rows = final[final['method'] == method].set_index('metric')['value']
        assert budget - 2000 <= rows['grad_evals'] <= budget
        if method == 'svrg':
            assert rows['grad_evals'] == budget
        assert rows['test_error'] <= baseline - 0.1
