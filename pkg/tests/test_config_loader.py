# tests/test_config_loader.py
from pathlib import Path

import pytest

from rgd_app.bench import load_experiment_config, parse_experiment_config, parse_noise, with_overrides
from rgd_app.errors import InvalidConfigError

CONFIG_DIR = Path(__file__).resolve().parent.parent / 'configs'

BASE = """[experiment]
name = prueba
task = quadratic_poc
trials = 3

[data]
n = 50
noise = normal:4

[methods]
names = oracle, erm, rgd
"""


def _parse(app_config, text):
    return parse_experiment_config(text, source='prueba.ini', app_config=app_config)


@pytest.mark.parametrize('path', sorted(CONFIG_DIR.glob('*.ini')), ids=lambda p: p.stem)
def test_shipped_configs_parse(path, app_config):
    config = load_experiment_config(path, app_config=app_config)
    assert config.name == path.stem
    assert config.noise_settings()


def test_values_and_defaults(app_config):
    config = _parse(app_config, BASE)
    assert config.trials == 3
    assert config.n == 50
    assert config.d == 2
    assert config.seed == app_config['experiments']['base_seed']
    assert config.methods == ['oracle', 'erm', 'rgd']
    assert [s.label() for s in config.noise_settings()] == ['normal-4']
    assert config.robust.rho.kind == 'gudermannian'
    assert config.alphas == [config.alpha]


def test_task_defaults(app_config):
    grid = _parse(app_config, "[experiment]\ntask = regression_grid\n")
    assert (grid.n, grid.d, grid.max_iters) == (30, 5, 100)
    assert grid.robust.delta == 0.005
    assert grid.methods == ['ols', 'lad', 'minsker', 'rgd']
    demo = _parse(app_config, "[experiment]\ntask = reweighting_demo\n")
    assert (demo.alpha, demo.max_iters) == (0.35, 10)


def test_noise_grammar():
    assert parse_noise('none').family == 'none'
    assert parse_noise('laplace:15').level == 15
    spec = parse_noise('lognormal(mean_log=0, sigma_log=1.75)')
    assert spec.params == {'mean_log': 0.0, 'sigma_log': 1.75}
    for bad in ('normal:', 'normal(scale=abc)', 'cauchy:3', '3normal'):
        with pytest.raises(InvalidConfigError):
            parse_noise(bad)


def test_int_ranges_and_lists(app_config):
    config = _parse(app_config, BASE.replace('task = quadratic_poc', 'task = n_sweep')
                    .replace('n = 50', 'n_values = 10-12, 20'))
    assert config.n_values == [10, 11, 12, 20]


def _error(app_config, text):
    with pytest.raises(InvalidConfigError) as info:
        _parse(app_config, text)
    return info.value


def test_unknown_key_reports_line(app_config):
    error = _error(app_config, BASE.replace('n = 50', 'n = 50\nsamples = 3'))
    assert (error.field, error.line) == ('samples', 8)
    assert error.describe('prueba.ini').startswith('prueba.ini:8: samples:')


def test_unknown_section_and_syntax(app_config):
    assert _error(app_config, BASE + "\n[plots]\nwidth = 3\n").line == 13
    assert _error(app_config, "n = 5\n" + BASE).line == 1


def test_bad_values(app_config):
    error = _error(app_config, BASE.replace('trials = 3', 'trials = muchos'))
    assert (error.field, error.line) == ('trials', 4)
    error = _error(app_config, BASE.replace('normal:4', 'cauchy:4'))
    assert (error.field, error.line) == ('noise', 8)
    error = _error(app_config, BASE.replace('trials = 3', 'trials = 0'))
    assert error.field == 'trials'


def test_unknown_task_and_method(app_config):
    assert _error(app_config, BASE.replace('quadratic_poc', 'clustering')).field == 'task'
    error = _error(app_config, BASE.replace('oracle, erm, rgd', 'erm, svrg'))
    assert (error.field, error.line) == ('names', 11)
    assert _error(app_config, "[data]\nn = 5\n").field == 'task'


def test_quadratic_rho_needs_opt_in(app_config):
    text = BASE + "\n[estimation]\nrho = quadratic_test_only\n"
    error = _error(app_config, text)
    assert error.field == 'rho'
    config = _parse(app_config, text + "allow_test_rho = yes\n")
    assert not config.robust.rho.is_bounded
    assert _error(app_config, BASE + "\n[estimation]\nrho = tukey\n").field == 'rho'


def test_families_and_levels(app_config):
    grid = "[experiment]\ntask = regression_grid\n\n[data]\nfamilies = normal, pareto\nlevels = 1-3\n"
    config = _parse(app_config, grid)
    assert [s.label() for s in config.noise_settings()] == [
        'normal-1', 'normal-2', 'normal-3', 'pareto-1', 'pareto-2', 'pareto-3']
    error = _error(app_config, grid.replace('1-3', '14-16'))
    assert (error.field, error.line) == ('levels', 6)
    assert _error(app_config, grid.replace('pareto', 'zipf')).field == 'families'


def test_overrides_revalidate(app_config):
    config = _parse(app_config, BASE)
    assert with_overrides(config, seed=99, methods=None).seed == 99
    assert with_overrides(config) is config
    with pytest.raises(InvalidConfigError):
        with_overrides(config, methods=['lad'])


def test_manifest_lines(app_config):
    lines = _parse(app_config, BASE).manifest_lines('1.0.0')
    assert 'task = quadratic_poc' in lines
    assert 'noise = normal-4' in lines
    assert lines[-1] == 'version = 1.0.0'


def test_pivot_setting(app_config):
    assert _parse(app_config, BASE).robust.pivot == 'median'
    config = _parse(app_config, BASE + "\n[estimation]\npivot = mean\n")
    assert config.robust.pivot == 'mean'
    assert 'pivot = mean' in config.manifest_lines('1.0.0')
    error = _error(app_config, BASE + "\n[estimation]\npivot = mode\n")
    assert (error.field, error.line) == ('pivot', 14)
