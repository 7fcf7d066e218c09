# rgd_app/bench/config_loader.py
"""
Lectura de configuraciones de experimentos en formato INI (clave = valor por
secciones). Los errores indican el campo y la línea del archivo.
"""

import configparser
import re
from dataclasses import dataclass, field, replace
from typing import List, Optional

from rgd_app import config_manager
from rgd_app.datagen.noise import NoiseSpec
from rgd_app.errors import InvalidConfigError
from rgd_app.logger_config import get_logger
from rgd_app.mest import ChiFunction, RhoFunction
from rgd_app.robust_grad import RobustConfig

logger = get_logger('bench.config_loader')

SYNTHETIC_METHODS = ('oracle', 'erm', 'rgd', 'rgd_known_var', 'rgd_log_cosh', 'mom_gd', 'reweighted')

TASK_METHODS = {
    'quadratic_poc': SYNTHETIC_METHODS,
    'init_sweep': SYNTHETIC_METHODS,
    'distribution_sweep': SYNTHETIC_METHODS,
    'n_sweep': SYNTHETIC_METHODS,
    'd_sweep': SYNTHETIC_METHODS,
    'reweighting_demo': SYNTHETIC_METHODS,
    'regression_grid': ('ols', 'lad', 'minsker', 'rgd'),
    'classification_budget': ('erm', 'sgd', 'svrg', 'rgd_minibatch', 'rgd_subset'),
    'concentration': ('robust', 'mean'),
}

DEFAULT_METHODS = {
    'quadratic_poc': ['oracle', 'erm', 'rgd'],
    'init_sweep': ['oracle', 'erm', 'rgd'],
    'distribution_sweep': ['oracle', 'erm', 'rgd'],
    'n_sweep': ['oracle', 'erm', 'rgd'],
    'd_sweep': ['oracle', 'erm', 'rgd'],
    'reweighting_demo': ['oracle', 'erm', 'reweighted'],
    'regression_grid': ['ols', 'lad', 'minsker', 'rgd'],
    'classification_budget': ['erm', 'sgd', 'svrg', 'rgd_minibatch', 'rgd_subset'],
    'concentration': ['robust', 'mean'],
}

# Valores por tarea que difieren de los generales
TASK_DEFAULTS = {
    'reweighting_demo': {'alpha': 0.35, 'max_iters': 10},
    'regression_grid': {'n': 30, 'd': 5, 'max_iters': 100, 'grad_tol': 0.001, 'delta': 0.005},
    'classification_budget': {'n': 2000},
}

_NOISE_PATTERN = re.compile(r'^\s*([a-z_]+)\s*(?::\s*(\d+)|\(([^)]*)\))?\s*$')


def parse_noise(text) -> NoiseSpec:
    """
    Interpreta una expresión de ruido.

    Formatos: 'familia:nivel' (escalera calibrada), 'familia(clave=valor, ...)'
    (parámetros explícitos) o 'none'.
    """
    match = _NOISE_PATTERN.match(text)
    if not match:
        raise InvalidConfigError(f"Expresión de ruido no válida: '{text}'", field='noise')
    family, level, params = match.groups()
    if family == 'none':
        return NoiseSpec.none()
    if level is not None:
        return NoiseSpec.calibrated(family, int(level))
    values = {}
    for item in filter(None, (p.strip() for p in (params or '').split(','))):
        key, _, value = item.partition('=')
        try:
            values[key.strip()] = float(value)
        except ValueError:
            raise InvalidConfigError(f"Parámetro de ruido no numérico: '{item}'", field='noise') from None
    return NoiseSpec.explicit(family, **values)


def _split(text, sep=','):
    return [item.strip() for item in text.split(sep) if item.strip()]


def _int_list(text):
    values = []
    for item in _split(text):
        if '-' in item[1:]:
            lo, hi = item.split('-', 1)
            values.extend(range(int(lo), int(hi) + 1))
        else:
            values.append(int(item))
    return values


def _bool(text):
    lowered = text.strip().lower()
    if lowered in ('1', 'true', 'yes', 'si', 'sí', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f"valor booleano no válido: '{text}'")


SCHEMA = {
    'experiment': {'name': str, 'task': str, 'trials': int, 'seed': int, 'parallelism': int},
    'data': {
        'n': int, 'd': int, 'noise': lambda t: [parse_noise(x) for x in _split(t, ';')],
        'init_delta': lambda t: [float(x) for x in _split(t)], 'n_values': _int_list, 'd_values': _int_list,
        'families': _split, 'levels': _int_list, 'test_size': int, 'n_classes': int, 'n_features': int,
        'label_noise': float, 'checks': int,
    },
    'methods': {
        'names': _split, 'alpha': float, 'alphas': lambda t: [float(x) for x in _split(t)],
        'max_iters': int, 'grad_tol': float, 'batch_sizes': _int_list, 'subset_size': int,
        'budget_factor': int, 'checkpoints': int, 'reg': float,
    },
    'estimation': {
        'rho': str, 'chi': str, 'delta': float, 'catoni_c': float, 'scale_refresh_every': int,
        'pivot': str, 'allow_test_rho': _bool,
    },
    'output': {'directory': str},
}


@dataclass
class ExperimentConfig:
    """Configuración resuelta de un experimento."""

    name: str
    task: str
    trials: int = 250
    seed: int = 0
    parallelism: int = 1
    n: int = 500
    d: int = 2
    noise: List[NoiseSpec] = field(default_factory=lambda: [NoiseSpec.explicit('normal', loc=0.0, scale=20.0)])
    init_delta: List[float] = field(default_factory=lambda: [2.5])
    n_values: Optional[List[int]] = None
    d_values: Optional[List[int]] = None
    families: Optional[List[str]] = None
    levels: Optional[List[int]] = None
    test_size: int = 1000
    n_classes: int = 3
    n_features: int = 20
    label_noise: float = 0.1
    checks: int = 2000
    methods: List[str] = field(default_factory=list)
    alpha: float = 0.1
    alphas: Optional[List[float]] = None
    max_iters: int = 50
    grad_tol: float = 0.0
    batch_sizes: List[int] = field(default_factory=lambda: [10])
    subset_size: int = 100
    budget_factor: int = 20
    checkpoints: int = 20
    reg: float = 0.001
    robust: RobustConfig = field(default_factory=RobustConfig)
    allow_test_rho: bool = False
    output_directory: str = 'results'
    source: str = '<config>'

    def __post_init__(self):
        if self.task not in TASK_METHODS:
            raise InvalidConfigError(f"Tarea desconocida: '{self.task}'", field='task')
        if not self.methods:
            self.methods = list(DEFAULT_METHODS[self.task])
        unknown = [m for m in self.methods if m not in TASK_METHODS[self.task]]
        if unknown:
            raise InvalidConfigError(f"Métodos no disponibles para {self.task}: {unknown}", field='names')
        for name in ('trials', 'n', 'd', 'test_size', 'parallelism', 'max_iters', 'checks', 'checkpoints',
                     'budget_factor'):
            if int(getattr(self, name)) < 1:
                raise InvalidConfigError(f"{name} debe ser ≥ 1", field=name)
        if not float(self.alpha) > 0:
            raise InvalidConfigError("alpha debe ser positivo", field='alpha')
        if self.alphas is None:
            self.alphas = [self.alpha]
        if not self.robust.rho.is_bounded and not self.allow_test_rho:
            raise InvalidConfigError(
                "rho 'quadratic_test_only' solo se admite con allow_test_rho = true", field='rho')
        if self.task == 'classification_budget' and self.n_classes < 2:
            raise InvalidConfigError("n_classes debe ser ≥ 2", field='n_classes')
        if self.families:
            try:
                self.noise_settings()
            except InvalidConfigError as exc:
                field_name = 'levels' if exc.field == 'level' else 'families'
                raise InvalidConfigError(exc.message, field=field_name) from None

    def noise_settings(self) -> List[NoiseSpec]:
        """Ruidos del experimento; en regression_grid, familias × niveles si se indican."""
        if self.families:
            levels = self.levels or list(range(1, 16))
            return [NoiseSpec.calibrated(family, level) for family in self.families for level in levels]
        return list(self.noise)

    def manifest_lines(self, version) -> List[str]:
        """Líneas 'clave = valor' del manifiesto (sin marcas de tiempo)."""
        entries = [
            ('name', self.name), ('task', self.task), ('source', self.source), ('seed', self.seed),
            ('trials', self.trials), ('parallelism', self.parallelism), ('methods', ','.join(self.methods)),
            ('n', self.n), ('d', self.d), ('noise', '; '.join(s.label() for s in self.noise_settings())),
            ('init_delta', ','.join(f"{x:g}" for x in self.init_delta)),
            ('n_values', self.n_values), ('d_values', self.d_values), ('test_size', self.test_size),
            ('alpha', self.alpha), ('alphas', ','.join(f"{x:g}" for x in self.alphas)),
            ('max_iters', self.max_iters), ('grad_tol', self.grad_tol),
            ('rho', self.robust.rho.kind), ('chi', self.robust.chi.kind), ('delta', self.robust.delta),
            ('catoni_c', self.robust.C), ('scale_refresh_every', self.robust.scale_refresh_every),
            ('pivot', self.robust.pivot),
            ('fixed_point', f"{self.robust.fp.max_iters},{self.robust.fp.rel_tolerance:g},"
                            f"{self.robust.fp.sigma_floor:g}"),
            ('version', version),
        ]
        if self.task == 'classification_budget':
            entries += [('n_classes', self.n_classes), ('n_features', self.n_features), ('reg', self.reg),
                        ('label_noise', self.label_noise), ('budget_factor', self.budget_factor),
                        ('batch_sizes', ','.join(map(str, self.batch_sizes))), ('subset_size', self.subset_size),
                        ('checkpoints', self.checkpoints)]
        if self.task == 'concentration':
            entries.append(('checks', self.checks))
        return [f"{key} = {value}" for key, value in entries]


def find_line(lines, section, key) -> Optional[int]:
    """Número de línea (1-based) de 'key' dentro de '[section]'."""
    current = None
    pattern = re.compile(r'^\s*' + re.escape(key) + r'\s*[=:]')
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if stripped.startswith('[') and stripped.endswith(']'):
            current = stripped[1:-1].strip()
        elif current == section and pattern.match(line):
            return number
    return None


def _section_line(lines, section):
    for number, line in enumerate(lines, start=1):
        if line.strip() == f'[{section}]':
            return number
    return None


def parse_experiment_config(text, source='<config>', app_config=None) -> ExperimentConfig:
    """
    Construye un ExperimentConfig a partir del texto INI.

    Args:
        text: Contenido del archivo
        source: Nombre del origen para los mensajes
        app_config: Configuración de la aplicación (config.json) para los valores por defecto

    Returns:
        ExperimentConfig: Configuración validada

    Raises:
        InvalidConfigError: con field y line del problema
    """
    lines = text.splitlines()
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        line = getattr(exc, 'lineno', None)
        if line is None and getattr(exc, 'errors', None):
            line = exc.errors[0][0]
        raise InvalidConfigError(f"Sintaxis INI no válida: {exc.message}", line=line) from None

    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise InvalidConfigError(f"Sección desconocida: [{section}]", field=section,
                                     line=_section_line(lines, section))
        for key, raw in parser.items(section):
            line = find_line(lines, section, key)
            if key not in SCHEMA[section]:
                raise InvalidConfigError(f"Clave desconocida en [{section}]", field=key, line=line)
            try:
                values[(section, key)] = SCHEMA[section][key](raw)
            except InvalidConfigError as exc:
                raise InvalidConfigError(str(exc), field=key, line=line) from None
            except (TypeError, ValueError) as exc:
                raise InvalidConfigError(f"Valor no válido '{raw}': {exc}", field=key, line=line) from None

    def lookup(section, key, default=None):
        return values.get((section, key), default)

    def line_of(section, key):
        return find_line(lines, section, key)

    task = lookup('experiment', 'task')
    if task is None:
        raise InvalidConfigError("Falta la clave obligatoria", field='task', line=_section_line(lines, 'experiment'))
    if task not in TASK_METHODS:
        raise InvalidConfigError(f"Tarea desconocida: '{task}'", field='task', line=line_of('experiment', 'task'))

    app = app_config or config_manager.load_config()
    experiments = config_manager.get_experiment_defaults(app)
    estimation = config_manager.get_robust_defaults(app)
    task_defaults = TASK_DEFAULTS.get(task, {})

    try:
        rho = RhoFunction(lookup('estimation', 'rho', estimation['rho']))
    except InvalidConfigError as exc:
        raise InvalidConfigError(str(exc), field='rho', line=line_of('estimation', 'rho')) from None
    try:
        chi = ChiFunction(lookup('estimation', 'chi', estimation['chi']))
    except InvalidConfigError as exc:
        raise InvalidConfigError(str(exc), field='chi', line=line_of('estimation', 'chi')) from None

    kwargs = {
        'name': lookup('experiment', 'name', task),
        'task': task,
        'trials': lookup('experiment', 'trials', int(experiments['trials'])),
        'seed': lookup('experiment', 'seed', int(experiments['base_seed'])),
        'parallelism': lookup('experiment', 'parallelism', int(experiments['parallelism'])),
        'test_size': lookup('data', 'test_size', int(experiments['test_size'])),
        'output_directory': lookup('output', 'directory', experiments['output_directory']),
        'allow_test_rho': lookup('estimation', 'allow_test_rho', False),
        'methods': lookup('methods', 'names', []),
        'source': source,
    }
    for key, section in (('n', 'data'), ('d', 'data'), ('noise', 'data'), ('init_delta', 'data'),
                         ('n_values', 'data'), ('d_values', 'data'), ('families', 'data'), ('levels', 'data'),
                         ('n_classes', 'data'), ('n_features', 'data'), ('label_noise', 'data'),
                         ('checks', 'data'), ('alpha', 'methods'), ('alphas', 'methods'),
                         ('max_iters', 'methods'), ('grad_tol', 'methods'), ('batch_sizes', 'methods'),
                         ('subset_size', 'methods'), ('budget_factor', 'methods'), ('checkpoints', 'methods'),
                         ('reg', 'methods')):
        value = lookup(section, key, task_defaults.get(key))
        if value is not None:
            kwargs[key] = value

    try:
        kwargs['robust'] = RobustConfig(
            rho=rho, chi=chi,
            delta=lookup('estimation', 'delta', task_defaults.get('delta', float(estimation['delta']))),
            C=lookup('estimation', 'catoni_c', float(estimation['catoni_c'])),
            fp=config_manager.get_fixed_point_settings(app),
            scale_refresh_every=lookup('estimation', 'scale_refresh_every', int(estimation['scale_refresh_every'])),
            pivot=lookup('estimation', 'pivot', estimation['pivot']),
        )
        config = ExperimentConfig(**kwargs)
    except InvalidConfigError as exc:
        section = _field_section(exc.field)
        line = line_of(section, exc.field) if section else None
        raise InvalidConfigError(str(exc), field=exc.field, line=line) from None

    logger.debug(f"Configuración '{config.name}' cargada desde {source}")
    return config


def _field_section(name):
    for section, keys in SCHEMA.items():
        if name in keys:
            return section
    return None


def load_experiment_config(path, app_config=None) -> ExperimentConfig:
    """Lee y valida un archivo INI de experimento."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as exc:
        raise InvalidConfigError(f"No se pudo leer la configuración: {exc}") from None
    return parse_experiment_config(text, source=str(path), app_config=app_config)


def with_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Copia con campos sobrescritos (semilla, métodos o paralelismo desde la línea de órdenes)."""
    clean = {k: v for k, v in overrides.items() if v is not None}
    return replace(config, **clean) if clean else config
