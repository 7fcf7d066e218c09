# rgd_app/config_manager.py
"""
Acceso a la configuración de la aplicación (config.json).
Los valores por defecto de estimación, punto fijo, experimentos y logging se
leen siempre desde aquí.
"""

import json
import os

from rgd_app.errors import InvalidConfigError

CONFIG_PATH = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'config.json')

DEFAULTS = {
    "estimation": {
        "rho": "gudermannian",
        "chi": "geman_quadratic",
        "delta": 0.005,
        "catoni_c": 2.0,
        "scale_refresh_every": 1,
        "pivot": "median",
    },
    "fixed_point": {
        "max_iters": 50,
        "rel_tolerance": 1e-8,
        "sigma_floor": 1e-12,
    },
    "experiments": {
        "output_directory": "results",
        "base_seed": 0,
        "parallelism": 1,
        "trials": 250,
        "test_size": 1000,
    },
    "logging": {},
}


def config_path():
    """Ruta efectiva del archivo de configuración (variable RGD_CONFIG o config.json)."""
    return os.environ.get('RGD_CONFIG', CONFIG_PATH)


def load_config(path=None):
    """
    Carga la configuración y la completa con los valores por defecto.

    Args:
        path (str): Ruta alternativa al archivo de configuración

    Returns:
        dict: Configuración con todas las secciones conocidas
    """
    path = path or config_path()
    config = {}
    if os.path.exists(path):
        with open(path, 'r', encoding='utf-8') as f:
            try:
                config = json.load(f)
            except json.JSONDecodeError as e:
                raise InvalidConfigError(f"JSON no válido: {e.msg}", line=e.lineno) from None

    merged = {}
    for section, values in DEFAULTS.items():
        merged[section] = dict(values)
        merged[section].update(config.get(section, {}))
    for section, values in config.items():
        if section not in merged:
            merged[section] = values
    return merged


def get_fixed_point_settings(config=None):
    """Construye FixedPointSettings a partir de la sección 'fixed_point'."""
    from rgd_app.mest import FixedPointSettings

    section = (config or load_config())["fixed_point"]
    return FixedPointSettings(
        max_iters=int(section["max_iters"]),
        rel_tolerance=float(section["rel_tolerance"]),
        sigma_floor=float(section["sigma_floor"]),
    )


def get_robust_defaults(config=None):
    """
    Devuelve los valores por defecto de estimación robusta.

    Returns:
        dict: rho, chi, delta, catoni_c y scale_refresh_every
    """
    return dict((config or load_config())["estimation"])


def get_experiment_defaults(config=None):
    """Devuelve la sección 'experiments' (directorio de salida, semilla, paralelismo)."""
    return dict((config or load_config())["experiments"])
