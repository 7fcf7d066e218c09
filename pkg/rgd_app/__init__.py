# rgd_app/__init__.py
"""Descenso de gradiente robusto con estimaciones M de los gradientes."""

__version__ = '1.0.0'

# Importar módulos clave para hacerlos accesibles vía rgd_app
from . import errors
from . import config_manager
from . import logger_config
