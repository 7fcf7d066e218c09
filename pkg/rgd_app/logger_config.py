# rgd_app/logger_config.py
"""
Módulo de configuración centralizada de logging.
Proporciona una configuración unificada para dirigir logs a la consola
y a un buffer en memoria que la CLI vuelca como run.log en cada ejecución.
"""

import logging
import sys
from collections import deque

# Definir un nivel NONE más alto que CRITICAL para suprimir todos los mensajes
NONE_LEVEL = 100
logging.addLevelName(NONE_LEVEL, "NONE")

# Buffer circular con los mensajes de la ejecución en curso
run_log_messages = deque(maxlen=5000)

DEFAULT_LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

DEFAULT_VERBOSE_MODULES = []


class RunLogHandler(logging.Handler):
    """Handler que redirige los mensajes de log al buffer de la ejecución."""

    def emit(self, record):
        """Procesa un registro de log y lo añade al buffer."""
        try:
            msg = self.format(record)
            run_log_messages.append(msg)
        except Exception:
            self.handleError(record)


def _logging_section(config=None):
    """
    Obtiene la sección de logging de la configuración.

    Args:
        config (dict): Configuración ya cargada. Si es None se lee config.json

    Returns:
        dict: Sección de logging o diccionario vacío
    """
    if config is None:
        try:
            from rgd_app.config_manager import load_config
            config = load_config()
        except Exception as e:
            print(f"Error al cargar la configuración de logging: {str(e)}")
            return {}
    return config.get('logging', {})


def setup_logging(config=None, stream=None):
    """
    Configura el sistema de logging centralizado basado en config.json

    Args:
        config (dict): Configuración opcional; por defecto se lee config.json
        stream: Flujo para el handler de consola (stderr por defecto)

    Returns:
        deque: Buffer con los mensajes de la ejecución
    """
    global run_log_messages

    log_config = _logging_section(config)

    log_level = str(log_config.get('log_level', 'INFO')).upper()
    log_format = log_config.get('log_format', DEFAULT_LOG_FORMAT)
    max_messages = int(log_config.get('max_buffer_messages', 5000))
    verbose_modules = log_config.get('verbose_modules', DEFAULT_VERBOSE_MODULES)

    if run_log_messages.maxlen != max_messages:
        run_log_messages = deque(maxlen=max_messages)

    # Resetear handlers existentes en el logger raíz
    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    if log_level == 'NONE':
        numeric_level = NONE_LEVEL
    else:
        numeric_level = getattr(logging, log_level, logging.INFO)

    root_logger.setLevel(numeric_level)

    cmd_logger = logging.getLogger('cmd')
    for handler in cmd_logger.handlers[:]:
        cmd_logger.removeHandler(handler)
    cmd_logger.propagate = False
    cmd_logger.setLevel(NONE_LEVEL if log_level == 'NONE' else logging.INFO)

    # Con nivel NONE no se añaden handlers
    if log_level != 'NONE':
        console_handler = logging.StreamHandler(stream or sys.stderr)
        console_handler.setFormatter(logging.Formatter(log_format))
        console_handler.setLevel(numeric_level)

        buffer_handler = RunLogHandler()
        buffer_handler.setFormatter(logging.Formatter(log_format))
        buffer_handler.setLevel(logging.DEBUG)

        root_logger.addHandler(console_handler)
        root_logger.addHandler(buffer_handler)

        for module in verbose_modules:
            module_logger = logging.getLogger(f'rgd_app.{module}')
            module_logger.setLevel(logging.DEBUG)

        # Logger para mensajes de consola CMD (formato completo, sin propagación)
        cmd_handler = logging.StreamHandler(stream or sys.stderr)
        cmd_handler.setFormatter(logging.Formatter(log_format))
        cmd_logger.addHandler(cmd_handler)
        cmd_buffer_handler = RunLogHandler()
        cmd_buffer_handler.setFormatter(logging.Formatter(log_format))
        cmd_logger.addHandler(cmd_buffer_handler)

    return run_log_messages


def reset_run_log():
    """Vacía el buffer de mensajes antes de una nueva ejecución."""
    run_log_messages.clear()


def dump_run_log(path):
    """
    Escribe el buffer de mensajes en un archivo.

    Args:
        path (str): Ruta del archivo run.log

    Returns:
        int: Número de líneas escritas
    """
    lines = list(run_log_messages)
    with open(path, 'w', encoding='utf-8') as f:
        for line in lines:
            f.write(line + "\n")
    return len(lines)


def log_to_cmd(message, level='INFO', module='CMD'):
    """
    Envía un mensaje a la consola CMD con formato completo.

    Args:
        message (str): Mensaje a enviar
        level (str): Nivel de log (DEBUG, INFO, WARNING, ERROR, CRITICAL, NONE)
        module (str): Nombre del módulo o componente que envía el mensaje
    """
    level_upper = level.upper()
    if level_upper == 'NONE':
        return

    logger = logging.getLogger(f'cmd.{module}')
    numeric_level = getattr(logging, level_upper, None)
    if not isinstance(numeric_level, int):
        numeric_level = logging.INFO  # Nivel por defecto si se especifica uno no válido
    logger.log(numeric_level, message)


def get_logger(name):
    """
    Obtiene un logger configurado para un módulo específico.

    Args:
        name (str): Nombre del módulo o componente

    Returns:
        logging.Logger: Logger configurado
    """
    logger_name = f'rgd_app.{name}' if not name.startswith('rgd_app.') else name
    return logging.getLogger(logger_name)
