# rgd_app/errors.py
"""
Excepciones del paquete.
Las rutinas numéricas lanzan InvalidInputError ante datos inválidos y la capa de
configuración lanza InvalidConfigError indicando campo y línea cuando se conocen.
"""

from typing import Optional


class InvalidInputError(ValueError):
    """Datos de entrada inválidos para una operación numérica."""


class NonFiniteError(InvalidInputError):
    """Valores no finitos (inf o nan) en gradientes o iterados."""


class InvalidConfigError(ValueError):
    """
    Configuración inválida.

    Args:
        message: Descripción del problema
        field: Campo de configuración afectado (ej. 'data.noise_family')
        line: Línea del archivo de configuración, si se conoce
    """

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.field = field
        self.line = line

    def describe(self, source: str = "config") -> str:
        """Devuelve el mensaje con el formato 'archivo:línea: campo: mensaje'."""
        location = f"{source}:{self.line}" if self.line is not None else source
        if self.field:
            return f"{location}: {self.field}: {self.message}"
        return f"{location}: {self.message}"
