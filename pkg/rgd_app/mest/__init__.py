# rgd_app/mest/__init__.py
"""
Núcleo de M-estimación escalar: funciones ρ/ψ/χ, localización, dispersión
y ajuste de escala por confianza.
"""

from .functions import (
    RHO_KINDS,
    CHI_KINDS,
    RhoFunction,
    ChiFunction,
    FixedPointSettings,
    geman_center,
)
from .estimators import (
    FixedPointResult,
    solve_location,
    solve_dispersion,
    confidence_scale,
    locate,
    rescale,
    psi_eval,
    chi_eval,
)

__all__ = [
    'RHO_KINDS',
    'CHI_KINDS',
    'RhoFunction',
    'ChiFunction',
    'FixedPointSettings',
    'geman_center',
    'FixedPointResult',
    'solve_location',
    'solve_dispersion',
    'confidence_scale',
    'locate',
    'rescale',
    'psi_eval',
    'chi_eval',
]
