"""Extremal Klein-bottle metrics: an integrable system, its periods and spectrum.

Modules
-------
dynsys      the second-order system, first integrals and integration
separation  Hamiltonian form, parabolic separation and the quintic ``P``
periods     hyperelliptic periods and complete elliptic integrals
classify    period ratios, zero counts and orbit shapes
spectral    Sturm-Liouville certificate ``lambda_1 = 2`` and ``lambda_1 A``
cli         command-line entry point
"""

from . import _backend
from .errors import (DivergenceError, DomainError, IntegrationError, KextError,
                     PreconditionError, SingularMapError)

__version__ = "0.1.0"

backend = _backend.active.NAME

__all__ = [
    "DivergenceError", "DomainError", "IntegrationError", "KextError",
    "PreconditionError", "SingularMapError", "backend", "__version__",
]
