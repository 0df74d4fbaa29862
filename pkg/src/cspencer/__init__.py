"""Certified numerics for unimodular discrepancy, toric bodies and Banach-Mazur distances."""
from .core import OMEGA, PhaseVector, TorusPoint, load_cmat, loads_cmat, save_cmat
from .errors import (CSpencerError, DimensionError, DomainError, LemmaViolation, NotFoundError,
                     ParseError, TheoremViolation)
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "OMEGA", "PhaseVector", "TorusPoint", "load_cmat", "loads_cmat", "save_cmat",
    "CSpencerError", "DimensionError", "DomainError", "LemmaViolation", "NotFoundError",
    "ParseError", "TheoremViolation", "__version__",
]
