"""Numerics for asymptotically flat manifolds with conical and horn singularities.

ADM mass from flux integrals, cone/horn warped-product geometry, Dirac spectra
and indicial roots of cross sections, radial Dirac modes with their Green
operator, weighted norms, and the Herzlich boundary condition.
"""

from .errors import ConemassError, DivergentIntegralError, HypothesisViolation, NumericalError, UnsupportedError

__version__ = "0.1.0"

__all__ = [
    "ConemassError",
    "DivergentIntegralError",
    "HypothesisViolation",
    "NumericalError",
    "UnsupportedError",
    "__version__",
]
