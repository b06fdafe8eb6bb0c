"""Adaptive Gauss-Kronrod quadrature on finite intervals (QUADPACK via scipy)."""

from typing import Callable

from scipy import integrate

from .errors import NumericError

EPSABS = 1e-12
EPSREL = 1e-12


def integrate_smooth(fn: Callable[[float], float], a: float = 0.0, b: float = 1.0,
                     epsabs: float = EPSABS, epsrel: float = EPSREL, limit: int = 200):
    """Return (value, error estimate).

    Raises NumericError unless QUADPACK converged.  A roundoff warning is
    accepted when the error estimate still meets the requested tolerance,
    which happens for integrands already resolved to machine precision.
    """
    res = integrate.quad(fn, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
    value, err = res[0], res[1]
    if len(res) > 3:
        tol = max(epsabs, epsrel * abs(value))
        if not ("roundoff" in str(res[3]) and err <= 100 * tol):
            raise NumericError(f"quadrature did not converge: {res[3]}")
    return value, err
