"""
Numerical building blocks shared by every coverage formula: an adaptive
quadrature wrapper and the interference kernels Q and Z.
"""
import math
from functools import lru_cache
from typing import Callable, Tuple

from scipy import integrate

from utils.errors import ConvergenceError, DomainError

DEFAULT_TOL = 1e-8
MAX_SUBDIVISIONS = 500


def adaptive_integrate(f:Callable[[float], float], lo:float=0., hi:float=math.inf,
                       tol:float=DEFAULT_TOL) -> Tuple[float, float]:
    """
    Integrates f over [lo, hi] with scipy's adaptive Gauss-Kronrod scheme and
    returns (value, residual), residual being quad's error estimate.

    A semi-infinite range [lo, inf) is mapped onto [0, 1) with y = lo + u / (1 - u),
    i.e. u = (y - lo) / (1 + y - lo), so the integrand becomes
    f(lo + u / (1 - u)) / (1 - u)^2. All our integrands decay at least
    algebraically, so the transformed one is either bounded or has an integrable
    endpoint singularity at u = 1 that the extrapolation in QAGS handles.

    Raises ConvergenceError when the residual exceeds tol * max(1, |value|)
    after MAX_SUBDIVISIONS interval bisections.
    """
    if not tol > 0:
        raise DomainError('quadrature tolerance must be > 0, got %r' % (tol,))
    if hi < lo:
        value, residual = adaptive_integrate(f, hi, lo, tol)
        return -value, residual
    if hi == lo:
        return 0., 0.

    if math.isinf(hi):
        def g(u):
            w = 1. - u
            if w <= 0.:
                return 0.
            val = f(lo + u / w)
            return val / (w * w) if val != 0. else 0.
        a, b = 0., 1.
    else:
        g, a, b = f, lo, hi

    value, residual, info, *msg = integrate.quad(g, a, b, epsabs=tol, epsrel=tol,
                                                 limit=MAX_SUBDIVISIONS, full_output=1)

    if not math.isfinite(value) or residual > tol * max(1., abs(value)):
        raise ConvergenceError('quadrature over [%g, %g] did not converge after %d evaluations'
                               % (lo, hi, info['neval']), residual)

    return value, residual


def _check_kernel_args(t, b, c):
    if not t >= 0:
        raise DomainError('threshold t must be >= 0, got %r' % (t,))
    if not b > 2:
        raise DomainError('path loss exponent must be > 2 for the interference integral to converge, got %r' % (b,))
    if not c > 0:
        raise DomainError('bias ratio c must be > 0, got %r' % (c,))

@lru_cache(maxsize=65536)
def _z_numeric(t:float, b:float, c:float, tol:float) -> float:
    lower = (c / t) ** (2. / b)
    half_b = b / 2.
    value, _ = adaptive_integrate(lambda u: 1. / (1. + u ** half_b), lower, math.inf, tol)
    return t ** (2. / b) * value

def z_kernel(t:float, b:float, c:float, tol:float=DEFAULT_TOL, closed:bool=True) -> float:
    """
    Z(t, b, c) = t^(2/b) * int_{(c/t)^(2/b)}^inf du / (1 + u^(b/2)),
    the interference part of Q. For b = 4 this is sqrt(t) * arctan(sqrt(t / c)).
    """
    _check_kernel_args(t, b, c)

    if t == 0:
        return 0.
    if closed and b == 4:
        return math.sqrt(t) * math.atan(math.sqrt(t / c))
    return _z_numeric(float(t), float(b), float(c), float(tol))

def q_kernel(t:float, b:float, c:float, tol:float=DEFAULT_TOL, closed:bool=True) -> Tuple[float, float]:
    """
    Returns (Q, Z) with Q(t, b, c) = c^(2/b) + Z(t, b, c).

    c^(2/b) is the exclusion (association) part, Z the interference part.
    With closed=False the b = 4 arctan shortcut is skipped and the integral
    is always evaluated numerically.
    """
    z = z_kernel(t, b, c, tol, closed)
    return c ** (2. / b) + z, z
