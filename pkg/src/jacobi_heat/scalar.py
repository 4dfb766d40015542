"""Gamma-family scalar functions.

Every normalising constant in the package is assembled from these in log
space and exponentiated once, so that ratios such as ``h_n`` stay finite for
polynomial degrees in the thousands.
"""

from __future__ import annotations

import math

__all__ = [
    "PoleError",
    "log_gamma",
    "gamma_sign",
    "pochhammer",
    "incomplete_beta",
    "beta",
    "log_beta",
]

SQRT_PI = math.sqrt(math.pi)
LOG_SQRT_PI = 0.5 * math.log(math.pi)


class PoleError(ValueError):
    """Raised when a gamma-type function is evaluated at one of its poles."""


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def gamma_sign(x: float) -> int:
    if _is_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at {x!r}")
    if x > 0:
        return 1
    return -1 if int(math.floor(x)) % 2 else 1


def log_gamma(x: float) -> tuple[float, int]:
    """Return ``(ln|Gamma(x)|, sign(Gamma(x)))``.

    Negative arguments go through the reflection formula (done inside
    :func:`math.lgamma`); the sign is read off the integer part.

    Raises
    ------
    PoleError
        If ``x`` is zero or a negative integer.
    """
    x = float(x)
    sign = gamma_sign(x)
    return math.lgamma(x), sign


def pochhammer(a: float, k: int) -> float:
    """Rising factorial ``(a)_k = a (a+1) ... (a+k-1)`` with ``(a)_0 = 1``."""
    if k < 0:
        raise ValueError("pochhammer order must be non-negative")
    out = 1.0
    for j in range(k):
        out *= a + j
    return out


def log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def beta(a: float, b: float) -> float:
    la, sa = log_gamma(a)
    lb, sb = log_gamma(b)
    lab, sab = log_gamma(a + b)
    return sa * sb * sab * math.exp(la + lb - lab)


_CF_TINY = 1e-300
_CF_EPS = 1e-16
_CF_MAXIT = 2000


def _betacf(x: float, a: float, b: float) -> float:
    # modified Lentz evaluation of the continued fraction for I_x(a, b)
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (x={x}, a={a}, b={b})")


def _lower_tail(x: float, xc: float, a: float, b: float) -> float:
    # xc = 1 - x, supplied separately to keep precision near x = 1
    # B(x; a, b) from the continued fraction, valid when x <= a / (a + b)
    if x == 0.0:
        return 0.0
    front = math.exp(a * math.log(x) + b * math.log(xc))
    return front * _betacf(x, a, b) / a


def incomplete_beta(x: float, a: float, b: float, *, complement: float | None = None) -> float:
    """Unregularised incomplete beta ``B(x; a, b) = int_0^x v^(a-1) (1-v)^(b-1) dv``.

    Parameters
    ----------
    x : float
        Upper limit in ``[0, 1]``.
    a, b : float
        Positive shape parameters.
    complement : float, optional
        ``1 - x`` when the caller knows it more accurately than ``1 - x``
        computed in floating point (endpoint-clustered quadrature nodes).
    """
    if not (a > 0 and b > 0):
        raise ValueError("incomplete_beta requires a > 0 and b > 0")
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"incomplete_beta argument {x!r} outside [0, 1]")
    xc = 1.0 - x if complement is None else float(complement)
    if xc < 0.0 or xc > 1.0:
        raise ValueError(f"complement {xc!r} outside [0, 1]")
    if xc == 0.0:
        return beta(a, b)
    if x == 0.0:
        return 0.0
    if x <= a / (a + b):
        return _lower_tail(x, xc, a, b)
    # symmetry switch: B(x; a, b) = B(a, b) - B(1 - x; b, a)
    return beta(a, b) - _lower_tail(xc, x, b, a)
