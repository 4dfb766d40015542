"""Jacobi and Gegenbauer polynomials, their derivatives and normalising constants.

Polynomials are evaluated by the three-term recurrence, vectorised over the
argument.  The finite hypergeometric sum (:func:`jacobi_eval_explicit`) is kept
as an independent oracle; its float form also seeds the recurrence for degrees
up to three, which keeps every recurrence denominator non-zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import mpmath
import numpy as np

from .scalar import LOG_SQRT_PI, log_gamma, pochhammer

__all__ = [
    "JacobiParams",
    "jacobi_eval",
    "jacobi_eval_explicit",
    "jacobi_sequence",
    "jacobi_deriv",
    "jacobi_deriv2",
    "jacobi_at_one",
    "gegenbauer_eval",
    "log_norm_h",
    "norm_h",
    "frak_c",
    "frak_d",
    "log_frak_d",
    "jacobi_operator_residual",
    "sup_bound",
]

_HALF = 0.5


@dataclass(frozen=True)
class JacobiParams:
    """Parameter pair ``(alpha, beta)`` of a Jacobi system."""

    alpha: float
    beta: float

    def validate(self) -> "JacobiParams":
        if not (self.alpha > -1 and self.beta > -1):
            raise ValueError(f"kernel parameters must satisfy alpha, beta > -1 (got {self.alpha}, {self.beta})")
        return self

    @property
    def case(self) -> str:
        """Branch of the reduction / product formulas: ``'i'`` ... ``'v'``."""
        a, b = self.alpha, self.beta
        if a >= -_HALF and b >= -_HALF:
            return "i"
        if b < -_HALF <= a:
            return "ii"
        if a < -_HALF <= b:
            return "iii"
        return "iv" if a + b > -1.5 else "v"

    @property
    def lam(self) -> float:
        """Ultraspherical index ``alpha + beta + 1/2`` used by the product formula."""
        return self.alpha + self.beta + 0.5

    def __iter__(self):
        yield self.alpha
        yield self.beta


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _recurrence_coefficients(n, a, b):
    # P_n = (c1 x + c0) P_{n-1} - c2 P_{n-2}; generic over float and mpf
    s = 2 * n + a + b
    den = 2 * n * (n + a + b) * (s - 2)
    c1 = (s - 1) * s * (s - 2) / den
    c0 = (s - 1) * (a * a - b * b) / den
    c2 = 2 * (n + a - 1) * (n + b - 1) * s / den
    return c1, c0, c2


# Below this degree the explicit sum seeds the recurrence; it keeps every
# recurrence denominator non-zero for alpha + beta > -4.
_SEED_DEGREE = 3


def _explicit_float(n: int, alpha: float, beta: float, xa: np.ndarray) -> np.ndarray:
    y = (xa - 1.0) / 2.0
    out = np.zeros_like(xa)
    yk = np.ones_like(xa)
    for k in range(n + 1):
        coef = math.comb(n, k) * pochhammer(n + alpha + beta + 1, k) * pochhammer(alpha + k + 1, n - k)
        out = out + coef * yk
        yk = yk * y
    return out / math.factorial(n)


def jacobi_eval_explicit(n: int, alpha: float, beta: float, x):
    """Finite hypergeometric sum for ``P_n^{alpha,beta}(x)``, valid for any real parameters.

    The alternating sum cancels badly as ``n`` grows, so it is accumulated in
    extended precision (``30 + n`` digits) and rounded once.  Slow; meant as an
    oracle and for parameters where the recurrence is unusable.
    """
    xa, scalar = _as_array(x)
    if n < 0:
        out = np.zeros_like(xa)
    else:
        with mpmath.workdps(30 + n):
            a, b = mpmath.mpf(alpha), mpmath.mpf(beta)
            coefs = [
                mpmath.binomial(n, k) * mpmath.rf(n + a + b + 1, k) * mpmath.rf(a + k + 1, n - k) / mpmath.factorial(n)
                for k in range(n + 1)
            ]
            flat = [mpmath.polyval(coefs[::-1], (mpmath.mpf(float(v)) - 1) / 2) for v in xa.ravel()]
        out = np.array([float(v) for v in flat], dtype=float).reshape(xa.shape)
    return float(out) if scalar else out


def jacobi_sequence(nmax: int, alpha: float, beta: float, x) -> Iterator[np.ndarray]:
    """Yield ``P_0, P_1, ..., P_nmax`` evaluated at ``x`` (as arrays)."""
    xa = np.asarray(x, dtype=float)
    prev2 = prev1 = None
    for n in range(nmax + 1):
        if n <= _SEED_DEGREE:
            cur = _explicit_float(n, alpha, beta, xa)
        else:
            c1, c0, c2 = _recurrence_coefficients(n, alpha, beta)
            cur = (c1 * xa + c0) * prev1 - c2 * prev2
        yield cur
        prev2, prev1 = prev1, cur


def jacobi_eval(n: int, alpha: float, beta: float, x):
    """``P_n^{alpha,beta}(x)`` by the three-term recurrence; zero for ``n < 0``."""
    xa, scalar = _as_array(x)
    if n < 0:
        out = np.zeros_like(xa)
    else:
        for out in jacobi_sequence(n, alpha, beta, xa):
            pass
    return float(out) if scalar else out


def jacobi_at_one(n: int, alpha: float) -> float:
    """``P_n^{alpha,beta}(1) = (alpha+1)_n / n!``."""
    if n < 0:
        return 0.0
    if n < 30:
        return pochhammer(alpha + 1, n) / math.factorial(n)
    if alpha + 1 <= 0 and alpha + 1 == math.floor(alpha + 1):
        return 0.0
    return _gamma_ratio_at_one(n, alpha)


def _gamma_ratio_at_one(n: int, alpha: float) -> float:
    lg, sg = log_gamma(n + alpha + 1)
    la, sa = log_gamma(alpha + 1)
    return sg * sa * math.exp(lg - math.lgamma(n + 1) - la)


def jacobi_deriv(n: int, alpha: float, beta: float, x):
    """``d/dx P_n^{alpha,beta}(x) = (n+alpha+beta+1)/2 * P_{n-1}^{alpha+1,beta+1}(x)``."""
    xa, scalar = _as_array(x)
    if n <= 0:
        out = np.zeros_like(xa)
    else:
        out = 0.5 * (n + alpha + beta + 1) * np.asarray(jacobi_eval(n - 1, alpha + 1, beta + 1, xa))
    return float(out) if scalar else out


def jacobi_deriv2(n: int, alpha: float, beta: float, x):
    xa, scalar = _as_array(x)
    if n <= 1:
        out = np.zeros_like(xa)
    else:
        fac = 0.25 * (n + alpha + beta + 1) * (n + alpha + beta + 2)
        out = fac * np.asarray(jacobi_eval(n - 2, alpha + 2, beta + 2, xa))
    return float(out) if scalar else out


def gegenbauer_eval(n: int, lam: float, x):
    """Gegenbauer polynomial ``C_n^lam(x)`` through its Jacobi representation."""
    if not lam > -0.5 or lam == 0:
        raise ValueError("gegenbauer_eval requires lam > -1/2 and lam != 0")
    xa, scalar = _as_array(x)
    if n < 0:
        out = np.zeros_like(xa)
    else:
        l1, s1 = log_gamma(lam + 0.5)
        l2, s2 = log_gamma(2 * lam)
        l3, s3 = log_gamma(n + 2 * lam)
        l4, s4 = log_gamma(n + lam + 0.5)
        link = s1 * s2 * s3 * s4 * math.exp(l1 - l2 + l3 - l4)
        out = link * np.asarray(jacobi_eval(n, lam - 0.5, lam - 0.5, xa))
    return float(out) if scalar else out


def log_norm_h(n: int, alpha: float, beta: float) -> float:
    """``log h_n^{alpha,beta}``, the squared norm of ``P_n`` in ``L^2((1-x)^a (1+x)^b dx)``."""
    if n < 0:
        raise ValueError("norm index must be non-negative")
    top = (alpha + beta + 1) * math.log(2.0) + math.lgamma(n + alpha + 1) + math.lgamma(n + beta + 1)
    if n == 0:
        # (2n+a+b+1) Gamma(n+a+b+1) is replaced by Gamma(a+b+2) at n = 0
        bottom = math.lgamma(alpha + beta + 2)
    else:
        bottom = math.log(2 * n + alpha + beta + 1) + math.lgamma(n + alpha + beta + 1) + math.lgamma(n + 1)
    return top - bottom


def norm_h(n: int, alpha: float, beta: float) -> float:
    return math.exp(log_norm_h(n, alpha, beta))


def frak_c(n: int, alpha: float, beta: float) -> float:
    """Constant of the compact product formula; strictly positive for alpha, beta > -1."""
    if n == 0:
        return math.exp(math.lgamma(alpha + beta + 2) - LOG_SQRT_PI - math.lgamma(alpha + beta + 2.5))
    val = (
        math.lgamma(alpha + 1)
        + math.lgamma(beta + 1)
        + math.log(2 * n + alpha + beta + 1)
        + math.lgamma(n + alpha + beta + 1)
        + math.lgamma(n + 1)
        - LOG_SQRT_PI
        - math.lgamma(alpha + beta + 2.5)
        - math.lgamma(n + alpha + 1)
        - math.lgamma(n + beta + 1)
    )
    return math.exp(val)


def log_frak_d(k: int, lam: float) -> tuple[float, int]:
    """``(log|D_k^lam|, sign)`` for the ultraspherical constant ``D_k^lam``."""
    if k < 0:
        raise ValueError("order must be non-negative")
    if k == 0:
        if not lam > -1.5:
            raise ValueError("D_0^lam requires lam > -3/2")
        l1, s1 = log_gamma(lam + 1.5)
        l2, s2 = log_gamma(lam + 2)
        return l1 - LOG_SQRT_PI - l2, s1 * s2
    if k % 2 and lam <= -1:
        raise ValueError("odd orders of D_k^lam are only defined for lam > -1")
    if not lam > -1.5:
        raise ValueError("D_k^lam requires lam > -3/2")
    lin = 2 * k + 2 * lam + 1
    l1, s1 = log_gamma(k + 2 * lam + 1)
    l2, s2 = log_gamma(lam + 2)
    l3, s3 = log_gamma(k + lam + 1)
    sign = (1 if lin > 0 else -1) * s1 * s2 * s3
    return math.log(abs(lin)) + l1 - (2 * lam + 1) * math.log(2.0) - l2 - l3, sign


def frak_d(k: int, lam: float) -> float:
    lv, s = log_frak_d(k, lam)
    return s * math.exp(lv)


def jacobi_operator_residual(n: int, alpha: float, beta: float, x):
    """``J P_n - n(n+alpha+beta+1) P_n`` with derivatives taken from the derivative formula."""
    xa, scalar = _as_array(x)
    p = np.asarray(jacobi_eval(n, alpha, beta, xa))
    d1 = np.asarray(jacobi_deriv(n, alpha, beta, xa))
    d2 = np.asarray(jacobi_deriv2(n, alpha, beta, xa))
    jp = -(1 - xa * xa) * d2 - (beta - alpha - (alpha + beta + 2) * xa) * d1
    out = jp - n * (n + alpha + beta + 1) * p
    return float(out) if scalar else out


def _szego_max(n: int, q: float) -> float:
    # max |P_n^{a,b}| on [-1,1] = binom(n+q, n) when q = max(a,b) >= -1/2
    if n < 0:
        return 0.0
    return math.exp(math.lgamma(n + q + 1) - math.lgamma(n + 1) - math.lgamma(q + 1))


_SAMPLE = np.linspace(-1.0, 1.0, 4001)


def sup_bound(n: int, alpha: float, beta: float) -> float:
    """Upper bound for ``max_{[-1,1]} |P_n^{alpha,beta}|``.

    Exact (Szego) when both parameters exceed -1 and the larger is at least
    -1/2.  Otherwise, for parameters above -2, the polynomial is written via two
    contiguous relations in terms of ``P^{alpha+1,beta+1}`` of degrees
    ``n, n-1, n-2`` and the Szego maxima of those are combined.  Degrees where a
    contiguous denominator vanishes fall back to dense sampling with a 5%
    margin.
    """
    if n < 0:
        return 0.0
    if n == 0:
        return 1.0
    a, b = alpha, beta
    if a > -1 and b > -1 and max(a, b) >= -0.5:
        return _szego_max(n, max(a, b))
    if not (a > -2 and b > -2 and max(a, b) >= -1.5):
        raise ValueError("sup_bound supports alpha, beta > -2 with max(alpha, beta) >= -3/2")
    q = max(a, b) + 1

    def mid(m: int) -> float:
        # bound for P_m^{a+1, b}
        if m < 0:
            return 0.0
        den = 2 * m + a + b + 2
        if m == 0:
            return 1.0
        if abs(den) < 1e-9:
            return float("nan")
        return (abs(m + a + b + 2) * _szego_max(m, q) + abs(m + a + 1) * _szego_max(m - 1, q)) / abs(den)

    den = 2 * n + a + b + 1
    m1, m0 = mid(n), mid(n - 1)
    if abs(den) < 1e-9 or math.isnan(m1) or math.isnan(m0):
        vals = np.abs(_explicit_float(n, a, b, _SAMPLE))
        return 1.05 * float(vals.max()) + 1e-12
    return (abs(n + a + b + 1) * m1 + abs(n + b) * m0) / abs(den)
