"""Endpoint measures on [-1, 1] and the quadrature engines that integrate against them.

Four measure kinds appear in the product and reduction formulas:

* ``gegenbauer``  -- ``dPi_gamma(u) = c_gamma (1-u^2)^(gamma-1/2) du`` for ``gamma > -1/2``,
  a probability measure, integrated by Gauss-Jacobi.
* ``atoms``       -- ``dPi_{-1/2} = (delta_{-1} + delta_{+1}) / 2``.
* ``signed_pi``   -- the signed density ``Pi_gamma(v) dv`` for ``gamma in (-1, -1/2)``;
  odd, negative on (0, 1) and with an integrable ``(1-|v|)^(gamma+1/2)`` edge,
  integrated by tanh-sinh.
* ``lebesgue``    -- plain ``du``.

Every rule carries, next to its nodes, the distance ``gap = 1 - |node|`` computed
without cancellation, so densities singular at the endpoints can be evaluated
accurately at double-exponentially clustered nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .scalar import SQRT_PI, incomplete_beta, log_gamma

__all__ = [
    "QuadratureRule",
    "EndpointMeasure",
    "ToleranceNotMet",
    "pi_function",
    "pi_density",
    "pi_density_constant",
    "gauss_jacobi_rule",
    "gegenbauer_rule",
    "tanh_sinh_rule",
    "double_exponential",
    "integrate",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_LEVEL = 12


class ToleranceNotMet(ArithmeticError):
    """A quadrature error estimate exceeded the requested tolerance."""


# --------------------------------------------------------------------------
# Pi_gamma
# --------------------------------------------------------------------------


def pi_density_constant(gamma: float) -> float:
    """``Gamma(gamma+1) / (sqrt(pi) Gamma(gamma+1/2))``; negative for gamma in (-1, -1/2)."""
    if gamma == -0.5:
        raise ValueError("Pi_gamma is undefined at gamma = -1/2 (the measure is the atom pair)")
    l1, s1 = log_gamma(gamma + 1)
    l2, s2 = log_gamma(gamma + 0.5)
    return s1 * s2 * math.exp(l1 - l2) / SQRT_PI


def _half_integral(gamma: float, u: float, gap: float) -> float:
    # int_0^u (1-w^2)^(gamma-1/2) dw for 0 <= u <= 1, gap = 1 - u
    if u == 0.0:
        return 0.0
    one_minus_sq = gap * (1.0 + u)
    if gamma > -0.5:
        return 0.5 * incomplete_beta(u * u, 0.5, gamma + 0.5, complement=one_minus_sq)
    # Lower the singular exponent by parts:
    # (2g+1) int (1-w^2)^(g-1/2) = (2g+2) int (1-w^2)^(g+1/2) - u (1-u^2)^(g+1/2)
    smooth = 0.5 * incomplete_beta(u * u, 0.5, gamma + 1.5, complement=one_minus_sq)
    edge = u * one_minus_sq ** (gamma + 0.5) if one_minus_sq > 0 else math.inf
    return ((2 * gamma + 2) * smooth - edge) / (2 * gamma + 1)


def _pi_scalar(gamma: float, u: float, gap: float | None) -> float:
    au = abs(u)
    g = 1.0 - au if gap is None else gap
    val = pi_density_constant(gamma) * _half_integral(gamma, au, g)
    if u == 0:
        return 0.0
    return val if u > 0 else -val


def pi_function(gamma: float, u, gap=None):
    """``Pi_gamma(u) = c_gamma * int_0^u (1-w^2)^(gamma-1/2) dw`` (odd in ``u``).

    Parameters
    ----------
    gamma : float
        ``gamma > -1``, ``gamma != -1/2``.
    u : float or array_like
        Points in ``[-1, 1]``.
    gap : array_like, optional
        Accurate values of ``1 - |u|``.
    """
    if not gamma > -1:
        raise ValueError("pi_function requires gamma > -1")
    ua = np.asarray(u, dtype=float)
    if np.any(np.abs(ua) > 1):
        raise ValueError("pi_function argument outside [-1, 1]")
    ga = None if gap is None else np.broadcast_to(np.asarray(gap, dtype=float), ua.shape)
    flat_u = ua.ravel()
    flat_g = [None] * flat_u.size if ga is None else ga.ravel()
    out = np.array([_pi_scalar(gamma, float(x), None if g is None else float(g)) for x, g in zip(flat_u, flat_g)])
    out = out.reshape(ua.shape)
    return float(out) if ua.ndim == 0 else out


def pi_density(gamma: float, u, gap=None):
    """Density ``c_gamma (1-u^2)^(gamma-1/2)`` of ``dPi_gamma`` (signed for gamma < -1/2)."""
    ua = np.asarray(u, dtype=float)
    g = 1.0 - np.abs(ua) if gap is None else np.asarray(gap, dtype=float)
    with np.errstate(divide="ignore"):
        out = pi_density_constant(gamma) * (g * (2.0 - g)) ** (gamma - 0.5)
    return float(out) if ua.ndim == 0 else out


# --------------------------------------------------------------------------
# Rules
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights on [-1, 1].

    ``exact_degree`` is the polynomial degree integrated exactly (``-1`` when
    the rule has no such guarantee, as for tanh-sinh).
    """

    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int = -1
    gap: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.gap is None:
            object.__setattr__(self, "gap", 1.0 - np.abs(self.nodes))
        for name in ("nodes", "weights", "gap"):
            getattr(self, name).setflags(write=False)

    def __len__(self) -> int:
        return self.nodes.size

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def scaled(self, factor) -> "QuadratureRule":
        return QuadratureRule(self.nodes, self.weights * factor, self.exact_degree, self.gap)


def _jacobi_recurrence(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    # diagonal and off-diagonal of the Jacobi matrix of the monic Jacobi polynomials
    k = np.arange(n, dtype=float)
    s = 2 * k + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (b * b - a * a) / (s * (s + 2))
    diag[0] = (b - a) / (a + b + 2)
    k = np.arange(1, n, dtype=float)
    s = 2 * k + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        off2 = 4 * k * (k + a) * (k + b) * (k + a + b) / (s * s * (s + 1) * (s - 1))
    if n > 1:
        off2[0] = 4 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b))
    return diag, np.sqrt(off2)


@lru_cache(maxsize=256)
def gauss_jacobi_rule(a_exp: float, b_exp: float, n_nodes: int) -> QuadratureRule:
    """Gauss rule for the weight ``(1-u)^a_exp (1+u)^b_exp`` on [-1, 1] (Golub-Welsch).

    The rule is exact for polynomials of degree ``2 n_nodes - 1``.
    """
    if not (a_exp > -1 and b_exp > -1):
        raise ValueError("Gauss-Jacobi exponents must exceed -1")
    if n_nodes < 1:
        raise ValueError("need at least one node")
    diag, off = _jacobi_recurrence(a_exp, b_exp, n_nodes)
    if n_nodes == 1:
        nodes, vecs = diag.copy(), np.ones((1, 1))
    else:
        try:
            nodes, vecs = eigh_tridiagonal(diag, off)
        except np.linalg.LinAlgError as exc:
            raise ArithmeticError(f"Golub-Welsch eigen-solver failed: {exc}") from exc
    mass = math.exp((a_exp + b_exp + 1) * math.log(2.0) + math.lgamma(a_exp + 1) + math.lgamma(b_exp + 1)
                    - math.lgamma(a_exp + b_exp + 2))
    weights = mass * vecs[0, :] ** 2
    if a_exp == b_exp:
        # the weight is even: symmetrise to remove rounding skew
        nodes = 0.5 * (nodes - nodes[::-1])
        weights = 0.5 * (weights + weights[::-1])
        if n_nodes % 2:
            nodes[n_nodes // 2] = 0.0
    return QuadratureRule(nodes, weights, 2 * n_nodes - 1, 1.0 - np.abs(nodes))


def gegenbauer_rule(gamma: float, n_nodes: int) -> QuadratureRule:
    """Gauss rule for the probability measure ``dPi_gamma``, ``gamma > -1/2``."""
    if not gamma > -0.5:
        raise ValueError("dPi_gamma is a weighted measure only for gamma > -1/2")
    base = gauss_jacobi_rule(gamma - 0.5, gamma - 0.5, n_nodes)
    return base.scaled(pi_density_constant(gamma))


_TS_GAP_FLOOR = 1e-300


@lru_cache(maxsize=64)
def tanh_sinh_rule(level: int, t_max: float = 6.5) -> QuadratureRule:
    """tanh-sinh nodes on [-1, 1] with step ``2**-level``.

    Nodes whose distance to the endpoint underflows are dropped.
    """
    h = 2.0 ** -level
    kmax = int(math.ceil(t_max / h))
    t = h * np.arange(-kmax, kmax + 1)
    y = 0.5 * math.pi * np.sinh(t)
    with np.errstate(over="ignore"):
        gap = 2.0 / (1.0 + np.exp(2.0 * np.abs(y)))
    keep = gap > _TS_GAP_FLOOR
    t, y, gap = t[keep], y[keep], gap[keep]
    nodes = np.sign(y) * (1.0 - gap)
    weights = h * 0.5 * math.pi * np.cosh(t) * gap * (2.0 - gap)
    return QuadratureRule(nodes, weights, -1, gap)


def _ts_increment(level: int, t_max: float) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    # nodes new at this level (odd multiples of h), for level-doubling on [0, 1]-free form
    h = 2.0 ** -level
    kmax = int(math.ceil(t_max / h))
    k = np.arange(-kmax, kmax + 1)
    if level > 0:
        k = k[k % 2 == 1]
    t = h * k
    y = 0.5 * math.pi * np.sinh(t)
    with np.errstate(over="ignore"):
        gap = 2.0 / (1.0 + np.exp(2.0 * np.abs(y)))
    keep = gap > _TS_GAP_FLOOR
    t, y, gap = t[keep], y[keep], gap[keep]
    w = 0.5 * math.pi * np.cosh(t) * gap * (2.0 - gap)
    return np.sign(y), gap, w, h


def double_exponential(f: Callable, a: float, b: float, tol: float = DEFAULT_TOL,
                       max_level: int = DEFAULT_MAX_LEVEL) -> float:
    """Integrate ``f`` over ``[a, b]`` by tanh-sinh with level doubling.

    ``f`` is called with numpy arrays and may have integrable power-law
    singularities at either endpoint; it is never evaluated exactly at ``a`` or
    ``b``.  Stops when successive levels differ by at most
    ``tol * max(1, |I|)``.

    Raises
    ------
    ToleranceNotMet
        If ``max_level`` is reached first.
    """
    half = 0.5 * (b - a)
    total = 0.0
    prev = None
    for level in range(0, max_level + 1):
        side, gap, w, h = _ts_increment(level, 6.5)
        x = np.where(side < 0, a + half * gap, b - half * gap)
        inside = (x > a) & (x < b)
        vals = np.zeros_like(x)
        vals[inside] = f(x[inside])
        s = float(np.dot(w[inside], vals[inside])) * half
        total = s * h if level == 0 else 0.5 * total + s * h
        if prev is not None and level >= 3 and abs(total - prev) <= tol * max(1.0, abs(total)):
            return total
        prev = total
    raise ToleranceNotMet(f"tanh-sinh did not reach tol={tol} within {max_level} levels")


# --------------------------------------------------------------------------
# Measures
# --------------------------------------------------------------------------

_KINDS = ("gegenbauer", "atoms", "signed_pi", "lebesgue")


@dataclass(frozen=True)
class EndpointMeasure:
    """One of the four endpoint measures on [-1, 1]."""

    kind: str
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.kind == "gegenbauer" and not (self.gamma is not None and self.gamma > -0.5):
            raise ValueError("Gegenbauer weight needs gamma > -1/2")
        if self.kind == "signed_pi" and not (self.gamma is not None and -1 < self.gamma < -0.5):
            raise ValueError("signed Pi density needs gamma in (-1, -1/2)")

    @classmethod
    def d_pi(cls, gamma: float) -> "EndpointMeasure":
        """``dPi_gamma`` for ``gamma >= -1/2``."""
        if gamma == -0.5:
            return cls("atoms")
        return cls("gegenbauer", gamma)

    @classmethod
    def pi_dv(cls, gamma: float) -> "EndpointMeasure":
        """``Pi_gamma(v) dv`` for ``gamma in (-1, -1/2)``."""
        return cls("signed_pi", gamma)

    @property
    def mass(self) -> float:
        if self.kind in ("gegenbauer", "atoms"):
            return 1.0
        if self.kind == "lebesgue":
            return 2.0
        return 0.0

    def rule(self, n_nodes: int = 80, level: int = 4) -> QuadratureRule:
        """Discretise the measure: Gauss nodes for weighted kinds, tanh-sinh for the signed density."""
        if self.kind == "atoms":
            return QuadratureRule(np.array([-1.0, 1.0]), np.array([0.5, 0.5]), 10 ** 9, np.zeros(2))
        if self.kind == "gegenbauer":
            return gegenbauer_rule(self.gamma, n_nodes)
        if self.kind == "lebesgue":
            return gauss_jacobi_rule(0.0, 0.0, n_nodes)
        return signed_pi_rule(self.gamma, level)


@lru_cache(maxsize=64)
def signed_pi_rule(gamma: float, level: int) -> QuadratureRule:
    """tanh-sinh rule whose weights absorb ``Pi_gamma(v)``, for the signed density kind."""
    base = tanh_sinh_rule(level)
    dens = pi_function(gamma, base.nodes, gap=base.gap)
    return QuadratureRule(base.nodes, base.weights * dens, -1, base.gap)


def integrate(m: EndpointMeasure, f: Callable, tol: float = DEFAULT_TOL) -> float:
    """Integrate ``f`` against the endpoint measure ``m`` to within ``tol``.

    Gauss rules are checked by comparing ``n`` and ``3n/2`` nodes; the signed
    density by tanh-sinh level doubling.
    """
    if m.kind == "atoms":
        vals = f(np.array([-1.0, 1.0]))
        return 0.5 * float(vals[0] + vals[1])
    if m.kind in ("gegenbauer", "lebesgue"):
        n = 16
        prev = m.rule(n).apply(f)
        while n < 1024:
            n *= 2
            cur = m.rule(n).apply(f)
            if abs(cur - prev) <= tol * max(1.0, abs(cur)):
                return cur
            prev = cur
        raise ToleranceNotMet(f"Gauss rule did not converge to tol={tol}")
    gamma = m.gamma
    prev = None
    for level in range(2, DEFAULT_MAX_LEVEL + 1):
        cur = signed_pi_rule(gamma, level).apply(f)
        if prev is not None and abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise ToleranceNotMet(f"signed density integral did not reach tol={tol}")
