"""Product formula for Jacobi polynomials over all parameters alpha, beta > -1.

``c_n P_n(cos th) P_n(cos ph)`` is written as double integrals of single
ultraspherical polynomials ``Phi_k^lam`` of the combined argument
``u sin(th/2) sin(ph/2) + v cos(th/2) cos(ph/2)`` against endpoint measures.
Two right-hand sides are provided: the case-split form (:func:`dk_rhs`) and
the regularised four-term form built from even parts and second differences
(:func:`int1_rhs`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .jacobi import JacobiParams, _recurrence_coefficients, frak_c, frak_d, jacobi_eval
from .measures import (
    DEFAULT_MAX_LEVEL,
    EndpointMeasure,
    QuadratureRule,
    ToleranceNotMet,
    gegenbauer_rule,
    pi_density_constant,
    signed_pi_rule,
    tanh_sinh_rule,
)

__all__ = ["PhiArgs", "phi", "phi_even", "phi_partial", "dk_lhs", "dk_rhs", "int1_rhs"]

TAYLOR_GAP = 1e-6
_TAYLOR_ORDER = 3


@dataclass(frozen=True)
class PhiArgs:
    """Arguments of ``Phi_k^lam(theta, phi, u, v)``."""

    k: int
    lam: float
    theta: float
    phi: float
    u: float
    v: float


def _sc(theta: float, phi: float) -> tuple[float, float]:
    return math.sin(theta / 2) * math.sin(phi / 2), math.cos(theta / 2) * math.cos(phi / 2)


def _phi(k: int, lam: float, theta: float, phi_: float, u, v):
    if k < 0:
        return np.zeros(np.broadcast(np.asarray(u), np.asarray(v)).shape)
    s_, c_ = _sc(theta, phi_)
    z = np.asarray(u, dtype=float) * s_ + np.asarray(v, dtype=float) * c_
    return frak_d(k, lam) * np.asarray(jacobi_eval(k, lam, lam, z))


def phi(args: PhiArgs | int, *rest):
    """``D_k^lam P_k^{lam,lam}(u sin(th/2) sin(ph/2) + v cos(th/2) cos(ph/2))``; zero for ``k < 0``.

    Call as ``phi(PhiArgs(...))`` or ``phi(k, lam, theta, phi, u, v)`` (``u, v``
    may be arrays).
    """
    if isinstance(args, PhiArgs):
        a = args
        return float(_phi(a.k, a.lam, a.theta, a.phi, a.u, a.v))
    out = _phi(args, *rest)
    return float(out) if np.ndim(out) == 0 else out


def phi_partial(i: int, j: int, k: int, lam: float, theta: float, phi_: float, u, v):
    """``d^i/du^i d^j/dv^j Phi_k^lam`` from the derivative cascade.

    Each derivative lowers ``k`` by one, raises ``lam`` by one and contributes
    ``2(lam+m+2)`` times ``sin(th/2)sin(ph/2)`` (for ``u``) or
    ``cos(th/2)cos(ph/2)`` (for ``v``).
    """
    s_, c_ = _sc(theta, phi_)
    fac = 1.0
    for m in range(i + j):
        fac *= 2 * (lam + m + 2)
    fac *= s_ ** i * c_ ** j
    if fac == 0.0 or k - i - j < 0:
        return np.zeros(np.broadcast(np.asarray(u), np.asarray(v)).shape)
    return fac * _phi(k - i - j, lam + i + j, theta, phi_, u, v)


def phi_even(args: PhiArgs | int, *rest):
    """Even part in ``u`` and in ``v``: ``(1/4) sum_{xi, eta = +-1} Phi(xi u, eta v)``."""
    if isinstance(args, PhiArgs):
        k, lam, th, ph, u, v = args.k, args.lam, args.theta, args.phi, args.u, args.v
    else:
        k, lam, th, ph, u, v = (args, *rest)
    out = _phi_even_partial(0, 0, k, lam, th, ph, u, v)
    return float(out) if np.ndim(out) == 0 else out


def _phi_even_partial(i, j, k, lam, th, ph, u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    acc = 0.0
    for xi in (1.0, -1.0):
        for eta in (1.0, -1.0):
            acc = acc + xi ** i * eta ** j * phi_partial(i, j, k, lam, th, ph, xi * u, eta * v)
    return 0.25 * acc


# --------------------------------------------------------------------------
# Left-hand side and the case-split right-hand side
# --------------------------------------------------------------------------


def dk_lhs(n: int, p: JacobiParams, theta: float, phi_: float) -> float:
    """``c_n^{a,b} P_n^{a,b}(cos theta) P_n^{a,b}(cos phi)``, evaluated in extended precision."""
    p.validate()
    a, b = p
    pa = _jacobi_ld(n, _LD(a), _LD(b), np.cos(_LD(theta)))
    pb = _jacobi_ld(n, _LD(a), _LD(b), np.cos(_LD(phi_)))
    return float(_LD(frak_c(n, a, b)) * pa * pb)


# Case (i) sums cancel heavily near zeros of P_n, so they run in long double
# with rules computed in mpmath.
_LD = np.longdouble


def _jacobi_ld(n: int, a, b, x):
    """Three-term recurrence in the dtype of ``x``; valid for ``a, b > -1``."""
    x = np.asarray(x, dtype=_LD)
    p0 = np.ones_like(x)
    if n == 0:
        return p0
    p1 = (a + 1) + (a + b + 2) * (x - 1) / 2
    for m in range(2, n + 1):
        c1, c0, c2 = _recurrence_coefficients(m, a, b)
        p0, p1 = p1, (c1 * x + c0) * p1 - c2 * p0
    return p1


_MP_DPS = 60


@lru_cache(maxsize=None)
def _gegenbauer_rule_mp(gamma: float, n: int) -> tuple[list, list]:
    """Gauss rule for ``dPi_gamma`` (weight ``(1-u^2)^(gamma-1/2)``, unit mass) to
    ``_MP_DPS`` digits: double-precision nodes polished by Newton steps on the
    orthonormal recurrence, weights from the Christoffel function."""
    with mpmath.workdps(_MP_DPS + 10):
        c = mpmath.mpf(gamma) - mpmath.mpf(1) / 2
        sq = [mpmath.mpf(0)]
        for k in range(1, n + 1):
            if k == 1:
                beta = 4 * (1 + c) ** 2 / ((2 + 2 * c) ** 2 * (3 + 2 * c))
            else:
                s = 2 * k + 2 * c
                beta = 4 * k * (k + c) ** 2 * (k + 2 * c) / (s ** 2 * (s + 1) * (s - 1))
            sq.append(mpmath.sqrt(beta))

        def orth(x):
            # orthonormal values p_0..p_n and the derivative of p_n
            p = [mpmath.mpf(1), x / sq[1]]
            d = [mpmath.mpf(0), 1 / sq[1]]
            for k in range(1, n):
                p.append((x * p[k] - sq[k] * p[k - 1]) / sq[k + 1])
                d.append((p[k] + x * d[k] - sq[k] * d[k - 1]) / sq[k + 1])
            return p, d[n]

        nodes, weights = [], []
        for x0 in gegenbauer_rule(gamma, n).nodes[: (n + 1) // 2]:
            x = mpmath.mpf(float(x0))
            for _ in range(4):
                p, dp = orth(x)
                x -= p[n] / dp
            p, _ = orth(x)
            nodes.append(x)
            weights.append(1 / mpmath.fsum(v * v for v in p[:n]))
        if n % 2:
            nodes[-1] = mpmath.mpf(0)
        half = len(nodes) - (n % 2)
        nodes = nodes + [-x for x in reversed(nodes[:half])]
        weights = weights + list(reversed(weights[:half]))
        return nodes, weights


@lru_cache(maxsize=None)
def _gegenbauer_rule_ld(gamma: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = _gegenbauer_rule_mp(gamma, n)
    as_ld = lambda vals: np.array([_LD(mpmath.nstr(v, 25)) for v in vals], dtype=_LD)
    return as_ld(nodes), as_ld(weights)


def _rule_ld(m: EndpointMeasure, n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    if m.kind == "atoms":
        return np.array([-1, 1], dtype=_LD), np.array([0.5, 0.5], dtype=_LD)
    return _gegenbauer_rule_ld(float(m.gamma), n_nodes)


def _case_i_rhs(n: int, p: JacobiParams, theta: float, phi_: float, n_nodes: int, tol: float) -> float:
    a, b = p
    lam = _LD(a) + _LD(b) + _LD(0.5)
    th, ph = _LD(theta), _LD(phi_)
    s_ = np.sin(th / 2) * np.sin(ph / 2)
    c_ = np.cos(th / 2) * np.cos(ph / 2)
    uu, wu = _rule_ld(EndpointMeasure.d_pi(a), n_nodes)
    vv, wv = _rule_ld(EndpointMeasure.d_pi(b), n_nodes)
    z = uu[:, None] * s_ + vv[None, :] * c_
    vals = _jacobi_ld(2 * n, lam, lam, z)
    val = wu @ vals @ wv
    scale = np.abs(wu) @ np.abs(vals) @ np.abs(wv)
    err = 4 * (2 * n + 2) * np.finfo(_LD).eps * scale
    if err > tol * abs(val) and val != 0 and err < 1e-40 * _LD(10) ** _MP_DPS * abs(val):
        val = _case_i_rhs_mp(n, p, theta, phi_, n_nodes)
    return float(_LD(frak_d(2 * n, float(lam))) * val)


def _mp_rule(m: EndpointMeasure, n_nodes: int):
    if m.kind == "atoms":
        return [mpmath.mpf(-1), mpmath.mpf(1)], [mpmath.mpf(1) / 2] * 2
    return _gegenbauer_rule_mp(float(m.gamma), n_nodes)


def _case_i_rhs_mp(n: int, p: JacobiParams, theta: float, phi_: float, n_nodes: int):
    """Unnormalised case (i) sum in mpmath, for points where long double cancels too much."""
    a, b = p
    with mpmath.workdps(_MP_DPS):
        lam = mpmath.mpf(a) + mpmath.mpf(b) + mpmath.mpf(1) / 2
        th, ph = mpmath.mpf(theta), mpmath.mpf(phi_)
        s_ = mpmath.sin(th / 2) * mpmath.sin(ph / 2)
        c_ = mpmath.cos(th / 2) * mpmath.cos(ph / 2)
        uu, wu = _mp_rule(EndpointMeasure.d_pi(a), n_nodes)
        vv, wv = _mp_rule(EndpointMeasure.d_pi(b), n_nodes)
        coefs = [_recurrence_coefficients(m, lam, lam) for m in range(2, 2 * n + 1)]
        total = mpmath.mpf(0)
        for u, w1 in zip(uu, wu):
            for v, w2 in zip(vv, wv):
                z = u * s_ + v * c_
                p0, p1 = mpmath.mpf(1), (lam + 1) * z
                if n == 0:
                    p1 = p0
                for c1, c0, c2 in coefs:
                    p0, p1 = p1, (c1 * z + c0) * p1 - c2 * p0
                total += w1 * w2 * p1
        return _LD(mpmath.nstr(total, 25))


def _rule(m: EndpointMeasure, n_nodes: int, level: int) -> QuadratureRule:
    if m.kind == "signed_pi":
        return signed_pi_rule(m.gamma, level)
    return m.rule(n_nodes)


def _tensor(f, ru: QuadratureRule, rv: QuadratureRule) -> tuple[float, float]:
    vals = f(ru.nodes[:, None], rv.nodes[None, :])
    return float(ru.weights @ vals @ rv.weights), float(np.abs(ru.weights) @ np.abs(vals) @ np.abs(rv.weights))


def _integrate_terms(terms, n_nodes: int, tol: float) -> float:
    """Sum of tensor quadratures; tanh-sinh factors are refined together until
    the change of the sum is below ``tol`` times its absolute magnitude."""
    signed = any(mu.kind == "signed_pi" or mv.kind == "signed_pi" for _, _, mu, mv in terms)

    def at(level):
        tot = scale = 0.0
        for coef, f, mu, mv in terms:
            val, sc = _tensor(f, _rule(mu, n_nodes, level), _rule(mv, n_nodes, level))
            tot += coef * val
            scale += abs(coef) * sc
        return tot, scale

    prev, _ = at(3)
    if not signed:
        return prev
    for level in range(4, DEFAULT_MAX_LEVEL + 1):
        cur, scale = at(level)
        if abs(cur - prev) <= tol * max(scale, 1e-300):
            return cur
        prev = cur
    raise ToleranceNotMet(f"product-formula quadrature did not reach tol={tol}")


def _dk_terms(n: int, p: JacobiParams, theta: float, phi_: float):
    a, b = p
    lam0 = p.lam
    s_, c_ = _sc(theta, phi_)
    atoms = EndpointMeasure("atoms")
    f0 = lambda u, v: _phi(2 * n, lam0, theta, phi_, u, v)
    f1 = lambda u, v: _phi(2 * n - 1, lam0 + 1, theta, phi_, u, v)
    f2 = lambda u, v: _phi(2 * n - 2, lam0 + 2, theta, phi_, u, v)
    k1 = -2 * (lam0 + 2)
    case = "i" if (a >= -0.5 and b >= -0.5) else p.case
    if case == "i":
        return [(1.0, f0, EndpointMeasure.d_pi(a), EndpointMeasure.d_pi(b))]
    if case == "ii":
        return [(k1 * c_, f1, EndpointMeasure.d_pi(a), EndpointMeasure.pi_dv(b)),
                (1.0, f0, EndpointMeasure.d_pi(a), atoms)]
    if case == "iii":
        return [(k1 * s_, f1, EndpointMeasure.pi_dv(a), EndpointMeasure.d_pi(b)),
                (1.0, f0, atoms, EndpointMeasure.d_pi(b))]
    pa, pb = EndpointMeasure.pi_dv(a), EndpointMeasure.pi_dv(b)
    return [((lam0 + 2) * (lam0 + 3) * math.sin(theta) * math.sin(phi_), f2, pa, pb),
            (k1 * s_, f1, pa, atoms),
            (k1 * c_, f1, atoms, pb),
            (1.0, f0, atoms, atoms)]


def dk_rhs(n: int, p: JacobiParams, theta: float, phi_: float, tol: float = 1e-10,
           n_nodes: int | None = None) -> float:
    """Right-hand side of the product formula, case-split on ``(alpha, beta)``.

    Weighted factors use Gauss-Jacobi with ``n_nodes`` nodes (default
    ``max(n+2, 12)`` when both parameters are at least ``-1/2``, 64 otherwise);
    signed-density factors use tanh-sinh refined to ``tol``.
    """
    p.validate()
    if n < 0:
        raise ValueError("degree must be non-negative")
    if n_nodes is None:
        n_nodes = max(n + 2, 12) if p.case == "i" else 64
    a, b = p
    if a >= -0.5 and b >= -0.5:
        return _case_i_rhs(n, p, theta, phi_, n_nodes, tol)
    terms = [t for t in _dk_terms(n, p, theta, phi_) if t[0] != 0.0]
    return _integrate_terms(terms, n_nodes, tol)


# --------------------------------------------------------------------------
# Regularised four-term form
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _HalfRule:
    """Rule for ``dPi_gamma`` on (0, 1] applied to integrands divided by ``1 - u``.

    ``wgap`` is the measure weight times ``1 - u``.
    """

    nodes: np.ndarray
    gap: np.ndarray
    wgap: np.ndarray


def _half_rule(gamma: float, level: int) -> _HalfRule:
    if gamma > -0.5:
        # even integrands: half of the symmetric Gauss rule, folded onto [0, 1]
        r = gegenbauer_rule(gamma, 40 + 8 * level)
        u = np.abs(r.nodes)
        return _HalfRule(u, 1.0 - u, 0.5 * r.weights * (1.0 - u))
    # tanh-sinh on (0, 1) via u = (1 + xi) / 2; the density is singular at u = 1
    r = tanh_sinh_rule(level)
    gap = np.where(r.nodes > 0, 0.5 * r.gap, 1.0 - 0.5 * r.gap)
    base = 0.5 * r.weights * pi_density_constant(gamma)
    wgap = base * gap ** (gamma + 0.5) * (2.0 - gap) ** (gamma - 0.5)
    return _HalfRule(1.0 - gap, gap, wgap)


def _delta_u(k, lam, th, ph, u, gu, v):
    """``(Phi_E(u, v) - Phi_E(1, v)) / (1 - u)`` with a Taylor form for small ``1 - u``."""
    u = np.asarray(u, dtype=float)
    gu = np.asarray(gu, dtype=float)
    direct = (_phi_even_partial(0, 0, k, lam, th, ph, u, v) - _phi_even_partial(0, 0, k, lam, th, ph, 1.0, v))
    small = gu < TAYLOR_GAP
    safe = np.where(small, 1.0, gu)
    out = direct / safe
    if np.any(small):
        tay = 0.0
        for i in range(1, _TAYLOR_ORDER + 1):
            tay = tay + (-1) ** i * gu ** (i - 1) / math.factorial(i) * _phi_even_partial(i, 0, k, lam, th, ph, 1.0, v)
        out = np.where(small, tay, out)
    return out


def _second_difference(k, lam, th, ph, u, gu, v, gv):
    """``D(u,v) / ((1-u)(1-v))`` for ``D = Phi_E(u,v) - Phi_E(u,1) - Phi_E(1,v) + Phi_E(1,1)``."""
    gv = np.asarray(gv, dtype=float)
    sv = gv < TAYLOR_GAP
    direct = (_delta_u(k, lam, th, ph, u, gu, v) - _delta_u(k, lam, th, ph, u, gu, 1.0)) / np.where(sv, 1.0, gv)
    if not np.any(sv):
        return direct
    tay = 0.0
    for j in range(1, _TAYLOR_ORDER + 1):
        tay = tay + (-1) ** j * gv ** (j - 1) / math.factorial(j) * _delta_u_partial_v(j, k, lam, th, ph, u, gu)
    return np.where(sv, tay, direct)


def _delta_u_partial_v(j, k, lam, th, ph, u, gu):
    """``(d_v^j Phi_E(u, 1) - d_v^j Phi_E(1, 1)) / (1 - u)`` with a Taylor form for small ``1 - u``."""
    direct = (_phi_even_partial(0, j, k, lam, th, ph, u, 1.0) - _phi_even_partial(0, j, k, lam, th, ph, 1.0, 1.0))
    small = gu < TAYLOR_GAP
    out = direct / np.where(small, 1.0, gu)
    if np.any(small):
        tay = 0.0
        for i in range(1, _TAYLOR_ORDER + 1):
            tay = tay + (-1) ** i * gu ** (i - 1) / math.factorial(i) * _phi_even_partial(i, j, k, lam, th, ph, 1.0, 1.0)
        out = np.where(small, tay, out)
    return out


def _int1_value(n: int, p: JacobiParams, theta: float, phi_: float, level: int) -> tuple[float, float]:
    a, b = p
    k, lam = 2 * n, p.lam
    end = float(_phi_even_partial(0, 0, k, lam, theta, phi_, 1.0, 1.0))
    total, scale = end, abs(end)
    ra = _half_rule(a, level) if a != -0.5 else None
    rb = _half_rule(b, level) if b != -0.5 else None
    if ra is not None and rb is not None:
        d = _second_difference(k, lam, theta, phi_, ra.nodes[:, None], ra.gap[:, None], rb.nodes[None, :], rb.gap[None, :])
        wu, wv = ra.wgap, rb.wgap
        total += 4 * float(wu @ d @ wv)
        scale += 4 * float(np.abs(wu) @ np.abs(d) @ np.abs(wv))
    if ra is not None:
        d = _delta_u(k, lam, theta, phi_, ra.nodes, ra.gap, 1.0)
        total += 2 * float(ra.wgap @ d)
        scale += 2 * float(np.abs(ra.wgap) @ np.abs(d))
    if rb is not None:
        d = _delta_v(k, lam, theta, phi_, rb.nodes, rb.gap)
        total += 2 * float(rb.wgap @ d)
        scale += 2 * float(np.abs(rb.wgap) @ np.abs(d))
    return total, scale


def _delta_v(k, lam, th, ph, v, gv):
    """``(Phi_E(1, v) - Phi_E(1, 1)) / (1 - v)`` with a Taylor form for small ``1 - v``."""
    v = np.asarray(v, dtype=float)
    gv = np.asarray(gv, dtype=float)
    direct = _phi_even_partial(0, 0, k, lam, th, ph, 1.0, v) - _phi_even_partial(0, 0, k, lam, th, ph, 1.0, 1.0)
    small = gv < TAYLOR_GAP
    out = direct / np.where(small, 1.0, gv)
    if np.any(small):
        tay = 0.0
        for j in range(1, _TAYLOR_ORDER + 1):
            tay = tay + (-1) ** j * gv ** (j - 1) / math.factorial(j) * _phi_even_partial(0, j, k, lam, th, ph, 1.0, 1.0)
        out = np.where(small, tay, out)
    return out


def int1_rhs(n: int, p: JacobiParams, theta: float, phi_: float, tol: float = 1e-10) -> float:
    """Regularised four-term right-hand side built from even parts and second differences.

    Differences are divided by ``1-u`` (and ``1-v``) analytically so that the
    non-integrable density of ``dPi_gamma``, ``gamma < -1/2``, is only ever
    multiplied by ``(1-u)^{gamma+1/2}``.  Refinement stops when successive
    levels differ by at most ``tol`` relative to the absolute integral.
    """
    p.validate()
    if n < 0:
        raise ValueError("degree must be non-negative")
    prev = None
    for level in range(3, DEFAULT_MAX_LEVEL + 1):
        cur, scale = _int1_value(n, p, theta, phi_, level)
        if prev is not None and abs(cur - prev) <= tol * max(scale, 1e-300):
            return cur
        prev = cur
    raise ToleranceNotMet(f"regularised product formula did not reach tol={tol}")
