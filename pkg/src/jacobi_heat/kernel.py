"""Jacobi heat kernel: spectral series, the reduction route, the auxiliary H series,
the envelope Z and the differential identities the kernel satisfies.

Series values are returned to *relative* accuracy.  Double precision is tried
first; where the alternating partial sums cancel below the requested accuracy
(the kernel can be ``1e-100`` while its terms are ``O(1)``), the same sum is
redone in mpmath with enough digits to absorb the cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
import numpy as np

from .jacobi import (
    JacobiParams,
    _recurrence_coefficients,
    _SEED_DEGREE,
    frak_c,
    jacobi_sequence,
    log_frak_d,
    log_norm_h,
    sup_bound,
)
from .measures import EndpointMeasure, QuadratureRule, ToleranceNotMet, gauss_jacobi_rule, signed_pi_rule

__all__ = [
    "T_MIN",
    "KernelQuery",
    "KernelValue",
    "BoundaryKernel",
    "HeatTarget",
    "truncation_depth",
    "heat_kernel_series",
    "heat_kernel_series_grid",
    "boundary_kernel_series",
    "h_aux_series",
    "envelope_z",
    "log_envelope_z",
    "phase_f",
    "heat_kernel_reduced",
    "heat_kernel_reduced_grid",
    "boundary_deriv_residual",
    "h_deriv_residuals",
    "heat_equation_residual",
    "mass_residual",
    "semigroup_residual",
    "even_part",
    "odd_part",
]

T_MIN = 5e-3
DEFAULT_EPS = 1e-12
_MACH = np.finfo(float).eps
_LN10 = math.log(10.0)


# --------------------------------------------------------------------------
# Query / result types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelQuery:
    """A point ``(cos theta, cos phi)`` and time ``t`` for the kernel with parameters ``p``."""

    p: JacobiParams
    theta: float
    phi: float
    t: float

    def __post_init__(self):
        self.p.validate()
        for name in ("theta", "phi"):
            v = getattr(self, name)
            if not (0.0 <= v <= math.pi):
                raise ValueError(f"{name} must lie in [0, pi] (got {v})")
        if not (self.t > 0 and math.isfinite(self.t)):
            raise ValueError(f"t must satisfy t > 0 (got {self.t})")

    @property
    def x(self) -> float:
        return math.cos(self.theta)

    @property
    def y(self) -> float:
        return math.cos(self.phi)


@dataclass(frozen=True)
class KernelValue:
    """Kernel value with the route that produced it and its error diagnostics.

    ``n_terms`` is set by the series route, ``quad_tol`` (the observed
    difference between two quadrature resolutions, relative) by the reduction
    route.  ``tail_bound`` bounds the neglected series tail in absolute terms.
    """

    value: float
    route: str
    n_terms: int | None = None
    quad_tol: float | None = None
    tail_bound: float = 0.0
    digits: int = 16

    def __post_init__(self):
        if self.route not in ("series", "reduction"):
            raise ValueError(f"unknown route {self.route!r}")
        if not self.tail_bound >= 0:
            raise ValueError("tail_bound must be non-negative")


# --------------------------------------------------------------------------
# Envelope and phase
# --------------------------------------------------------------------------


def log_envelope_z(p: JacobiParams, theta, phi, t):
    """Natural log of the envelope Z (vectorised over the angles)."""
    th = np.asarray(theta, dtype=float)
    ph = np.asarray(phi, dtype=float)
    a, b = p
    out = (
        -(a + 0.5) * np.log(t + th * ph)
        - (b + 0.5) * np.log(t + (math.pi - th) * (math.pi - ph))
        - 0.5 * math.log(t)
        - (th - ph) ** 2 / (4.0 * t)
    )
    return float(out) if out.ndim == 0 else out


def envelope_z(q_or_p, theta=None, phi=None, t=None):
    """``[t+th*ph]^(-a-1/2) [t+(pi-th)(pi-ph)]^(-b-1/2) t^(-1/2) exp(-(th-ph)^2/4t)``.

    Accepts either a :class:`KernelQuery` or ``(p, theta, phi, t)``.
    """
    if isinstance(q_or_p, KernelQuery):
        q = q_or_p
        return math.exp(log_envelope_z(q.p, q.theta, q.phi, q.t))
    out = np.exp(log_envelope_z(q_or_p, theta, phi, t))
    return float(out) if np.ndim(out) == 0 else out


def phase_f(theta: float, phi: float, u, v):
    """``arccos(u sin(th/2) sin(ph/2) + v cos(th/2) cos(ph/2))^2`` with the argument clamped to [-1, 1]."""
    s_, c_ = _half_angle_products(theta, phi)
    z = np.clip(np.asarray(u, dtype=float) * s_ + np.asarray(v, dtype=float) * c_, -1.0, 1.0)
    out = np.arccos(z) ** 2
    return float(out) if out.ndim == 0 else out


def _half_angle_products(theta: float, phi: float) -> tuple[float, float]:
    return math.sin(theta / 2) * math.sin(phi / 2), math.cos(theta / 2) * math.cos(phi / 2)


# --------------------------------------------------------------------------
# Series description and rigorous tail bounds
# --------------------------------------------------------------------------

# Three spectral sums share the engine:
#   'pair'     sum_n e^{-t n(n+a+b+1)} / h_n      P_n(x) P_n(y)
#   'boundary' sum_n e^{-t n(n+a+b+1)} P_n(1)/h_n P_n(x)            (y = 1)
#   'h'        sum_k e^{-t k(k+2l+1)} D_k^l       P_k^{l,l}(x),  k even


@dataclass(frozen=True)
class _Series:
    kind: str
    a: float
    b: float
    t: float

    def exponent(self, n: int) -> float:
        return self.t * n * (n + self.a + self.b + 1)

    def log_coeff(self, n: int) -> tuple[float, int]:
        """(log|c_n|, sign) of the float coefficient; sign 0 for vanishing terms."""
        if self.kind == "h":
            if n % 2:
                return -math.inf, 0
            lv, s = log_frak_d(n, self.a)
            return lv - self.exponent(n), s
        lw = -self.exponent(n) - log_norm_h(n, self.a, self.b)
        if self.kind == "boundary":
            lw += math.lgamma(n + self.a + 1) - math.lgamma(n + 1) - math.lgamma(self.a + 1)
        return lw, 1

    def mp_coeff(self, n: int):
        a, b, t = mpmath.mpf(self.a), mpmath.mpf(self.b), mpmath.mpf(self.t)
        if self.kind == "h":
            if n % 2:
                return mpmath.mpf(0)
            lam = a
            if n == 0:
                d = mpmath.gamma(lam + 1.5) / (mpmath.sqrt(mpmath.pi) * mpmath.gamma(lam + 2))
            else:
                d = ((2 * n + 2 * lam + 1) * mpmath.gamma(n + 2 * lam + 1)
                     / (mpmath.power(2, 2 * lam + 1) * mpmath.gamma(lam + 2) * mpmath.gamma(n + lam + 1)))
            return d * mpmath.exp(-t * n * (n + 2 * lam + 1))
        lh = (a + b + 1) * mpmath.log(2) + mpmath.loggamma(n + a + 1) + mpmath.loggamma(n + b + 1)
        if n == 0:
            lh -= mpmath.loggamma(a + b + 2)
        else:
            lh -= mpmath.log(2 * n + a + b + 1) + mpmath.loggamma(n + a + b + 1) + mpmath.loggamma(n + 1)
        lw = -t * n * (n + a + b + 1) - lh
        if self.kind == "boundary":
            lw += mpmath.loggamma(n + a + 1) - mpmath.loggamma(n + 1) - mpmath.loggamma(a + 1)
        return mpmath.exp(lw)

    def log_term_bound(self, n: int) -> float:
        lc, s = self.log_coeff(n)
        if s == 0:
            return -math.inf
        m = sup_bound(n, self.a, self.b)
        if m == 0:
            return -math.inf
        lm = math.log(m)
        return lc + (2 * lm if self.kind == "pair" else lm)


_TAIL_EXTRA = 800.0


@lru_cache(maxsize=512)
def _log_tails(series: _Series, digits: float) -> np.ndarray:
    """``out[N]`` = log of a rigorous bound on ``sum_{n > N} |term_n|`` (sup over x, y).

    Terms are summed explicitly up to ``nmax``, chosen so that ``t n^2`` exceeds
    the requested depth by ``_TAIL_EXTRA`` nepers; beyond ``nmax`` the ratio
    of consecutive bounds is majorised by a geometric factor ``rho < 1``.
    """
    t = series.t
    nmax = int(math.ceil(math.sqrt((digits * _LN10 + _TAIL_EXTRA) / t))) + 12
    logb = np.array([series.log_term_bound(n) for n in range(nmax + 1)])
    # closing factor: e^{-t(2n+a+b+2)} times polynomial growth of the bound
    q = max(series.a, series.b, 0.0)
    poly = (2 * q + 3) * math.log((nmax + 2) / (nmax + 1)) + math.log(4.0)
    lrho = -t * (2 * nmax + series.a + series.b + 2) + poly
    if series.kind == "h":
        lrho *= 2
    if lrho >= 0:
        raise ArithmeticError("geometric tail closing failed; increase nmax")
    finite = logb[np.isfinite(logb)]
    last = finite[-1] if finite.size else -math.inf
    closing = last + lrho - math.log1p(-math.exp(lrho))
    # suffix log-sum-exp: tails[N] = log(sum_{n>N} b_n + closing)
    tails = np.empty(nmax + 1)
    acc = closing
    for n in range(nmax, -1, -1):
        tails[n] = acc
        acc = np.logaddexp(acc, logb[n])
    return tails


def _depth_for(series: _Series, log_eps: float) -> tuple[int, float]:
    digits = max(20.0, -log_eps / _LN10 + 5)
    tails = _log_tails(series, round(digits, -1) + 10)
    ok = np.nonzero(tails <= log_eps)[0]
    if ok.size == 0:
        raise ArithmeticError("truncation depth exceeds the tabulated range")
    n = int(ok[0])
    return n, float(math.exp(tails[n]))


def truncation_depth(p: JacobiParams, t: float, eps: float) -> int:
    """Smallest ``N`` with a rigorous bound on ``sum_{n>N} |term_n|`` at most ``eps``.

    The bound uses ``sup |P_n|`` from :func:`~jacobi_heat.jacobi.sup_bound` and
    is uniform in ``x, y``.
    """
    if not (t > 0 and eps > 0):
        raise ValueError("truncation_depth needs t > 0 and eps > 0")
    return _depth_for(_Series("pair", p.alpha, p.beta, t), math.log(eps))[0]


# --------------------------------------------------------------------------
# Evaluation engine
# --------------------------------------------------------------------------


def _float_poly_matrix(nmax: int, a: float, b: float, x: np.ndarray) -> np.ndarray:
    return np.array(list(jacobi_sequence(nmax, a, b, x)))


def _float_coeffs(series: _Series, nmax: int) -> np.ndarray:
    out = np.zeros(nmax + 1)
    for n in range(nmax + 1):
        lc, s = series.log_coeff(n)
        if s:
            out[n] = s * math.exp(lc)
    return out


@lru_cache(maxsize=64)
def _mp_recurrence(a: float, b: float, nmax: int, dps: int):
    with mpmath.workdps(dps):
        am, bm = mpmath.mpf(a), mpmath.mpf(b)
        return [_recurrence_coefficients(n, am, bm) for n in range(_SEED_DEGREE + 1, nmax + 1)]


@lru_cache(maxsize=64)
def _mp_seed_coeffs(a: float, b: float, dps: int):
    # coefficients of P_n in powers of (x-1)/2, n <= seed degree
    with mpmath.workdps(dps):
        am, bm = mpmath.mpf(a), mpmath.mpf(b)
        seeds = []
        for n in range(_SEED_DEGREE + 1):
            seeds.append([
                mpmath.binomial(n, k) * mpmath.rf(n + am + bm + 1, k) * mpmath.rf(am + k + 1, n - k) / mpmath.factorial(n)
                for k in range(n + 1)
            ])
        return seeds


def _mp_poly_row(a: float, b: float, x: float, nmax: int, dps: int) -> list:
    seeds = _mp_seed_coeffs(a, b, dps)
    rec = _mp_recurrence(a, b, max(nmax, _SEED_DEGREE), dps)
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        y = (xm - 1) / 2
        row = [mpmath.polyval(c[::-1], y) for c in seeds[: nmax + 1]]
        for n in range(_SEED_DEGREE + 1, nmax + 1):
            c1, c0, c2 = rec[n - _SEED_DEGREE - 1]
            row.append((c1 * xm + c0) * row[-1] - c2 * row[-2])
    return row


@lru_cache(maxsize=128)
def _mp_coeffs(series: _Series, nmax: int, dps: int) -> list:
    with mpmath.workdps(dps):
        return [series.mp_coeff(n) for n in range(nmax + 1)]


@dataclass
class _EvalInfo:
    n_terms: int = 0
    tail_bound: float = 0.0
    digits: int = 16
    escalated: int = 0


def _sum_series(series: _Series, xs: np.ndarray, ys: np.ndarray | None, eps: float,
                log_hint: np.ndarray) -> tuple[np.ndarray, _EvalInfo]:
    """Evaluate the series at points ``xs`` (paired with ``ys`` for 'pair') to relative ``eps``.

    ``log_hint`` is a rough log-magnitude used to pick the first truncation
    depth; it need not be accurate, since depth and precision are re-checked
    against the computed value.
    """
    xs = np.asarray(xs, dtype=float)
    m = xs.size
    info = _EvalInfo()
    if m == 0:
        return np.zeros(0), info
    log_target = math.log(eps) + float(np.min(log_hint)) - 3 * _LN10
    n_f, tail_f = _depth_for(series, max(log_target, math.log(_MACH) - 40 * _LN10))
    c = _float_coeffs(series, n_f)
    ux, inv_x = np.unique(xs, return_inverse=True)
    px = _float_poly_matrix(n_f, series.a, series.b, ux)
    if series.kind == "pair":
        uy, inv_y = np.unique(ys, return_inverse=True)
        py = _float_poly_matrix(n_f, series.a, series.b, uy)
        terms = c[:, None] * px[:, inv_x] * py[:, inv_y]
    else:
        terms = c[:, None] * px[:, inv_x]
    vals = terms.sum(axis=0)
    sabs = np.abs(terms).sum(axis=0)
    err = 4 * (n_f + 1) * _MACH * sabs + tail_f
    good = err <= eps * np.abs(vals)
    info.n_terms, info.tail_bound = n_f, tail_f
    bad = np.nonzero(~good)[0]
    if bad.size == 0:
        return vals, info
    info.escalated = int(bad.size)
    # mpmath path for the points whose float sum cannot be certified
    mag_guess = np.asarray(log_hint, dtype=float)[bad]
    dps = 30 + int(max(0.0, float(np.max(np.log10(sabs[bad] + 1e-300) - mag_guess / _LN10))))
    for _ in range(8):
        n_mp, tail_mp = _depth_for(series, math.log(eps) - _LN10 + float(np.min(mag_guess)))
        coeffs = _mp_coeffs(series, n_mp, dps)
        rows_x: dict[float, list] = {}
        rows_y: dict[float, list] = {}
        out_v = np.empty(bad.size)
        out_lost = np.empty(bad.size)
        with mpmath.workdps(dps):
            for j, k in enumerate(bad):
                xk = float(xs[k])
                rx = rows_x.get(xk)
                if rx is None:
                    rx = rows_x[xk] = _mp_poly_row(series.a, series.b, xk, n_mp, dps)
                if series.kind == "pair":
                    yk = float(ys[k])
                    ry = rows_y.get(yk)
                    if ry is None:
                        ry = rows_y[yk] = _mp_poly_row(series.a, series.b, yk, n_mp, dps)
                    tk = [cn * p1 * p2 for cn, p1, p2 in zip(coeffs, rx, ry)]
                else:
                    tk = [cn * p1 for cn, p1 in zip(coeffs, rx)]
                s = mpmath.fsum(tk)
                sa = mpmath.fsum(abs(v) for v in tk)
                out_v[j] = float(s)
                out_lost[j] = float(mpmath.log10(sa / abs(s))) if s != 0 else dps
        mags = np.log(np.abs(out_v) + 1e-300)
        enough_digits = dps - out_lost >= 20
        enough_terms = tail_mp <= eps * np.abs(out_v)
        if np.all(enough_digits & enough_terms):
            vals = vals.copy()
            vals[bad] = out_v
            info.n_terms = max(info.n_terms, n_mp)
            info.tail_bound = max(tail_f if good.any() else 0.0, tail_mp)
            info.digits = dps
            return vals, info
        dps = max(dps, int(np.max(out_lost)) + 30)
        mag_guess = np.minimum(mag_guess, mags) if np.all(np.isfinite(mags)) else mag_guess - 20 * _LN10
    raise ArithmeticError("series evaluation did not reach the requested relative accuracy")


def _check_t(t: float, what: str = "series"):
    if not (t > 0 and math.isfinite(t)):
        raise ValueError(f"t must satisfy t > 0 (got {t})")
    if t < T_MIN:
        raise ValueError(
            f"{what} evaluation needs t >= t_min = {T_MIN} (got {t}); "
            "smaller times are outside the supported range of the spectral series"
        )


def heat_kernel_series_grid(p: JacobiParams, thetas: Sequence[float], phis: Sequence[float], t: float,
                            eps: float = DEFAULT_EPS) -> tuple[np.ndarray, _EvalInfo]:
    """Kernel values ``G_t(cos th_i, cos ph_j)`` on a tensor grid, each to relative ``eps``.

    Only the upper triangle is evaluated when the two angle lists coincide.
    """
    p.validate()
    _check_t(t)
    th = np.asarray(thetas, dtype=float)
    ph = np.asarray(phis, dtype=float)
    same = th.shape == ph.shape and np.array_equal(th, ph)
    ii, jj = np.triu_indices(th.size) if same else np.indices((th.size, ph.size)).reshape(2, -1)
    hint = log_envelope_z(p, th[ii], ph[jj], t) - 2 * _LN10
    series = _Series("pair", p.alpha, p.beta, t)
    vals, info = _sum_series(series, np.cos(th[ii]), np.cos(ph[jj]), eps, np.atleast_1d(hint))
    out = np.empty((th.size, ph.size))
    out[ii, jj] = vals
    if same:
        out[jj, ii] = vals
    return out, info


def heat_kernel_series(q: KernelQuery, eps: float = DEFAULT_EPS) -> KernelValue:
    """Spectral series for ``G_t^{a,b}(cos theta, cos phi)`` to relative accuracy ``eps``.

    Raises
    ------
    ValueError
        If ``t < T_MIN``; use :func:`heat_kernel_reduced` with ``t >= 4 T_MIN``
        or a larger time.
    """
    vals, info = heat_kernel_series_grid(q.p, [q.theta], [q.phi], q.t, eps)
    return KernelValue(float(vals[0, 0]), "series", n_terms=info.n_terms, tail_bound=info.tail_bound,
                       digits=info.digits)


def boundary_kernel_series(lam_a: float, lam_b: float, z, s: float, eps: float = DEFAULT_EPS) -> np.ndarray:
    """``G_s^{a,b}(z, 1)`` to relative ``eps`` (vectorised over ``z``)."""
    _check_t(s, "boundary-kernel series")
    za = np.atleast_1d(np.asarray(z, dtype=float))
    hint = log_envelope_z(JacobiParams(lam_a, lam_b), np.arccos(np.clip(za, -1, 1)), 0.0, s) - 2 * _LN10
    vals, _ = _sum_series(_Series("boundary", lam_a, lam_b, s), za, None, eps, np.atleast_1d(hint))
    return vals


def _check_h_lambda(lam: float):
    if not (-1.5 < lam <= -1.0):
        raise ValueError(f"H requires lambda in (-3/2, -1] (got {lam})")


def h_aux_series(lam: float, x, t: float, eps: float = DEFAULT_EPS):
    """``H_t^lam(x) = sum_n e^{-t 2n(2n+2lam+1)} D_{2n}^lam P_{2n}^{lam,lam}(x)`` for ``lam in (-3/2, -1]``."""
    _check_h_lambda(lam)
    _check_t(t, "H series")
    xa = np.asarray(x, dtype=float)
    flat = np.atleast_1d(xa).ravel()
    hint = -np.arccos(np.clip(np.abs(flat), 0, 1)) ** 2 / (4 * t) - 2 * _LN10
    vals, _ = _sum_series(_Series("h", lam, lam, t), flat, None, eps, hint)
    vals = vals.reshape(xa.shape)
    return float(vals) if xa.ndim == 0 else vals


# --------------------------------------------------------------------------
# Boundary-kernel interpolant for the reduction route
# --------------------------------------------------------------------------

_CUT_DIGITS = 30.0
_INTERP_TOL = 2e-13


class BoundaryKernel:
    """Interpolant of ``G_s^{lam,lam}(z, 1)`` (``kind='G'``) or ``H_s^lam(z)`` (``kind='H'``).

    The log of the kernel is interpolated by a Chebyshev expansion in the angle
    ``theta = arccos z``, where it is close to the quadratic ``-theta^2/4s``
    even though the kernel itself spans hundreds of orders of magnitude.
    Samples come from the series evaluated to relative accuracy.  For ``G``,
    which decreases in ``theta``, values more than ``1e-30`` below the value
    at ``theta = pi/2`` are treated as zero and the interpolated range ends at
    that cut.  ``H`` is even in ``z`` and is interpolated on ``[0, pi/2]``.
    """

    def __init__(self, kind: str, lam: float, s: float):
        if kind not in ("G", "H"):
            raise ValueError("kind must be 'G' or 'H'")
        if kind == "G" and not lam > -1:
            raise ValueError("boundary kernel G needs lam > -1")
        if kind == "H":
            _check_h_lambda(lam)
        _check_t(s, "boundary-kernel series")
        self.kind, self.lam, self.s = kind, lam, s
        self.hi = self._cut() if kind == "G" else 0.5 * math.pi
        self.coef = self._fit()

    def _sample(self, theta: np.ndarray) -> np.ndarray:
        z = np.cos(np.asarray(theta, dtype=float))
        if self.kind == "G":
            vals = boundary_kernel_series(self.lam, self.lam, z, self.s, eps=1e-15)
        else:
            vals = np.atleast_1d(h_aux_series(self.lam, z, self.s, eps=1e-15))
        if np.any(vals <= 0):
            raise ArithmeticError(f"{self.kind} kernel not positive; log interpolation impossible")
        return np.log(vals)

    def _cut(self) -> float:
        floor = float(self._sample(np.array([0.5 * math.pi]))[0]) - _CUT_DIGITS * _LN10
        if float(self._sample(np.array([math.pi]))[0]) > floor:
            return math.pi
        grid = np.linspace(0.5 * math.pi, math.pi, 33)
        lg = self._sample(grid)
        k = int(np.nonzero(lg <= floor)[0][0])
        lo, hi = grid[k - 1], grid[k]
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            if float(self._sample(np.array([mid]))[0]) > floor:
                lo = mid
            else:
                hi = mid
        return hi

    def _from_unit(self, xk: np.ndarray) -> np.ndarray:
        return (xk + 1.0) * self.hi / 2.0

    def _to_unit(self, theta):
        return 2.0 * theta / self.hi - 1.0

    def _fit(self) -> np.ndarray:
        for deg in (16, 32, 48, 64, 96, 128, 192):
            xk = np.cos((np.arange(deg + 1) + 0.5) * math.pi / (deg + 1))
            coef = np.polynomial.chebyshev.chebfit(xk, self._sample(self._from_unit(xk)), deg)
            # samples carry relative rounding of the log values themselves
            floor = _INTERP_TOL * max(1.0, float(np.max(np.abs(coef))))
            if np.max(np.abs(coef[-4:])) <= floor:
                xm = np.cos((np.arange(9) + 0.25) * math.pi / 9)
                err = float(np.max(np.abs(np.polynomial.chebyshev.chebval(xm, coef) - self._sample(self._from_unit(xm)))))
                if err <= 10 * floor:
                    self.fit_error = err
                    return coef
        raise ArithmeticError(f"boundary-kernel interpolant did not converge ({self.kind}, lam={self.lam}, s={self.s})")

    def _angle(self, z) -> np.ndarray:
        za = np.clip(np.asarray(z, dtype=float), -1.0, 1.0)
        return np.arccos(np.abs(za) if self.kind == "H" else za)

    def log_value(self, z) -> np.ndarray:
        th = np.minimum(self._angle(z), self.hi)
        return np.polynomial.chebyshev.chebval(self._to_unit(th), self.coef)

    def __call__(self, z) -> np.ndarray:
        th = self._angle(z)
        out = np.exp(np.polynomial.chebyshev.chebval(self._to_unit(np.minimum(th, self.hi)), self.coef))
        if self.kind == "G":
            out = np.where(th > self.hi, 0.0, out)
        return out


@lru_cache(maxsize=64)
def _boundary_kernel(kind: str, lam: float, s: float) -> BoundaryKernel:
    return BoundaryKernel(kind, lam, s)


# --------------------------------------------------------------------------
# Reduction route
# --------------------------------------------------------------------------

_GJ_NODES = (80, 120)
_TS_LEVELS = (4, 5)
_SIGNED_TRIM = 1e-30


@dataclass(frozen=True)
class _Term:
    coef: float
    kind: str            # 'G' or 'H'
    lam: float
    mu: EndpointMeasure
    mv: EndpointMeasure
    trig: str            # '1', 's', 'c' or 'sc' (sin th sin ph)


def reduction_terms(p: JacobiParams, t: float) -> tuple[float, list[_Term]]:
    """The case-dependent combination: ``(lhs_factor, terms)`` with ``lhs_factor * G = sum terms``."""
    a, b = p
    lam0 = p.lam
    e1 = math.exp(-t * (lam0 + 1) / 2)
    e2 = math.exp(-t * (a + b + 2))
    case = p.case
    atoms = EndpointMeasure("atoms")
    if case in ("i", "ii", "iii", "iv"):
        lhs = math.exp(log_norm_h(0, a, b) - log_norm_h(0, lam0, lam0))
    else:
        lhs = math.exp(log_norm_h(0, a, b)) * frak_c(0, a, b)
    if case == "i":
        return lhs, [_Term(1.0, "G", lam0, EndpointMeasure.d_pi(a), EndpointMeasure.d_pi(b), "1")]
    if case == "ii":
        return lhs, [
            _Term(-2 * (lam0 + 1) * e1, "G", lam0 + 1, EndpointMeasure.d_pi(a), EndpointMeasure.pi_dv(b), "c"),
            _Term(1.0, "G", lam0, EndpointMeasure.d_pi(a), atoms, "1"),
        ]
    if case == "iii":
        return lhs, [
            _Term(-2 * (lam0 + 1) * e1, "G", lam0 + 1, EndpointMeasure.pi_dv(a), EndpointMeasure.d_pi(b), "s"),
            _Term(1.0, "G", lam0, atoms, EndpointMeasure.d_pi(b), "1"),
        ]
    if case == "iv":
        k2, k1, last = (lam0 + 1) * (lam0 + 2) * e2, -2 * (lam0 + 1) * e1, ("G", lam0)
    else:
        k2, k1, last = (lam0 + 2) * e2, -2 * e1, ("H", lam0)
    pa, pb = EndpointMeasure.pi_dv(a), EndpointMeasure.pi_dv(b)
    return lhs, [
        _Term(k2, "G", lam0 + 2, pa, pb, "sc"),
        _Term(k1, "G", lam0 + 1, pa, atoms, "s"),
        _Term(k1, "G", lam0 + 1, atoms, pb, "c"),
        _Term(1.0, last[0], last[1], atoms, atoms, "1"),
    ]


def _measure_rule(m: EndpointMeasure, fine: bool) -> QuadratureRule:
    if m.kind == "signed_pi":
        r = signed_pi_rule(m.gamma, _TS_LEVELS[fine])
        keep = np.abs(r.weights) > _SIGNED_TRIM * np.max(np.abs(r.weights))
        return QuadratureRule(r.nodes[keep], r.weights[keep], -1, r.gap[keep])
    return m.rule(_GJ_NODES[fine])


def _trig_factor(trig: str, s_: float, c_: float) -> float:
    return {"1": 1.0, "s": s_, "c": c_, "sc": 4.0 * s_ * c_}[trig]


def _term_integral(term: _Term, kern: BoundaryKernel, s_: float, c_: float, fine: bool) -> float:
    ru, rv = _measure_rule(term.mu, fine), _measure_rule(term.mv, fine)
    z = ru.nodes[:, None] * s_ + rv.nodes[None, :] * c_
    g = kern(z)
    return float(ru.weights @ g @ rv.weights)


def _reduced_pair(p: JacobiParams, t: float, theta: float, phi: float, tol: float,
                  kernels: dict) -> tuple[float, float]:
    lhs, terms = reduction_terms(p, t)
    s_, c_ = _half_angle_products(theta, phi)
    totals = []
    for fine in (False, True):
        acc = 0.0
        for term in terms:
            tf = _trig_factor(term.trig, s_, c_)
            if tf == 0.0 or term.coef == 0.0:
                continue
            acc += term.coef * tf * _term_integral(term, kernels[(term.kind, term.lam)], s_, c_, fine)
        totals.append(acc / lhs)
    coarse, fine_v = totals
    rel = abs(fine_v - coarse) / abs(fine_v) if fine_v != 0 else math.inf
    return fine_v, rel


def _kernels_for(p: JacobiParams, t: float) -> dict:
    _, terms = reduction_terms(p, t)
    return {(tm.kind, tm.lam): _boundary_kernel(tm.kind, tm.lam, t / 4) for tm in terms}


def heat_kernel_reduced(q: KernelQuery, tol: float = 1e-10) -> KernelValue:
    """Kernel value from the five-case reduction formula (integrals of boundary kernels at ``t/4``).

    Raises
    ------
    ToleranceNotMet
        If the 80- and 120-node (tanh-sinh level 4 and 5) evaluations differ
        by more than ``tol`` relative.
    ValueError
        If ``t/4`` is below ``T_MIN``.
    """
    vals, rel = heat_kernel_reduced_grid(q.p, [q.theta], [q.phi], q.t, tol)
    return KernelValue(float(vals[0, 0]), "reduction", quad_tol=float(rel[0, 0]))


def heat_kernel_reduced_grid(p: JacobiParams, thetas: Sequence[float], phis: Sequence[float], t: float,
                             tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Reduction-route values and their relative quadrature-change estimates on a tensor grid."""
    p.validate()
    if not t > 0:
        raise ValueError(f"t must satisfy t > 0 (got {t})")
    if t / 4 < T_MIN:
        raise ValueError(f"reduction route needs t/4 >= t_min = {T_MIN}, i.e. t >= {4 * T_MIN} (got {t})")
    th = np.asarray(thetas, dtype=float)
    ph = np.asarray(phis, dtype=float)
    same = th.shape == ph.shape and np.array_equal(th, ph)
    kernels = _kernels_for(p, t)
    out = np.empty((th.size, ph.size))
    rel = np.empty_like(out)
    for i in range(th.size):
        for j in range(ph.size):
            if same and j < i:
                out[i, j], rel[i, j] = out[j, i], rel[j, i]
                continue
            out[i, j], rel[i, j] = _reduced_pair(p, t, float(th[i]), float(ph[j]), tol, kernels)
    worst = float(np.max(rel))
    if worst > tol:
        raise ToleranceNotMet(f"reduction quadrature changed by {worst:.2e} relative (tol {tol})")
    return out, rel


# --------------------------------------------------------------------------
# Differential identities
# --------------------------------------------------------------------------


def even_part(f: Callable, x):
    x = np.asarray(x, dtype=float)
    return 0.5 * (np.asarray(f(x)) + np.asarray(f(-x)))


def odd_part(f: Callable, x):
    x = np.asarray(x, dtype=float)
    return 0.5 * (np.asarray(f(x)) - np.asarray(f(-x)))


def _float_weights(series: _Series, n: int) -> np.ndarray:
    return _float_coeffs(series, n)


def _boundary_terms(a: float, b: float, t: float, x: np.ndarray, deriv: int, n: int) -> np.ndarray:
    """Term-wise ``c_n d^k/dx^k P_n(x)`` of the boundary series (rows = n)."""
    c = _float_weights(_Series("boundary", a, b, t), n)
    return c[:, None] * _poly_deriv_matrix(n, a, b, x, deriv)


def _poly_deriv_matrix(n: int, a: float, b: float, x: np.ndarray, deriv: int) -> np.ndarray:
    # d^k P_m^{a,b} = 2^-k (m+a+b+1)_k P_{m-k}^{a+k,b+k}
    out = np.zeros((n + 1, x.size))
    if n < deriv:
        return out
    shifted = _float_poly_matrix(n - deriv, a + deriv, b + deriv, x)
    for m in range(deriv, n + 1):
        fac = 1.0
        for j in range(deriv):
            fac *= (m + a + b + 1 + j) / 2
        out[m] = fac * shifted[m - deriv]
    return out


def _float_depth(kind: str, a: float, b: float, t: float) -> int:
    return _depth_for(_Series(kind, a, b, t), math.log(1e-18))[0] + 2


def _boundary_float(a: float, b: float, t: float, x: np.ndarray, deriv: int = 0) -> tuple[np.ndarray, np.ndarray]:
    n = _float_depth("boundary", a + deriv, b + deriv, t) + deriv
    terms = _boundary_terms(a, b, t, x, deriv, n)
    return terms.sum(axis=0), np.abs(terms).sum(axis=0)


def boundary_deriv_residual(p: JacobiParams, x, t: float, prefactor: Callable[[float], float] | None = None):
    """Relative residual of ``d/dx G_t(x,1) = 2(a+1) e^{-t(a+b+2)} G_t^{a+1,b+1}(x,1)``.

    The left side is summed term by term from the derivative formula, the
    right side as an independent series.  The residual is scaled by the sum of
    absolute terms.  ``prefactor`` replaces ``2(a+1)`` (used to test that a
    wrong constant is detected).
    """
    a, b = p
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    lhs, lhs_abs = _boundary_float(a, b, t, xa, deriv=1)
    rhs_k, rhs_abs = _boundary_float(a + 1, b + 1, t, xa)
    pref = 2 * (a + 1) if prefactor is None else prefactor(a)
    rhs = pref * math.exp(-t * (a + b + 2)) * rhs_k
    scale = np.maximum(np.maximum(lhs_abs, np.abs(rhs)), 1e-300)
    out = (lhs - rhs) / scale
    return float(out[0]) if np.ndim(x) == 0 else out


def _h_float(lam: float, t: float, x: np.ndarray, deriv: int = 0) -> tuple[np.ndarray, np.ndarray]:
    n = _float_depth("h", lam, lam, t)
    n += n % 2
    c = _float_coeffs(_Series("h", lam, lam, t), n)
    terms = c[:, None] * _poly_deriv_matrix(n, lam, lam, x, deriv)
    return terms.sum(axis=0), np.abs(terms).sum(axis=0)


def h_deriv_residuals(lam: float, x, t: float) -> tuple:
    """Relative residuals of the first- and second-derivative identities for H.

    Each residual is divided by the larger of the local absolute-term sum and
    that sum at ``x = 1``.

    ``H' = 2 e^{-t(2lam+2)} [G_t^{lam+1}(.,1)]_odd`` and
    ``H'' = 4(lam+2) e^{-t(4lam+6)} [G_t^{lam+2}(.,1)]_even``.
    """
    _check_h_lambda(lam)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    d1, d1_abs = _h_float(lam, t, xa, 1)
    d2, d2_abs = _h_float(lam, t, xa, 2)
    g1 = lambda z: _boundary_float(lam + 1, lam + 1, t, np.atleast_1d(z))[0]
    g2 = lambda z: _boundary_float(lam + 2, lam + 2, t, np.atleast_1d(z))[0]
    r1 = 2 * math.exp(-t * (2 * lam + 2)) * odd_part(g1, xa)
    r2 = 4 * (lam + 2) * math.exp(-t * (4 * lam + 6)) * even_part(g2, xa)
    # near x = 0 the odd side is pure rounding, so the scale is floored by the
    # absolute-term sum at x = 1, which dominates every term (lam + 1 > -1/2)
    one = np.ones(1)
    floor1 = _h_float(lam, t, one, 1)[1][0]
    floor2 = _h_float(lam, t, one, 2)[1][0]
    res1 = (d1 - r1) / np.maximum(np.maximum(d1_abs, np.abs(r1)), floor1)
    res2 = (d2 - r2) / np.maximum(np.maximum(d2_abs, np.abs(r2)), floor2)
    if np.ndim(x) == 0:
        return float(res1[0]), float(res2[0])
    return res1, res2


@dataclass(frozen=True)
class HeatTarget:
    """Function whose heat equation is checked: ``G_t^{a,b}(x, y)`` (kind 'G') or ``H_t^lam(x)`` (kind 'H')."""

    kind: str
    p: JacobiParams | None = None
    lam: float | None = None
    y: float = 1.0

    def __post_init__(self):
        if self.kind == "G" and self.p is None:
            raise ValueError("G target needs JacobiParams")
        if self.kind == "H":
            if self.lam is None:
                raise ValueError("H target needs lambda")
            _check_h_lambda(self.lam)
        if self.kind not in ("G", "H"):
            raise ValueError("kind must be 'G' or 'H'")

    @property
    def params(self) -> tuple[float, float]:
        return (self.lam, self.lam) if self.kind == "H" else (self.p.alpha, self.p.beta)


def _target_terms(target: HeatTarget, x: np.ndarray, t: float, deriv: int) -> np.ndarray:
    a, b = target.params
    if target.kind == "H":
        n = _float_depth("h", a, b, t)
        n += n % 2
        c = _float_coeffs(_Series("h", a, b, t), n)
        return c[:, None] * _poly_deriv_matrix(n, a, b, x, deriv)
    n = _float_depth("pair", a, b, t)
    c = _float_coeffs(_Series("pair", a, b, t), n)
    py = _float_poly_matrix(n, a, b, np.array([target.y]))[:, 0]
    return (c * py)[:, None] * _poly_deriv_matrix(n, a, b, x, deriv)


def heat_equation_residual(target: HeatTarget, x, t: float, h_t: float = 1e-3, h_x: float | None = None):
    """``(d/dt + J) f`` with a centred difference in ``t``.

    ``x``-derivatives are summed term by term, or taken by centred differences
    with step ``h_x`` when it is given.  Returned unscaled (absolute).
    """
    if not (h_t > 0 and (h_x is None or h_x > 0)):
        raise ValueError("finite-difference steps must be positive")
    if t - h_t <= 0:
        raise ValueError("h_t must be smaller than t")
    a, b = target.params
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    f = lambda tt, xx, k=0: _target_terms(target, xx, tt, k).sum(axis=0)
    dt = (f(t + h_t, xa) - f(t - h_t, xa)) / (2 * h_t)
    if h_x is None:
        d1, d2 = f(t, xa, 1), f(t, xa, 2)
    else:
        fp, f0, fm = f(t, xa + h_x), f(t, xa), f(t, xa - h_x)
        d1 = (fp - fm) / (2 * h_x)
        d2 = (fp - 2 * f0 + fm) / (h_x * h_x)
    jf = -(1 - xa * xa) * d2 - (b - a - (a + b + 2) * xa) * d1
    out = dt + jf
    return float(out[0]) if np.ndim(x) == 0 else out


def _orth_rule(p: JacobiParams, n: int) -> QuadratureRule:
    return gauss_jacobi_rule(p.alpha, p.beta, n)


def mass_residual(p: JacobiParams, theta: float, t: float) -> float:
    """``int G_t(cos theta, y) (1-y)^a (1+y)^b dy - 1`` by Gauss-Jacobi (exact for the truncated series)."""
    _check_t(t)
    n = _float_depth("pair", p.alpha, p.beta, t)
    rule = _orth_rule(p, n + 2)
    c = _float_coeffs(_Series("pair", p.alpha, p.beta, t), n)
    px = _float_poly_matrix(n, p.alpha, p.beta, np.array([math.cos(theta)]))[:, 0]
    py = _float_poly_matrix(n, p.alpha, p.beta, rule.nodes)
    g = (c * px) @ py
    return float(rule.weights @ g) - 1.0


def semigroup_residual(p: JacobiParams, theta: float, phi: float, t: float, s: float) -> float:
    """Relative residual of ``int G_t(x,z) G_s(z,y) drho(z) = G_{t+s}(x,y)`` by Gauss-Jacobi."""
    _check_t(min(t, s))
    a, b = p
    n = max(_float_depth("pair", a, b, t), _float_depth("pair", a, b, s))
    rule = _orth_rule(p, n + 2)
    x, y = math.cos(theta), math.cos(phi)
    pz = _float_poly_matrix(n, a, b, rule.nodes)
    pxy = _float_poly_matrix(n, a, b, np.array([x, y]))
    ct = _float_coeffs(_Series("pair", a, b, t), n)
    cs = _float_coeffs(_Series("pair", a, b, s), n)
    g1 = (ct * pxy[:, 0]) @ pz
    g2 = (cs * pxy[:, 1]) @ pz
    lhs = float(rule.weights @ (g1 * g2))
    rhs = heat_kernel_series(KernelQuery(p, theta, phi, t + s), eps=1e-14).value
    return (lhs - rhs) / rhs
