"""Grid sweeps that measure two-sided comparability constants empirically.

Each sweep reduces a ratio ``value / envelope`` over a grid to a
:class:`RatioReport` (its extremes and where they occur).  Observed bands are
kept in a versioned JSON baseline and later runs are compared against it
with a multiplicative slack.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .jacobi import JacobiParams
from .kernel import (
    T_MIN,
    HeatTarget,
    _boundary_kernel,
    _half_angle_products,
    _Term,
    _term_integral,
    boundary_deriv_residual,
    boundary_kernel_series,
    envelope_z,
    h_aux_series,
    h_deriv_residuals,
    heat_equation_residual,
    heat_kernel_reduced_grid,
    heat_kernel_series_grid,
    mass_residual,
    phase_f,
    semigroup_residual,
)
from .measures import EndpointMeasure, double_exponential, pi_density

__all__ = [
    "DEFAULT_PARAMS",
    "DEFAULT_T",
    "SweepGrid",
    "RatioReport",
    "CheckResult",
    "kernel_table",
    "bound_ratio_sweep",
    "long_time_sweep",
    "jac_low_sweep",
    "htl_sweep",
    "lemma_exp_check",
    "lemma_exp_sweep",
    "lemma_ssigma_check",
    "proof_term_check",
    "identity_suite",
    "collect_bands",
    "load_baseline",
    "write_baseline",
    "compare_bands",
    "default_baseline_path",
    "dumps17",
]

DEFAULT_PARAMS = (
    JacobiParams(0.5, 0.5),
    JacobiParams(1.3, -0.5),
    JacobiParams(0.3, -0.8),
    JacobiParams(-0.8, 0.3),
    JacobiParams(-0.6, -0.7),
    JacobiParams(-0.75, -0.9),
)
DEFAULT_T = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0)
LONG_T = (1.0, 2.0, 5.0, 10.0)
JAC_LOW_LAMBDAS = (-0.9, -0.5, 0.7)
HTL_LAMBDAS = (-1.4, -1.2, -1.0)
SSIGMA_GAMMAS = (-0.5, 0.0, 1.0, 2.5)
BASELINE_VERSION = 1
BASELINE_SLACK = 0.1

# identity-suite tolerances
IDENTITY_TOL = 1e-7
HEAT_STEP = 1e-5
HEAT_T = (0.5, 1.0)
ORDER_STEP = 1e-3
MIN_ORDER = 1.9
SEMIGROUP_T = (0.2, 0.5, 1.0)


def _angles(n: int, hi: float = math.pi) -> tuple[float, ...]:
    return tuple(float(x) for x in np.linspace(0.0, hi, n))


XI_GRID = (0.0,) + tuple(float(x) for x in np.logspace(-2, 4, 25))
U_GRID = _angles(11, 1.0)


def _key(p: JacobiParams) -> str:
    return f"{p.alpha!r},{p.beta!r}"


# --------------------------------------------------------------------------
# Grid and report types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepGrid:
    """Tensor grid of angles and times, plus the parameter pairs to sweep."""

    theta_points: tuple[float, ...]
    phi_points: tuple[float, ...]
    t_points: tuple[float, ...]
    params_list: tuple[JacobiParams, ...]

    def __post_init__(self):
        for name in ("theta_points", "phi_points", "t_points", "params_list"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
            if not getattr(self, name):
                raise ValueError(f"{name} must not be empty")
        for x in self.theta_points + self.phi_points:
            if not 0.0 <= x <= math.pi:
                raise ValueError(f"angles must lie in [0, pi] (got {x})")
        for t in self.t_points:
            if not t >= T_MIN:
                raise ValueError(f"t points must satisfy t >= t_min = {T_MIN} (got {t})")
        for p in self.params_list:
            p.validate()

    @classmethod
    def default(cls, n_angles: int = 25, t_points: Sequence[float] = DEFAULT_T,
                params: Sequence[JacobiParams] = DEFAULT_PARAMS) -> "SweepGrid":
        ang = _angles(n_angles)
        return cls(ang, ang, tuple(t_points), tuple(params))

    def with_t(self, keep: Callable[[float], bool]) -> "SweepGrid":
        return SweepGrid(self.theta_points, self.phi_points, tuple(t for t in self.t_points if keep(t)),
                         self.params_list)

    def with_params(self, params: Iterable[JacobiParams]) -> "SweepGrid":
        return SweepGrid(self.theta_points, self.phi_points, self.t_points, tuple(params))

    def describe(self) -> dict:
        return {
            "theta_points": list(self.theta_points),
            "phi_points": list(self.phi_points),
            "t_points": list(self.t_points),
            "params": [[p.alpha, p.beta] for p in self.params_list],
        }


@dataclass(frozen=True)
class RatioReport:
    """Extremes of a ratio over a grid; ``argmin``/``argmax`` name the grid points."""

    name: str
    min_ratio: float
    max_ratio: float
    argmin: dict
    argmax: dict
    grid: dict = field(default_factory=dict)
    excluded: int = 0

    @property
    def spread(self) -> float:
        """``max/min``; infinite for an invalid band."""
        return self.max_ratio / self.min_ratio if self.is_valid() else math.inf

    def is_valid(self) -> bool:
        return 0 < self.min_ratio <= self.max_ratio < math.inf

    def band(self) -> dict:
        return {"min": self.min_ratio, "max": self.max_ratio, "spread": self.spread}

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CheckResult:
    name: str
    observed: float
    threshold: float
    passed: bool
    detail: str = ""


class _Band:
    """Running min/max with the coordinates where they occur."""

    def __init__(self):
        self.lo, self.hi = math.inf, -math.inf
        self.at_lo, self.at_hi = {}, {}
        self.excluded = 0
        self.bad = None

    def add(self, ratios: np.ndarray, coords: Callable[[int], dict], mask: np.ndarray | None = None):
        r = np.asarray(ratios, dtype=float).ravel()
        idx = np.arange(r.size)
        if mask is not None:
            m = np.asarray(mask, dtype=bool).ravel()
            self.excluded += int(np.count_nonzero(~m))
            r, idx = r[m], idx[m]
        if r.size == 0:
            return
        bad = ~(np.isfinite(r) & (r > 0))
        if np.any(bad) and self.bad is None:
            i = int(idx[np.argmax(bad)])
            self.bad = (float(r[np.argmax(bad)]), coords(i))
        r, idx = r[~bad], idx[~bad]
        if r.size == 0:
            return
        i_lo, i_hi = int(np.argmin(r)), int(np.argmax(r))
        if r[i_lo] < self.lo:
            self.lo, self.at_lo = float(r[i_lo]), coords(int(idx[i_lo]))
        if r[i_hi] > self.hi:
            self.hi, self.at_hi = float(r[i_hi]), coords(int(idx[i_hi]))

    def report(self, name: str, grid: dict) -> RatioReport:
        if self.lo == math.inf and self.bad is None:
            raise ValueError(f"{name}: no admissible grid points")
        lo, hi = self.lo, self.hi
        if self.bad is not None:
            # a non-positive or non-finite ratio makes the band invalid
            val, _ = self.bad
            lo = min(lo, val) if math.isfinite(val) else min(lo, 0.0)
            hi = max(hi, val) if math.isfinite(val) else math.inf
        return RatioReport(name, lo, hi, self.at_lo, self.at_hi, grid, self.excluded)


# --------------------------------------------------------------------------
# Kernel values against the envelope
# --------------------------------------------------------------------------


def _kernel_grid(p: JacobiParams, thetas, phis, t: float, route: str) -> np.ndarray:
    if route == "series":
        return heat_kernel_series_grid(p, thetas, phis, t)[0]
    if route == "reduction":
        return heat_kernel_reduced_grid(p, thetas, phis, t)[0]
    raise ValueError(f"unknown route {route!r}")


def kernel_table(p: JacobiParams, grid: SweepGrid, route: str = "series",
                 envelope: Callable = envelope_z) -> list[tuple[float, float, float, float, float, float]]:
    """Rows ``(theta, phi, t, G, Z, G/Z)`` in grid order (t outermost)."""
    th, ph = np.asarray(grid.theta_points), np.asarray(grid.phi_points)
    rows = []
    for t in grid.t_points:
        g = _kernel_grid(p, th, ph, t, route)
        z = envelope(p, th[:, None], ph[None, :], t)
        for i, a in enumerate(th):
            for j, b in enumerate(ph):
                rows.append((float(a), float(b), float(t), float(g[i, j]), float(z[i, j]), float(g[i, j] / z[i, j])))
    return rows


def bound_ratio_sweep(grid: SweepGrid, route: str = "series",
                      envelope: Callable = envelope_z) -> list[RatioReport]:
    """``R = G / Z`` over the grid, one report per parameter pair.

    ``envelope(p, theta, phi, t)`` may be replaced to check that a wrong
    envelope is detected.

    Raises
    ------
    ArithmeticError
        If some ratio is not finite and positive.
    """
    th, ph = np.asarray(grid.theta_points), np.asarray(grid.phi_points)
    reports = []
    for p in grid.params_list:
        band = _Band()
        for t in grid.t_points:
            g = _kernel_grid(p, th, ph, t, route)
            z = np.asarray(envelope(p, th[:, None], ph[None, :], t), dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                r = g / z
            band.add(r, lambda k, t=t: {"theta": float(th[k // ph.size]), "phi": float(ph[k % ph.size]), "t": t})
        if band.bad is not None:
            raise ArithmeticError(f"G/Z = {band.bad[0]} at {band.bad[1]} for {p}")
        rep = band.report(f"bound/{route}/{_key(p)}", grid.with_params([p]).describe())
        reports.append(rep)
    return reports


def long_time_sweep(p: JacobiParams, thetas: Sequence[float], t_points: Sequence[float] = LONG_T) -> RatioReport:
    """Band of ``G`` itself for large times (bounded above and below by constants)."""
    th = np.asarray(thetas, dtype=float)
    band = _Band()
    for t in t_points:
        g = heat_kernel_series_grid(p, th, th, t)[0]
        band.add(g, lambda k, t=t: {"theta": float(th[k // th.size]), "phi": float(th[k % th.size]), "t": t})
    return band.report(f"long_time/{_key(p)}", {"theta_points": list(th), "t_points": list(t_points)})


def jac_low_sweep(lam: float, thetas: Sequence[float], t_points: Sequence[float]) -> RatioReport:
    """``G_t^{lam,lam}(cos th, 1) / (t^{-lam-1} exp(-th^2/4t))`` for ``th`` in ``[0, pi/2]``."""
    th = np.asarray(thetas, dtype=float)
    band = _Band()
    for t in t_points:
        g = boundary_kernel_series(lam, lam, np.cos(th), t)
        env = np.exp((-lam - 1) * math.log(t) - th ** 2 / (4 * t))
        band.add(g / env, lambda k, t=t: {"theta": float(th[k]), "t": t})
    return band.report(f"jac_low/{lam!r}", {"theta_points": list(th), "t_points": list(t_points)})


def htl_sweep(lam: float, thetas: Sequence[float], t_points: Sequence[float]) -> RatioReport:
    """``H_t^lam(cos th) / (t^{-lam-1} exp(-th^2/4t))`` for ``th`` in ``[0, pi/2]``."""
    th = np.asarray(thetas, dtype=float)
    band = _Band()
    for t in t_points:
        h = np.asarray(h_aux_series(lam, np.cos(th), t), dtype=float)
        env = np.exp((-lam - 1) * math.log(t) - th ** 2 / (4 * t))
        band.add(h / env, lambda k, t=t: {"theta": float(th[k]), "t": t})
    return band.report(f"htl/{lam!r}", {"theta_points": list(th), "t_points": list(t_points)})


# --------------------------------------------------------------------------
# Envelope lemmas
# --------------------------------------------------------------------------


def lemma_exp_check(theta: float, phi: float, t: float | None, u_grid: Sequence[float],
                    v_grid: Sequence[float]) -> RatioReport:
    """``(F(u,v) - F(1,1)) / ((1-u) th ph + (1-v)(pi-th)(pi-ph))`` over a ``(u, v)`` grid.

    Zero denominators (0/0 points) are excluded.  The ratio does not depend on
    ``t``; the argument is accepted so that calls mirror the exponential form.
    """
    band = _Band()
    _exp_add(band, theta, phi, np.asarray(u_grid, dtype=float), np.asarray(v_grid, dtype=float))
    return band.report("exp", {"theta": theta, "phi": phi, "u_grid": list(u_grid), "v_grid": list(v_grid)})


def _exp_add(band: _Band, theta: float, phi: float, u: np.ndarray, v: np.ndarray):
    uu, vv = u[:, None], v[None, :]
    num = phase_f(theta, phi, uu, vv) - phase_f(theta, phi, 1.0, 1.0)
    den = (1 - uu) * theta * phi + (1 - vv) * (math.pi - theta) * (math.pi - phi)
    den = np.broadcast_to(den, num.shape)
    mask = den > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / den
    band.add(r, lambda k: {"theta": theta, "phi": phi, "u": float(u[k // v.size]), "v": float(v[k % v.size])}, mask)


def lemma_exp_sweep(thetas: Sequence[float], phis: Sequence[float], u_grid: Sequence[float],
                    v_grid: Sequence[float]) -> RatioReport:
    """Band of :func:`lemma_exp_check` merged over an angle grid."""
    band = _Band()
    u, v = np.asarray(u_grid, dtype=float), np.asarray(v_grid, dtype=float)
    for a in thetas:
        for b in phis:
            _exp_add(band, float(a), float(b), u, v)
    return band.report("exp", {"theta_points": list(thetas), "phi_points": list(phis),
                               "u_grid": list(u_grid), "v_grid": list(v_grid)})


def _ssigma_value(gamma: float, xi: float) -> float:
    """``(1+xi)^{gamma+1/2} int_[0,1] exp(-xi (1-s)) dPi_gamma(s)``."""
    if gamma == -0.5:
        return 0.5
    scale = (1 + xi) ** (gamma + 0.5)

    # sigma = 1 - s; the density is evaluated with the exact gap sigma
    def f(sig):
        return scale * np.exp(-xi * sig) * pi_density(gamma, 1.0 - sig, gap=sig)

    cut = min(1.0, 1.0 / (1.0 + xi))
    total = double_exponential(f, 0.0, cut, tol=1e-12)
    if cut < 1.0:
        total += double_exponential(f, cut, 1.0, tol=1e-12)
    return total


def lemma_ssigma_check(gamma: float, xi_grid: Sequence[float]) -> RatioReport:
    """``int_[0,1] exp(-xi(1-s)) dPi_gamma(s) / (1+xi)^{-gamma-1/2}`` over ``xi_grid``."""
    if not gamma >= -0.5:
        raise ValueError("gamma must be >= -1/2")
    xi = np.asarray(xi_grid, dtype=float)
    if np.any(xi < 0):
        raise ValueError("xi must be non-negative")
    r = np.array([_ssigma_value(gamma, float(x)) for x in xi])
    band = _Band()
    band.add(r, lambda k: {"xi": float(xi[k])})
    return band.report(f"ssigma/{gamma!r}", {"xi_grid": list(xi)})


# --------------------------------------------------------------------------
# Individual integrals of the reduction formula against their envelopes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _ProofTerm:
    name: str
    kind: str
    dlam: int
    mu: EndpointMeasure
    mv: EndpointMeasure
    trig: Callable[[float, float, float, float], float]
    envelope: Callable[[float, float, float, float, float], np.ndarray]


def _e(th, ph, t):
    return np.exp(-((th - ph) ** 2) / (4 * t))


def _proof_terms(p: JacobiParams) -> list[_ProofTerm]:
    a, b = p
    atoms = EndpointMeasure("atoms")
    q = lambda th, ph: (math.pi - th) * (math.pi - ph)
    if p.case == "ii":
        return [
            _ProofTerm("I1", "G", 1, EndpointMeasure.d_pi(a), EndpointMeasure.pi_dv(b),
                       lambda th, ph, s, c: -q(th, ph),
                       lambda th, ph, t: (t + th * ph) ** (-a - 0.5) * q(th, ph) ** 2
                       * (t + q(th, ph)) ** (-b - 2.5) * t ** -0.5 * _e(th, ph, t)),
            _ProofTerm("I2", "G", 0, EndpointMeasure.d_pi(a), atoms, lambda th, ph, s, c: 1.0,
                       lambda th, ph, t: (t + th * ph) ** (-a - 0.5) * t ** (-b - 1) * _e(th, ph, t)),
        ]
    if p.case in ("iv", "v"):
        last = "H" if p.case == "v" else "G"
        pa, pb = EndpointMeasure.pi_dv(a), EndpointMeasure.pi_dv(b)
        return [
            _ProofTerm("J1", "G", 2, pa, pb, lambda th, ph, s, c: math.sin(th) * math.sin(ph),
                       lambda th, ph, t: (th * ph) ** 2 * (t + th * ph) ** (-a - 2.5) * q(th, ph) ** 2
                       * (t + q(th, ph)) ** (-b - 2.5) * t ** -0.5 * _e(th, ph, t)),
            _ProofTerm("J2", "G", 1, pa, atoms, lambda th, ph, s, c: -s,
                       lambda th, ph, t: (th * ph) ** 2 * (t + th * ph) ** (-a - 2.5) * t ** (-b - 1) * _e(th, ph, t)),
            _ProofTerm("J3", "G", 1, atoms, pb, lambda th, ph, s, c: -c,
                       lambda th, ph, t: q(th, ph) ** 2 * t ** (-a - 1) * (t + q(th, ph)) ** (-b - 2.5)
                       * _e(th, ph, t)),
            _ProofTerm("J4", last, 0, atoms, atoms, lambda th, ph, s, c: 1.0,
                       lambda th, ph, t: t ** (-a - b - 1.5) * _e(th, ph, t)),
        ]
    raise ValueError(f"proof terms are defined for cases (ii)-(v); {p} is case ({p.case})")


def _term_value(term: _ProofTerm, lam0: float, t: float, th: float, ph: float) -> tuple[float, float]:
    s_, c_ = _half_angle_products(th, ph)
    tf = term.trig(th, ph, s_, c_)
    if tf == 0.0:
        return 0.0, 0.0
    lam = lam0 + term.dlam
    kern = _boundary_kernel(term.kind, lam, t / 4)
    spec = _Term(1.0, term.kind, lam, term.mu, term.mv, "1")
    coarse = _term_integral(spec, kern, s_, c_, False)
    fine = _term_integral(spec, kern, s_, c_, True)
    return tf * fine, abs(fine - coarse) / max(abs(fine), 1e-300)


def proof_term_check(p: JacobiParams, grid: SweepGrid) -> list[RatioReport]:
    """Ratio bands of the individual integrals (and of ``I1 + I2`` against ``Z``).

    Case (iii) is mapped to case (ii) by ``(a, b, th, ph) -> (b, a, pi-th, pi-ph)``,
    which leaves the kernel unchanged.  Points where the envelope vanishes
    (the integral vanishes with it) are excluded.  Only ``t`` with
    ``t/4 >= t_min`` is used.
    """
    p.validate()
    mirror = p.case == "iii"
    q = JacobiParams(p.beta, p.alpha) if mirror else p
    terms = _proof_terms(q)
    th = np.asarray(grid.theta_points, dtype=float)
    ph = np.asarray(grid.phi_points, dtype=float)
    ts = [t for t in grid.t_points if t / 4 >= T_MIN]
    if not ts:
        raise ValueError(f"proof terms need t >= {4 * T_MIN}")
    bands = {tm.name: _Band() for tm in terms}
    if q.case == "ii":
        bands["I1+I2"] = _Band()
    same = np.array_equal(th, ph)
    worst_quad = 0.0
    for t in ts:
        vals = {tm.name: np.full((th.size, ph.size), np.nan) for tm in terms}
        envs = {tm.name: np.full((th.size, ph.size), np.nan) for tm in terms}
        dqs = {tm.name: np.zeros((th.size, ph.size)) for tm in terms}
        for i in range(th.size):
            for j in range(ph.size):
                if same and j < i:
                    for tm in terms:
                        for d in (vals, envs, dqs):
                            d[tm.name][i, j] = d[tm.name][j, i]
                    continue
                a_, b_ = (math.pi - th[i], math.pi - ph[j]) if mirror else (th[i], ph[j])
                for tm in terms:
                    vals[tm.name][i, j], dqs[tm.name][i, j] = _term_value(tm, q.lam, t, float(a_), float(b_))
                    envs[tm.name][i, j] = tm.envelope(float(a_), float(b_), t)
        coords = lambda k, t=t: {"theta": float(th[k // ph.size]), "phi": float(ph[k % ph.size]), "t": t}
        for tm in terms:
            env = envs[tm.name]
            with np.errstate(divide="ignore", invalid="ignore"):
                bands[tm.name].add(vals[tm.name] / env, coords, env > 0)
            if np.any(env > 0):
                worst_quad = max(worst_quad, float(np.max(dqs[tm.name][env > 0])))
        if q.case == "ii":
            z = envelope_z(q, *(np.meshgrid(math.pi - th, math.pi - ph, indexing="ij") if mirror
                                else np.meshgrid(th, ph, indexing="ij")), t)
            bands["I1+I2"].add((vals["I1"] + vals["I2"]) / z, coords)
    desc = grid.with_params([p]).with_t(lambda t: t / 4 >= T_MIN).describe()
    desc["max_quadrature_change"] = worst_quad
    return [bands[name].report(f"proof/{name}/{_key(p)}", desc) for name in bands]


# --------------------------------------------------------------------------
# Identities
# --------------------------------------------------------------------------


def _h_lambda(p: JacobiParams) -> float:
    lam = p.lam
    return lam if -1.5 < lam <= -1 else -1.25


def identity_suite(p: JacobiParams, grid: SweepGrid,
                   prefactor: Callable[[float], float] | None = None) -> list[CheckResult]:
    """Differential identities, heat equations, mass and semigroup checks for ``p``.

    H checks use ``lam = a + b + 1/2`` when it lies in ``(-3/2, -1]`` and
    ``-1.25`` otherwise.  ``prefactor`` is passed to
    :func:`boundary_deriv_residual` (mutation hook).
    """
    p.validate()
    xs = np.cos(np.asarray(grid.theta_points, dtype=float))
    lam = _h_lambda(p)
    out = []

    def add(name, observed, thr, le=True, detail=""):
        ok = observed <= thr if le else observed >= thr
        out.append(CheckResult(name, float(observed), thr, bool(ok), detail))

    diff = max(float(np.max(np.abs(boundary_deriv_residual(p, xs, t, prefactor)))) for t in grid.t_points)
    add("boundary_derivative", diff, IDENTITY_TOL)
    r1 = r2 = 0.0
    for t in grid.t_points:
        a1, a2 = h_deriv_residuals(lam, xs, t)
        r1, r2 = max(r1, float(np.max(np.abs(a1)))), max(r2, float(np.max(np.abs(a2))))
    add("h_first_derivative", r1, IDENTITY_TOL, detail=f"lambda={lam}")
    add("h_second_derivative", r2, IDENTITY_TOL, detail=f"lambda={lam}")

    for label, target in (("G", HeatTarget("G", p)), ("H", HeatTarget("H", lam=lam))):
        worst, order = 0.0, math.inf
        for t in HEAT_T:
            if label == "G":
                scale = float(np.max(np.abs(heat_kernel_series_grid(p, [0.0], grid.theta_points, t)[0])))
            else:
                scale = float(np.max(np.abs(h_aux_series(lam, xs, t))))
            res = np.max(np.abs(heat_equation_residual(target, xs, t, h_t=HEAT_STEP)))
            worst = max(worst, float(res) / scale)
            e1 = np.max(np.abs(heat_equation_residual(target, xs, t, h_t=ORDER_STEP)))
            e2 = np.max(np.abs(heat_equation_residual(target, xs, t, h_t=ORDER_STEP / 2)))
            order = min(order, math.log2(e1 / e2))
        add(f"heat_equation_{label}", worst, IDENTITY_TOL)
        add(f"heat_fd_order_{label}", order, MIN_ORDER, le=False)

    mass = max(abs(mass_residual(p, float(a), t)) for a in grid.theta_points[::4] for t in grid.t_points)
    add("mass", mass, IDENTITY_TOL)
    sub = grid.theta_points[:: max(1, len(grid.theta_points) // 4)]
    semi = max(abs(semigroup_residual(p, float(a), float(b), t, t / 2))
               for a in sub for b in sub for t in SEMIGROUP_T)
    add("semigroup", semi, IDENTITY_TOL)
    return out


# --------------------------------------------------------------------------
# Baseline bands
# --------------------------------------------------------------------------


def default_baseline_path():
    """The baseline shipped with the package."""
    return resources.files("jacobi_heat") / "data" / "baseline.json"


def collect_bands(grid: SweepGrid | None = None, include: Sequence[str] = ("bounds", "long_time", "lemmas", "proof"),
                  ) -> dict[str, RatioReport]:
    """Every regression-tracked band on ``grid`` (default grid if omitted)."""
    grid = grid or SweepGrid.default()
    out: dict[str, RatioReport] = {}
    if "bounds" in include:
        for rep in bound_ratio_sweep(grid, "series"):
            out[rep.name] = rep
    if "long_time" in include:
        for p in grid.params_list:
            rep = long_time_sweep(p, grid.theta_points)
            out[rep.name] = rep
    if "lemmas" in include:
        half = _angles(13, math.pi / 2)
        ts = [t for t in grid.t_points if 0.01 <= t <= 1]
        for lam in JAC_LOW_LAMBDAS:
            rep = jac_low_sweep(lam, half, ts)
            out[rep.name] = rep
        for lam in HTL_LAMBDAS:
            rep = htl_sweep(lam, half, ts)
            out[rep.name] = rep
        for g in SSIGMA_GAMMAS:
            rep = lemma_ssigma_check(g, XI_GRID)
            out[rep.name] = rep
        out["exp"] = lemma_exp_sweep(grid.theta_points, grid.phi_points, U_GRID, U_GRID)
    if "proof" in include:
        for p in grid.params_list:
            if p.case == "i":
                continue
            for rep in proof_term_check(p, grid):
                out[rep.name] = rep
    return out


def dumps17(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits (non-finite as null)."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps17(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.floating, np.integer)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps17(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps17(v, indent, _level + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_baseline(path, reports: dict[str, RatioReport], grid: SweepGrid | None = None) -> None:
    grid = grid or SweepGrid.default()
    doc = {
        "version": BASELINE_VERSION,
        "slack": BASELINE_SLACK,
        "grid": grid.describe(),
        "bands": {k: reports[k].band() for k in sorted(reports)},
    }
    Path(path).write_text(dumps17(doc) + "\n", encoding="utf-8")


def load_baseline(path=None) -> dict:
    src = default_baseline_path() if path is None else Path(path)
    doc = json.loads(src.read_text(encoding="utf-8"))
    if doc.get("version") != BASELINE_VERSION:
        raise ValueError(f"unsupported baseline version {doc.get('version')!r}")
    return doc


def compare_bands(reports: dict[str, RatioReport], baseline: dict,
                  slack: float = BASELINE_SLACK) -> list[CheckResult]:
    """Each band must be valid and lie within the recorded band widened by ``1 + slack``.

    Bands without a recorded entry are only checked for validity.  The
    spread ``max/min`` must not exceed the recorded spread times
    ``1 + slack``; the minimum must not drop below the recorded minimum
    divided by ``1 + slack`` and the maximum must not exceed the recorded
    maximum times ``1 + slack``.
    """
    bands = baseline["bands"]
    f = 1.0 + slack
    out = []
    for name in sorted(reports):
        rep = reports[name]
        if name not in bands:
            out.append(CheckResult(name, rep.spread, math.inf, rep.is_valid(), "no recorded band; validity only"))
            continue
        ref = bands[name]
        ok = (rep.is_valid() and rep.spread <= ref["spread"] * f
              and rep.min_ratio >= ref["min"] / f and rep.max_ratio <= ref["max"] * f)
        out.append(CheckResult(name, rep.spread, ref["spread"] * f, bool(ok),
                               f"band [{rep.min_ratio:.6g}, {rep.max_ratio:.6g}] vs "
                               f"[{ref['min']:.6g}, {ref['max']:.6g}]"))
    return out

