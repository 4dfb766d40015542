"""Worked examples and stated properties, one block per module."""

import math

import mpmath
import numpy as np
import pytest

from jacobi_heat import verify
from jacobi_heat.cli import run
from jacobi_heat.jacobi import (
    JacobiParams,
    frak_c,
    frak_d,
    gegenbauer_eval,
    jacobi_deriv,
    jacobi_eval,
    jacobi_eval_explicit,
    jacobi_operator_residual,
    norm_h,
)
from jacobi_heat.kernel import (
    KernelQuery,
    boundary_deriv_residual,
    boundary_kernel_series,
    envelope_z,
    even_part,
    odd_part,
    h_aux_series,
    h_deriv_residuals,
    heat_kernel_reduced,
    heat_kernel_series,
    phase_f,
    truncation_depth,
)
from jacobi_heat.measures import (
    EndpointMeasure,
    double_exponential,
    gauss_jacobi_rule,
    gegenbauer_rule,
    integrate,
    pi_density,
    pi_function,
)
from jacobi_heat.product import dk_lhs, dk_rhs, int1_rhs, phi, phi_even, phi_partial
from jacobi_heat.scalar import incomplete_beta, log_gamma, pochhammer

# --------------------------------------------------------------------------- scalar


def test_log_gamma_examples():
    assert log_gamma(1.0) == (0.0, 1)
    lv, s = log_gamma(0.5)
    assert s == 1 and lv == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-15)
    lv, s = log_gamma(-0.5)
    assert s == -1 and lv == pytest.approx(math.log(2 * math.sqrt(math.pi)), rel=1e-15)


def test_pochhammer_examples():
    assert pochhammer(7.3, 0) == 1.0
    assert all(pochhammer(1.0, n) == math.factorial(n) for n in range(12))
    assert pochhammer(0.5, 2) == 0.75
    for k in range(30):
        assert pochhammer(0.37, k + 1) == pochhammer(0.37, k) * (0.37 + k)


def test_incomplete_beta_arcsine_example():
    # int_0^{1/4} v^{-1/2}(1-v)^{-1/2} dv = 2 arcsin(1/2) = pi/3
    assert incomplete_beta(0.25, 0.5, 0.5) == pytest.approx(math.pi / 3, rel=1e-14)


@pytest.mark.parametrize("lam", np.linspace(-0.99, 3.0, 41))
def test_duplication_formula(lam):
    lhs = log_gamma(2 * lam + 2)[0]
    rhs = log_gamma(lam + 1)[0] + log_gamma(lam + 1.5)[0] + (2 * lam + 1) * math.log(2) - 0.5 * math.log(math.pi)
    assert math.exp(lhs - rhs) == pytest.approx(1.0, abs=1e-12)


# --------------------------------------------------------------------------- jacobi


def test_jacobi_examples():
    assert jacobi_eval(0, 0.3, -0.7, 0.123) == 1.0
    for n in (1, 5, 17):
        ref = math.gamma(n + 0.3 + 1) / (math.gamma(n + 1) * math.gamma(1.3))
        assert jacobi_eval(n, 0.3, -0.7, 1.0) == pytest.approx(ref, rel=1e-13)
    assert jacobi_eval(1, 0.5, -0.5, 0.0) == pytest.approx(0.5, rel=1e-15)
    assert jacobi_eval_explicit(0, -3.2, 1.1, 0.4) == 1.0
    assert jacobi_eval_explicit(2, 0.0, 0.0, 1.0) == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("a", [-0.9, -0.5, 0.0, 1.7])
@pytest.mark.parametrize("b", [-0.9, -0.5, 0.0, 1.7])
def test_explicit_sum_agrees_with_recurrence(a, b):
    xs = np.linspace(-1, 1, 13)
    for n in range(16):
        np.testing.assert_allclose(jacobi_eval_explicit(n, a, b, xs), jacobi_eval(n, a, b, xs), rtol=1e-10,
                                   atol=1e-10)


def test_explicit_sum_accepts_parameters_below_minus_one():
    # P_1^{a,b}(x) = (a+1) + (a+b+2)(x-1)/2 for any real a, b
    assert jacobi_eval_explicit(1, -2.5, -1.5, 0.2) == pytest.approx(-1.5 + (-2.0) * (-0.4), rel=1e-15)


def test_derivative_examples():
    assert jacobi_deriv(0, 0.3, 0.2, 0.5) == 0.0
    np.testing.assert_allclose(jacobi_deriv(1, 0.0, 0.0, np.linspace(-1, 1, 7)), 1.0)
    h = 1e-5
    for x in np.linspace(-0.9, 0.9, 7):
        fd = (jacobi_eval(6, 0.4, -0.6, x + h) - jacobi_eval(6, 0.4, -0.6, x - h)) / (2 * h)
        assert jacobi_deriv(6, 0.4, -0.6, x) == pytest.approx(fd, abs=1e-6)


def test_gegenbauer_examples():
    xs = np.linspace(-1, 1, 9)
    np.testing.assert_allclose(gegenbauer_eval(0, 0.8, xs), 1.0)
    np.testing.assert_allclose(gegenbauer_eval(1, 1.0, xs), 2 * xs, atol=1e-15)
    np.testing.assert_allclose(gegenbauer_eval(2, 0.5, xs), (3 * xs ** 2 - 1) / 2, atol=1e-15)
    with pytest.raises(ValueError):
        gegenbauer_eval(2, -0.5, 0.1)


def test_norm_examples():
    a, b = 0.3, -0.8
    ref = 2 ** (a + b + 1) * math.gamma(a + 1) * math.gamma(b + 1) / math.gamma(a + b + 2)
    assert norm_h(0, a, b) == pytest.approx(ref, rel=1e-14)
    assert norm_h(0, -0.5, -0.5) == pytest.approx(math.pi, rel=1e-15)
    assert norm_h(1, 0.0, 0.0) == pytest.approx(2 / 3, rel=1e-15)


def test_product_constant_examples():
    a, b = 0.3, -0.8
    ref = math.gamma(a + b + 2) / (math.sqrt(math.pi) * math.gamma(a + b + 2.5))
    assert frak_c(0, a, b) == pytest.approx(ref, rel=1e-14)
    assert frak_c(0, -0.25, -0.25) == pytest.approx(0.5, rel=1e-15)
    for n in range(51):
        for a in (-0.99, -0.5, 0.0, 2.0):
            for b in (-0.99, -0.3, 1.0, 2.0):
                assert frak_c(n, a, b) > 0
    lam = 0.7
    assert frak_d(0, lam) == pytest.approx(math.gamma(lam + 1.5) / (math.sqrt(math.pi) * math.gamma(lam + 2)),
                                           rel=1e-14)
    assert frak_d(0, -0.5) == pytest.approx(2 / math.pi, rel=1e-15)
    assert frak_d(2, 0.0) == pytest.approx(2.5, rel=1e-15)


def test_operator_residual_examples():
    assert jacobi_operator_residual(0, 0.3, 0.4, 0.2) == 0.0
    assert jacobi_operator_residual(1, 0.0, 0.0, 0.0) == 0.0
    xs = np.linspace(-1, 1, 21)
    for a, b in [(0.3, 0.4), (-0.9, -0.95), (1.7, -0.5)]:
        for n in range(11):
            tol = 1e-9 * (1 + np.abs(jacobi_eval(n, a, b, xs)) * n * n)
            assert np.all(np.abs(jacobi_operator_residual(n, a, b, xs)) <= tol)


@pytest.mark.parametrize("a,b", [(0.5, 0.5), (1.3, -0.5), (-0.6, -0.7), (-0.3, 2.0)])
def test_szego_growth_band(a, b):
    q = max(a, b, -0.5)
    xs = np.linspace(-1, 1, 2001)
    ratios = [np.max(np.abs(jacobi_eval(n, a, b, xs))) / (n + 1) ** q for n in range(0, 501, 25)]
    assert max(ratios) / min(ratios) < 4


@pytest.mark.parametrize("lam", [-1.4, -1.0, -0.5, 0.0, 1.5])
def test_stirling_rate_of_ultraspherical_constant(lam):
    r = [frak_d(2 * n, lam) / n ** (lam + 1) for n in (10, 30, 100, 300, 1000)]
    assert all(v > 0 for v in r)
    assert max(r) / min(r) < 1.5


def test_parity():
    xs = np.linspace(-1, 1, 17)
    for n in range(9):
        np.testing.assert_allclose(jacobi_eval(n, 0.7, 0.7, -xs), (-1) ** n * jacobi_eval(n, 0.7, 0.7, xs),
                                   atol=1e-14)


@pytest.mark.parametrize("a,b", [(0.5, 0.5), (-0.75, -0.9), (1.3, -0.5)])
def test_orthogonality(a, b):
    rule = gauss_jacobi_rule(a, b, 12)
    for m in range(11):
        for n in range(11):
            val = rule.apply(lambda x: jacobi_eval(m, a, b, x) * jacobi_eval(n, a, b, x))
            ref = norm_h(n, a, b) if m == n else 0.0
            assert val == pytest.approx(ref, abs=1e-10 * max(1.0, ref))


# --------------------------------------------------------------------------- measures


@pytest.mark.parametrize("gamma", [-0.95, -0.75, -0.55])
def test_pi_comparable_to_edge_power(gamma):
    # points near 0 and, through the gap 1 - |u|, points near the edges
    u = np.concatenate([np.logspace(-12, -2, 30), np.linspace(0.01, 0.99, 50), 1 - np.logspace(-12, -2, 30)])
    gap = np.concatenate([1 - u[:80], np.logspace(-12, -2, 30)])
    both = np.concatenate([u, -u])
    gaps = np.concatenate([gap, gap])
    r = np.abs(pi_function(gamma, both, gap=gaps)) / (np.abs(both) * gaps ** (gamma + 0.5))
    assert np.all(r > 0) and np.all(np.isfinite(r))
    assert r.max() / r.min() < 20


def _half_moment(alpha):
    # int_{(0,1]} (1-u) dPi_alpha(u), written as int_0^1 Pi_alpha(u) du after integrating by parts
    return double_exponential(lambda u: pi_function(alpha, u), 0.0, 1.0, tol=1e-13)


def test_half_moment_vanishes_at_atom_parameter():
    vals = [abs(_half_moment(-0.5 + s * d)) for d in (1e-1, 1e-2, 1e-3) for s in (1, -1)]
    above, below = vals[0::2], vals[1::2]
    assert above[0] > above[1] > above[2] and below[0] > below[1] > below[2]
    assert max(above[2], below[2]) < 5e-3
    direct = double_exponential(lambda u: (1 - u) * pi_density(0.3, u), 0.0, 1.0, tol=1e-13)
    assert direct == pytest.approx(_half_moment(0.3), rel=1e-11)


@pytest.mark.parametrize("gamma", [-0.3, 1.0, 2.5])
def test_gegenbauer_moments_exact(gamma):
    n = 5
    rule = gegenbauer_rule(gamma, n)
    c = float(mpmath.gamma(gamma + 1) / (mpmath.sqrt(mpmath.pi) * mpmath.gamma(gamma + 0.5)))
    for k in range(0, 2 * n, 2):
        ref = c * float(mpmath.beta((k + 1) / 2, gamma + 0.5))
        assert rule.apply(lambda u: u ** k) == pytest.approx(ref, rel=1e-12)


def test_integrate_examples():
    assert integrate(EndpointMeasure.d_pi(-0.5), np.ones_like) == 1.0
    assert integrate(EndpointMeasure.d_pi(1.0), lambda u: u ** 2) == pytest.approx(0.25, rel=1e-13)
    assert integrate(EndpointMeasure("lebesgue"), lambda u: u ** 2) == pytest.approx(2 / 3, rel=1e-13)


def test_double_exponential_examples():
    assert double_exponential(np.ones_like, 0.0, 1.0) == pytest.approx(1.0, abs=1e-10)
    assert double_exponential(lambda x: x ** -0.5, 0.0, 1.0) == pytest.approx(2.0, abs=1e-10)
    assert double_exponential(lambda x: (1 - x) ** -0.3, 0.0, 1.0) == pytest.approx(1 / 0.7, abs=1e-10)


# --------------------------------------------------------------------------- kernel


def test_truncation_depth_matches_direct_tail_at_small_time():
    # for alpha = beta = 0, sup|P_n| = 1 and 1/h_n = (2n+1)/2
    def tail(n):
        return sum(math.exp(-0.01 * m * (m + 1)) * (2 * m + 1) / 2 for m in range(n + 1, 3000))

    direct = next(n for n in range(3000) if tail(n) <= 1e-12)
    depth = truncation_depth(JacobiParams(0.0, 0.0), 0.01, 1e-12)
    assert depth >= direct and tail(depth) <= 1e-12
    assert depth - direct <= 2


def test_series_and_reduction_example():
    q = KernelQuery(JacobiParams(0.3, 0.7), 1.0, 2.0, 0.5)
    assert heat_kernel_reduced(q).value == pytest.approx(heat_kernel_series(q).value, rel=1e-8)


def test_h_equals_reduced_kernel_at_opposite_ends():
    # with alpha = beta = lam/2 - 1/4, theta = pi, phi = 0 only the H integral survives
    lam, t = -1.25, 0.5
    a = lam / 2 - 0.25
    g = heat_kernel_series(KernelQuery(JacobiParams(a, a), math.pi, 0.0, t)).value
    h = h_aux_series(lam, 0.0, t / 4)
    assert g == pytest.approx(h / (norm_h(0, a, a) * frak_c(0, a, a)), rel=1e-12)


def test_envelope_direct_formula_example():
    a, b, th, ph, t = 0.3, 0.7, 1.0, 2.0, 0.1
    ref = ((t + th * ph) ** (-a - 0.5) * (t + (math.pi - th) * (math.pi - ph)) ** (-b - 0.5) * t ** -0.5
           * math.exp(-(th - ph) ** 2 / (4 * t)))
    assert envelope_z(KernelQuery(JacobiParams(a, b), th, ph, t)) == pytest.approx(ref, rel=1e-14)
    same = envelope_z(JacobiParams(a, b), 1.3, 1.3, t)
    assert same == pytest.approx((t + 1.69) ** (-a - 0.5) * (t + (math.pi - 1.3) ** 2) ** (-b - 0.5) * t ** -0.5)


def test_phase_bounds_and_monotone_in_v():
    th, ph = 0.9, 2.3
    u = np.linspace(0, 1, 21)
    grid = phase_f(th, ph, u[:, None], u[None, :])
    assert np.all(grid >= phase_f(th, ph, 1.0, 1.0) - 1e-15)
    assert np.all(grid <= phase_f(th, ph, 0.0, 0.0) + 1e-15)
    assert np.all(np.diff(grid, axis=0) <= 1e-15) and np.all(np.diff(grid, axis=1) <= 1e-15)


@pytest.mark.parametrize("theta,phi", [(0.3, 1.9), (2.5, 2.5), (0.0, math.pi)])
def test_atom_pair_reduction_shape(theta, phi):
    # alpha = beta = -1/2: the atom pairs average the inner kernel over z = +-cos((th -+ ph)/2)
    t = 0.3
    g = heat_kernel_series(KernelQuery(JacobiParams(-0.5, -0.5), theta, phi, t)).value
    z = np.cos(np.array([(theta - phi) / 2, (theta + phi) / 2]))
    inner = boundary_kernel_series(-0.5, -0.5, np.concatenate([z, -z]), t / 4)
    assert g == pytest.approx(0.25 * inner.sum(), rel=1e-12)


def test_boundary_kernel_increasing_and_identity_examples():
    xs = np.linspace(-1, 1, 41)
    for a, b in [(0.5, 0.5), (-0.75, -0.9), (1.3, -0.5)]:
        assert np.all(np.diff(boundary_kernel_series(a, b, xs, 0.2)) > 0)
    assert np.max(np.abs(boundary_deriv_residual(JacobiParams(-0.5, -0.5), xs, 1.0))) <= 1e-9


def test_h_identity_examples():
    xs = np.linspace(-1, 1, 21)
    r1, r2 = h_deriv_residuals(-1.2, xs, 0.3)
    assert np.max(np.abs(r1)) <= 1e-8 and np.max(np.abs(r2)) <= 1e-8
    f = lambda x: np.exp(x) + x ** 3
    np.testing.assert_allclose(even_part(f, xs) + odd_part(f, xs), f(xs), rtol=1e-15, atol=1e-15)


@pytest.mark.parametrize("p", verify.DEFAULT_PARAMS, ids=str)
def test_both_routes_positive(p):
    th = verify._angles(5)
    for t in (0.05, 1.0):
        for a in th:
            for b in th:
                q = KernelQuery(p, a, b, t)
                assert heat_kernel_series(q).value > 0 and heat_kernel_reduced(q).value > 0


# --------------------------------------------------------------------------- product


def test_phi_examples():
    assert phi(-1, 0.3, 0.4, 0.5, 0.1, 0.2) == 0.0
    assert phi(0, 0.3, 0.4, 0.5, 0.1, 0.2) == pytest.approx(frak_d(0, 0.3))


def _stencil(f, x, h, order):
    if order == 1:
        return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


@pytest.mark.parametrize("lam", [1.3, -0.8, -1.2])
def test_derivative_cascade_to_1e_6(lam):
    k, th, ph, u0, v0 = 6, 1.1, 2.0, 0.3, -0.2
    scale = max(abs(float(phi_partial(i, j, k, lam, th, ph, u0, v0))) for i, j in ((1, 0), (0, 1), (1, 1)))
    du = _stencil(lambda u: phi(k, lam, th, ph, u, v0), u0, 1e-2, 1)
    dv = _stencil(lambda v: phi(k, lam, th, ph, u0, v), v0, 1e-2, 1)
    duv = _stencil(lambda v: _stencil(lambda u: phi(k, lam, th, ph, u, v), u0, 1e-2, 1), v0, 1e-2, 1)
    assert abs(float(phi_partial(1, 0, k, lam, th, ph, u0, v0)) - du) <= 1e-6 * scale
    assert abs(float(phi_partial(0, 1, k, lam, th, ph, u0, v0)) - dv) <= 1e-6 * scale
    assert abs(float(phi_partial(1, 1, k, lam, th, ph, u0, v0)) - duv) <= 1e-6 * scale


def test_phi_even_examples():
    # theta = 0 removes the u dependence, and even k makes phi even in v
    u = np.linspace(-1, 1, 7)
    np.testing.assert_allclose(phi_even(4, 0.7, 0.0, 1.2, u, 0.4), phi(4, 0.7, 0.0, 1.2, u, 0.4), rtol=1e-13)
    # over the quarter square against 4 dPi dPi equals the full square
    a, b = 0.4, 1.1
    ru, rv = gegenbauer_rule(a, 8), gegenbauer_rule(b, 8)
    f = phi(6, a + b + 0.5, 0.8, 2.0, ru.nodes[:, None], rv.nodes[None, :])
    full = ru.weights @ f @ rv.weights
    pu, pv = ru.nodes > 0, rv.nodes > 0
    e = phi_even(6, a + b + 0.5, 0.8, 2.0, ru.nodes[pu][:, None], rv.nodes[pv][None, :])
    assert 4 * ru.weights[pu] @ e @ rv.weights[pv] == pytest.approx(full, rel=1e-13)


def test_lhs_examples():
    p = JacobiParams(0.3, -0.8)
    assert dk_lhs(0, p, 0.4, 2.0) == pytest.approx(frak_c(0, 0.3, -0.8), rel=1e-15)
    assert dk_lhs(5, p, 0.4, 2.0) == pytest.approx(dk_lhs(5, p, 2.0, 0.4), rel=1e-15)
    assert dk_lhs(1, JacobiParams(0, 0), 1.0, 2.0) == pytest.approx(frak_c(1, 0, 0) * math.cos(1) * math.cos(2),
                                                                    rel=1e-14)


@pytest.mark.parametrize("p", [JacobiParams(0.5, 0.5), JacobiParams(0.3, -0.8), JacobiParams(-0.8, 0.3),
                               JacobiParams(-0.7, -0.9)], ids=str)
def test_rhs_degree_zero(p):
    assert dk_rhs(0, p, 0.6, 1.7) == pytest.approx(frak_c(0, *p), rel=1e-10)
    assert int1_rhs(0, p, 0.6, 1.7) == pytest.approx(frak_c(0, *p), rel=1e-12)


def test_rhs_both_signed_example():
    p = JacobiParams(-0.7, -0.9)
    for n in range(9):
        for th, ph in [(0.3, 0.8), (2.2, 1.3), (0.0, math.pi)]:
            assert dk_rhs(n, p, th, ph) == pytest.approx(dk_lhs(n, p, th, ph), rel=1e-7)


def test_regularised_form_examples():
    for p, tol in [(JacobiParams(0.2, 0.9), 1e-8), (JacobiParams(-0.75, 0.4), 1e-6)]:
        for n in range(6):
            for th, ph in [(0.4, 1.3), (2.6, 0.0)]:
                assert int1_rhs(n, p, th, ph) == pytest.approx(dk_lhs(n, p, th, ph), rel=tol)


def test_doubling_nodes_is_stable():
    p = JacobiParams(1.3, 0.0)
    for n in (3, 10, 20):
        a = dk_rhs(n, p, 0.7, 2.2, n_nodes=n + 2)
        b = dk_rhs(n, p, 0.7, 2.2, n_nodes=2 * (n + 2))
        assert abs(a - b) <= 1e-12 * abs(a)


def test_signed_case_approaches_weighted_case():
    # the value moves linearly in beta, so the gap to beta = -1/2 shrinks tenfold per decade
    base = dk_rhs(3, JacobiParams(0.3, -0.5), 0.7, 2.2)
    gaps = [abs(dk_rhs(3, JacobiParams(0.3, -0.5 - d), 0.7, 2.2) - base) for d in (1e-1, 1e-2, 1e-3)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[1] / gaps[2] == pytest.approx(10, rel=0.05)
    lhs = lambda b: dk_lhs(3, JacobiParams(0.3, b), 0.7, 2.2)
    slope = (lhs(-0.5 + 1e-6) - lhs(-0.5 - 1e-6)) / 2e-6
    assert gaps[2] == pytest.approx(abs(slope) * 1e-3, rel=0.01)


# --------------------------------------------------------------------------- verify


def test_both_signed_small_sum_band_is_moderate():
    grid = verify.SweepGrid.default(params=(JacobiParams(-0.75, -0.9),))
    base = verify.load_baseline()["bands"]["bound/series/-0.75,-0.9"]
    assert base["spread"] <= 1e3
    (rep,) = verify.bound_ratio_sweep(grid.with_t(lambda t: t >= 0.5))
    assert rep.spread <= 1e3


def test_exp_lemma_at_right_angles():
    rep = verify.lemma_exp_check(math.pi / 2, math.pi / 2, 0.1, verify.U_GRID, verify.U_GRID)
    assert rep.is_valid()


def test_ssigma_examples():
    rep = verify.lemma_ssigma_check(-0.5, verify.XI_GRID)
    assert rep.min_ratio == rep.max_ratio == 0.5
    for g in (0.0, 1.0):
        rep = verify.lemma_ssigma_check(g, verify.XI_GRID)
        assert 0.05 <= rep.min_ratio and rep.max_ratio <= 2
    # for gamma = 2.5 the band reaches 4 Gamma(7/2) / sqrt(pi) = 7.5 as xi grows
    rep = verify.lemma_ssigma_check(2.5, verify.XI_GRID)
    assert rep.max_ratio == pytest.approx(7.5, rel=1e-3) and rep.min_ratio >= 0.05


def test_fourth_integral_band_both_signed():
    p = JacobiParams(-0.7, -0.7)
    grid = verify.SweepGrid(verify._angles(5), verify._angles(5), (0.05, 0.2, 1.0), (p,))
    reps = {r.name.split("/")[1]: r for r in verify.proof_term_check(p, grid)}
    assert reps["J4"].is_valid() and reps["J4"].spread < 10


@pytest.mark.parametrize("p", [JacobiParams(0.0, 0.0), JacobiParams(-0.9, -0.95)], ids=str)
def test_identity_suite_examples(p):
    grid = verify.SweepGrid(verify._angles(9), verify._angles(9), (0.05, 0.5), (p,))
    assert all(c.passed for c in verify.identity_suite(p, grid))


# --------------------------------------------------------------------------- cli


def test_cli_examples(capsys):
    assert run(["eval", "--alpha", "0.3", "--beta", "0.7", "--theta", "1.0", "--phi", "2.0", "--t", "0.5"]) == 0
    assert run(["check-product", "--alpha", "0.5", "--beta", "0.5", "--n-max", "20"]) == 0
    assert run(["eval", "--alpha", "0.3", "--beta", "0.7", "--theta", "1.0", "--phi", "2.0", "--t", "0"]) == 2
    assert "t > 0" in capsys.readouterr().err
