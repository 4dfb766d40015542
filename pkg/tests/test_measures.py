import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobi_heat.measures import (
    EndpointMeasure,
    ToleranceNotMet,
    double_exponential,
    gauss_jacobi_rule,
    gegenbauer_rule,
    integrate,
    pi_density,
    pi_density_constant,
    pi_function,
    signed_pi_rule,
    tanh_sinh_rule,
)


def _mp_pi(gamma, u):
    g = mpmath.mpf(gamma)
    c = mpmath.gamma(g + 1) / (mpmath.sqrt(mpmath.pi) * mpmath.gamma(g + 0.5))
    return c * u * mpmath.hyp2f1(0.5, 0.5 - g, 1.5, mpmath.mpf(u) ** 2)


@pytest.mark.parametrize("gamma", [0.0, 0.3, 1.5, 4.0, -0.6, -0.75, -0.95])
@pytest.mark.parametrize("u", [0.0, 0.1, 0.5, -0.5, 0.9, 0.999, -0.99999])
def test_pi_function_matches_hypergeometric(gamma, u):
    ref = float(_mp_pi(gamma, u))
    assert pi_function(gamma, u) == pytest.approx(ref, rel=1e-11, abs=1e-15)


@pytest.mark.parametrize("gamma", [0.0, 0.3, 1.5, 4.0])
def test_pi_is_half_at_one_for_probability_measures(gamma):
    assert pi_function(gamma, 1.0) == pytest.approx(0.5, rel=1e-13)


def test_pi_accurate_gap_argument():
    gap = 1e-18
    ref = float(_mp_pi(-0.75, 1 - mpmath.mpf(gap)))
    assert pi_function(-0.75, 1.0, gap=gap) == pytest.approx(ref, rel=1e-10)


def test_pi_constant_sign_and_domain():
    assert pi_density_constant(0.3) > 0
    assert pi_density_constant(-0.7) < 0
    with pytest.raises(ValueError):
        pi_density_constant(-0.5)
    with pytest.raises(ValueError):
        pi_function(-1.0, 0.3)
    with pytest.raises(ValueError):
        pi_function(0.3, 1.5)


def test_pi_density_is_derivative():
    u, h = 0.37, 1e-6
    fd = (pi_function(1.2, u + h) - pi_function(1.2, u - h)) / (2 * h)
    assert pi_density(1.2, u) == pytest.approx(fd, rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(gamma=st.floats(-0.99, 5.0).filter(lambda g: abs(g + 0.5) > 1e-3), u=st.floats(0.0, 0.99))
def test_pi_is_odd_and_monotone_in_magnitude(gamma, u):
    assert pi_function(gamma, -u) == -pi_function(gamma, u)
    assert abs(pi_function(gamma, min(u + 0.005, 1.0))) >= abs(pi_function(gamma, u))


@pytest.mark.parametrize("a,b", [(0.0, 0.0), (-0.5, -0.5), (0.3, -0.8), (-0.9, 2.5), (5.0, 1.0)])
def test_gauss_jacobi_exactness(a, b):
    n = 6
    rule = gauss_jacobi_rule(a, b, n)
    assert rule.exact_degree == 2 * n - 1
    for k in range(2 * n):
        f = lambda x: (1 + x) ** k
        # int (1-x)^a (1+x)^(b+k) = 2^(a+b+k+1) B(a+1, b+k+1)
        ref = float(mpmath.power(2, a + b + k + 1) * mpmath.beta(a + 1, b + k + 1))
        assert rule.apply(f) == pytest.approx(ref, rel=1e-12)


def test_gauss_jacobi_symmetric_weight_is_symmetric():
    rule = gauss_jacobi_rule(0.7, 0.7, 9)
    np.testing.assert_array_equal(rule.nodes, -rule.nodes[::-1])
    np.testing.assert_array_equal(rule.weights, rule.weights[::-1])
    assert rule.nodes[4] == 0.0


def test_gauss_jacobi_rejects_bad_input():
    with pytest.raises(ValueError):
        gauss_jacobi_rule(-1.0, 0.0, 4)
    with pytest.raises(ValueError):
        gauss_jacobi_rule(0.0, 0.0, 0)


@pytest.mark.parametrize("gamma", [-0.3, 0.0, 1.0, 6.5])
def test_gegenbauer_rule_is_probability(gamma):
    rule = gegenbauer_rule(gamma, 10)
    assert rule.weights.sum() == pytest.approx(1.0, rel=1e-13)
    assert np.all(rule.weights > 0)


def test_double_exponential_endpoint_singularity():
    val = double_exponential(lambda x: (1 - x) ** -0.3, 0.0, 1.0, tol=1e-12)
    assert val == pytest.approx(1 / 0.7, rel=1e-11)
    val = double_exponential(lambda x: np.log(x), 0.0, 1.0, tol=1e-12)
    assert val == pytest.approx(-1.0, rel=1e-11)


def test_double_exponential_reports_failure():
    with pytest.raises(ToleranceNotMet):
        double_exponential(lambda x: np.sin(1 / x), 0.0, 1.0, tol=1e-15, max_level=4)


def test_tanh_sinh_rule_integrates_smooth_function():
    rule = tanh_sinh_rule(5)
    assert rule.apply(np.cos) == pytest.approx(2 * math.sin(1.0), rel=1e-13)


def test_measure_masses():
    assert EndpointMeasure.d_pi(0.4).mass == 1.0
    assert EndpointMeasure.d_pi(-0.5).kind == "atoms"
    assert EndpointMeasure.pi_dv(-0.7).mass == 0.0
    assert EndpointMeasure("lebesgue").mass == 2.0
    with pytest.raises(ValueError):
        EndpointMeasure.pi_dv(-0.3)
    with pytest.raises(ValueError):
        EndpointMeasure("gegenbauer", -0.6)


def test_atoms_average_the_endpoints():
    m = EndpointMeasure.d_pi(-0.5)
    assert integrate(m, lambda x: x ** 3 + 2 * x ** 2) == pytest.approx(2.0)


@pytest.mark.parametrize("gamma", [-0.6, -0.75, -0.9])
def test_signed_density_kills_even_and_sees_odd(gamma):
    m = EndpointMeasure.pi_dv(gamma)
    assert integrate(m, lambda v: np.ones_like(v), tol=1e-12) == pytest.approx(0.0, abs=1e-12)
    # int Pi(v) v dv = 2 int_0^1 Pi(v) v dv
    ref = 2 * float(mpmath.quad(lambda v: _mp_pi(gamma, v) * v, [0, 1]))
    assert integrate(m, lambda v: v, tol=1e-11) == pytest.approx(ref, rel=1e-8)
    assert ref != 0.0


def test_signed_rule_weights_carry_pi():
    rule = signed_pi_rule(-0.7, 4)
    assert np.all(np.sign(rule.weights[rule.nodes > 0]) == -1)


def test_integrate_gegenbauer_against_mpmath():
    g = 1.3
    c = pi_density_constant(g)
    ref = float(mpmath.quad(lambda u: c * (1 - u * u) ** (g - 0.5) * mpmath.exp(u), [-1, 1]))
    assert integrate(EndpointMeasure.d_pi(g), np.exp, tol=1e-13) == pytest.approx(ref, rel=1e-12)
