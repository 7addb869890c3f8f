import math

import numpy as np
import pytest

from cpquench import quadrature as quad
from cpquench.contint import halfline_sine
from cpquench.errors import DomainError
from cpquench.specfun import aux_f


def halfline(f, **kw):
    return quad.integrate_halfline(quad.OscIntegralSpec(f, **kw))


def test_damped_sine_closed_form():
    for eta in (0.1, 0.01):
        r = quad.integrate_damped(np.sin, eta)
        assert r.value == pytest.approx(1 / (1 + eta**2), abs=1e-12)
        assert r.converged


def test_sine_extrapolates_to_one():
    r = halfline(np.sin)
    assert abs(r.value - 1.0) < 1e-9
    assert r.converged


def test_matches_aux_f():
    r = halfline(lambda x: np.sin(x) / (x + 10))
    assert abs(r.value - aux_f(10.0)) < 1e-10


def test_matches_halfline_sine():
    r = halfline(lambda x: np.sin(2 * x + 0.3) / (x + 10), frequency=2.0, phase=0.3)
    assert abs(r.value - halfline_sine(2.0, 0.3, 10.0)) < 1e-8


def test_extrapolate_linear():
    pts = [(e, 3 + 2 * e) for e in quad.DEFAULT_ETAS]
    v, err = quad.extrapolate_to_zero(pts)
    assert abs(v - 3) < 1e-13


def test_extrapolate_constant():
    v, err = quad.extrapolate_to_zero([(e, 1.25) for e in quad.DEFAULT_ETAS])
    assert v == 1.25 and err == 0.0


def _lagrange_remainder(etas, f):
    # exact value of P(0) - f(0) for the interpolating polynomial, in rationals
    from fractions import Fraction
    E = [Fraction(e) for e in etas]
    F = [f(e) for e in E]
    p0 = Fraction(0)
    for i, ei in enumerate(E):
        w = Fraction(1)
        for j, ej in enumerate(E):
            if j != i:
                w *= ej / (ej - ei)
        p0 += w * F[i]
    return float(p0 - f(Fraction(0)))


def test_extrapolate_even_function_default_schedule():
    f = lambda e: 1 / (1 + e * e)  # noqa: E731
    pts = [(e, f(e)) for e in quad.DEFAULT_ETAS]
    # in powers of eta^2 the table is accurate to well below 1e-10
    v2, _ = quad.extrapolate_to_zero(pts, order=2)
    assert abs(v2 - 1) < 1e-10
    # in powers of eta the result carries the interpolation remainder, which is known exactly
    v1, err1 = quad.extrapolate_to_zero(pts, order=1)
    expected = _lagrange_remainder(quad.DEFAULT_ETAS, f)
    assert v1 - 1 == pytest.approx(expected, rel=1e-6)
    # with the module's default regulator scale the same schedule meets 1e-10
    scaled = [(0.1 * e, f(0.1 * e)) for e in quad.DEFAULT_ETAS]
    assert abs(quad.extrapolate_to_zero(scaled)[0] - 1) < 1e-10


def test_extrapolate_needs_three_points():
    with pytest.raises(DomainError):
        quad.extrapolate_to_zero([(0.1, 1.0), (0.05, 1.0)])


def test_extrapolate_needs_decreasing_eta():
    with pytest.raises(DomainError):
        quad.extrapolate_to_zero([(0.1, 1.0), (0.2, 1.0), (0.05, 1.0)])


@pytest.mark.parametrize("sched", [(0.1, 0.05), (0.1, 0.2, 0.05), (0.1, 0.0, -0.1)])
def test_spec_schedule_validation(sched):
    with pytest.raises(DomainError):
        quad.OscIntegralSpec(np.sin, eta_schedule=sched)


def test_wynn_alternating_series():
    terms = [(-1) ** k / (k + 1) for k in range(14)]
    acc, _ = quad.wynn_epsilon(np.cumsum(terms))
    assert abs(acc - math.log(2)) < 1e-10


def test_non_convergence_is_reported():
    r = halfline(lambda x: np.sin(x) / (x + 1), max_panels=50)
    assert not r.converged
    assert math.isfinite(r.value)


def _draws(n, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        yield rng.uniform(0.2, 4.0), rng.uniform(-math.pi, math.pi), rng.uniform(0.05, 50.0)


def test_error_estimate_is_honest():
    for b, c, chi0 in _draws(20, 11):
        exact = halfline_sine(b, c, chi0)
        r = halfline(lambda x: np.sin(b * x + c) / (x + chi0), frequency=b, phase=c)
        assert r.err_estimate >= abs(r.value - exact)


def test_linearity():
    rng = np.random.default_rng(5)
    for _ in range(3):
        alpha, beta = rng.normal(size=2)
        (b1, _, x1), (b2, _, x2) = list(_draws(2, int(rng.integers(1000))))
        f = lambda x: np.sin(b1 * x) / (x + x1)  # noqa: E731
        g = lambda x: np.sin(b2 * x) / (x + x2)  # noqa: E731
        freq = max(b1, b2)
        sched = dict(frequency=freq, eta_scale=0.1 * min(b1, b2) / freq)
        rf = halfline(f, **sched)
        rg = halfline(g, **sched)
        rh = halfline(lambda x: alpha * f(x) + beta * g(x), **sched)
        bound = abs(alpha) * rf.err_estimate + abs(beta) * rg.err_estimate + rh.err_estimate
        assert abs(rh.value - (alpha * rf.value + beta * rg.value)) <= bound


def test_tighter_panels_do_not_hurt():
    # coarse tolerances force bisection; below ~1e-14 the differences are rounding
    for b, c, chi0 in _draws(5, 21):
        exact = halfline_sine(b, c, chi0)
        f = lambda x: np.sin(b * x + c) / (x + chi0)  # noqa: E731
        prev = None
        for tol in (1e-3, 5e-4, 1e-6, 5e-7, 1e-9, 5e-10):
            err = abs(halfline(f, frequency=b, phase=c, panel_tolerance=tol).value - exact)
            if prev is not None:
                assert err <= prev + 1e-14
            prev = err


def test_deterministic():
    f = lambda x: np.sin(1.7 * x + 0.2) / (x + 3)  # noqa: E731
    a = halfline(f, frequency=1.7, phase=0.2)
    b = halfline(f, frequency=1.7, phase=0.2)
    assert a.value == b.value and a.damped_values == b.damped_values
