import math

import numpy as np
from hypothesis import given, strategies as st

from kanlab.funcs import Poly, TrigPoly, horner

coeff_lists = st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=6)


@given(coeff_lists, st.floats(0, 1))
def test_reflected_coeffs_evaluate_to_p_of_one_minus_t(coeffs, t):
    p = Poly.make(coeffs)
    ref = Poly.make(p.reflected)
    direct = p(1.0 - t)
    scale = 1.0 + sum(abs(c) for c in coeffs)
    assert abs(ref(t) - direct) < 1e-12 * scale


def test_reflection_exact_for_kan_profile():
    # t(1-t) is symmetric about 1/2: reflected coefficients are bitwise equal
    p = Poly.make([0.0, 1.0, -1.0])
    assert p.reflected == p.coeffs


@given(coeff_lists, st.floats(0, 1))
def test_poly_derivative_matches_finite_difference(coeffs, t):
    p = Poly.make(coeffs)
    d = p.derivative()
    h = 1e-6
    t = min(max(t, h), 1 - h)
    fd = (p(t + h) - p(t - h)) / (2 * h)
    scale = 1.0 + sum(abs(c) * i * i for i, c in enumerate(coeffs))
    assert abs(d(t) - fd) < 1e-7 * scale


def test_horner_matches_poly_call():
    p = Poly.make([1.0, -2.0, 0.5, 3.0])
    for t in (0.0, 0.25, 1.0):
        assert horner(p.coeffs, t) == p(t)


def test_trigpoly_basics():
    f = TrigPoly.make([1.0], [])  # cos(2 pi theta)
    assert abs(f(0.0) - 1.0) < 1e-15
    assert abs(f(0.25)) < 1e-15
    assert abs(f(0.5) + 1.0) < 1e-15


def test_trigpoly_derivative_exact():
    f = TrigPoly.make([0.5, -0.25], [0.0, 1.0])
    df = f.derivative()
    th = np.linspace(0, 1, 7)
    h = 1e-6
    fd = (f(th + h) - f(th - h)) / (2 * h)
    assert np.max(np.abs(df(th) - fd)) < 1e-5


def test_trigpoly_sup_bound():
    f = TrigPoly.make([1.0, 0.5], [0.25])
    th = np.linspace(0, 1, 4096)
    assert np.max(np.abs(f(th))) <= f.sup_bound() + 1e-12


def test_trigpoly_padding():
    f = TrigPoly.make([1.0], [0.0, 2.0])
    assert len(f.cos_coeffs) == len(f.sin_coeffs) == 2
    assert f.cos_coeffs[1] == 0.0


def test_half_period_parity():
    # odd harmonics flip sign under theta -> theta + 1/2, even ones do not
    f_odd = TrigPoly.make([1.0], [])
    f_even = TrigPoly.make([0.0, 1.0], [])
    th = np.linspace(0, 0.499, 11)
    assert np.max(np.abs(f_odd(th + 0.5) + f_odd(th))) < 1e-14
    assert np.max(np.abs(f_even(th + 0.5) - f_even(th))) < 1e-14
