import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kanlab.circle import ExpandingCircleMap
from kanlab.funcs import Poly, TrigPoly
from kanlab.skew import (
    FiberFamily,
    KanSystem,
    fiber_fixed_points,
    kan1994,
    verify_K1,
    verify_K2,
    verify_K3,
)


def test_step_kan_original_fixed_fiber():
    # phi(0, 0.5) = 0.5 + 1*(0.5/32)*0.5 = 0.5078125 (exact dyadic)
    sys_ = kan1994()
    th, t = sys_.step(0.0, 0.5)
    assert th == 0.0
    assert t == 0.5078125


def test_step_boundary_invariance(kan):
    for theta in np.linspace(0, 0.999, 17):
        th, t = kan.step(theta, 0.0)
        assert t == 0.0
        th, t = kan.step(theta, 1.0)
        assert t == 1.0


def test_step_quarter_turn(kan):
    # cos(pi/2) = 0: the fiber map is the identity over theta = 1/4
    th, t = kan.step(0.25, 0.5)
    assert abs(th - 0.75) < 1e-15
    assert abs(t - 0.5) < 1e-15


def test_step_rejects_outside_fiber(kan):
    with pytest.raises(ValueError):
        kan.step(0.1, 1.5)


def test_fiber_composition_two_steps(kan):
    comp = kan.fiber_composition(0.0, 2)
    val, deriv = comp(0.5)
    # two applications of the fiber map over the fixed angle 0
    t1 = 0.5 + (0.5 / 32) * 0.5
    t2 = t1 + (t1 / 32) * (1 - t1)
    assert abs(val - t2) < 1e-15
    d_manual = kan.fiber.dt(0.0, 0.5) * kan.fiber.dt(0.0, t1)
    assert abs(deriv - d_manual) < 1e-15


def test_fiber_composition_derivative_vs_finite_difference(kan):
    for n in (1, 5, 20):
        comp = kan.fiber_composition(0.3141, n)
        t = 0.37
        h = 1e-6
        fd = (comp(t + h)[0] - comp(t - h)[0]) / (2 * h)
        deriv = comp(t)[1]
        assert abs(deriv - fd) / abs(deriv) < 1e-5


def test_boundary_chain_rule(kan):
    # derivative at t=0 over a base orbit is the product of boundary slopes
    n = 4
    comp = kan.fiber_composition(0.2, n)
    th = 0.2
    prod = 1.0
    for _ in range(n):
        prod *= float(kan.fiber.dt(th, 0.0))
        th = float(kan.base(th))
    assert abs(comp(0.0)[1] - prod) < 1e-14


@given(st.floats(0, 1, exclude_max=True), st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=100, deadline=None)
def test_fiber_monotone(theta, t1, t2):
    sys_ = kan1994()
    lo, hi = sorted((t1, t2))
    if hi - lo < 1e-12:
        return
    assert sys_.fiber(theta, lo) < sys_.fiber(theta, hi)


def test_involution_commutes_with_step(kan):
    """S(theta,t) = (theta+1/2, 1-t) conjugates the classic map to itself;
    in floating point the two compositions agree to 1e-14."""
    rng = np.random.default_rng(123)
    for _ in range(10000):
        th, t = rng.random(), rng.random()
        a_th, a_t = kan.step((th + 0.5) % 1.0, 1.0 - t)
        b_th, b_t = kan.step(th, t)
        sb_th, sb_t = (b_th + 0.5) % 1.0, 1.0 - b_t
        d_th = min(abs(a_th - sb_th), 1.0 - abs(a_th - sb_th))
        assert d_th < 1e-14
        assert abs(a_t - sb_t) < 1e-14


def test_verify_K1(kan):
    rep = verify_K1(kan)
    assert rep.passed
    assert rep.max_boundary_error == 0.0
    assert abs(rep.min_dt - (1 - 1 / 32)) < 1e-12


def test_verify_K2_kan(kan):
    rep = verify_K2(kan)
    assert rep.passed
    assert rep.max_dt_phi == 1.03125
    assert rep.threshold == 1.5


def test_verify_K2_trivial_fiber():
    sys_ = KanSystem(
        base=ExpandingCircleMap(degree=3),
        fiber=FiberFamily(eps=0.0, coupling=TrigPoly.make([1.0]), profile=Poly.make([0, 1, -1])),
    )
    rep = verify_K2(sys_)
    assert rep.passed
    assert rep.max_dt_phi == 1.0


def test_verify_K2_fails_for_large_coupling():
    sys_ = KanSystem(
        base=ExpandingCircleMap(degree=2),
        fiber=FiberFamily(eps=2.0, coupling=TrigPoly.make([1.0]), profile=Poly.make([0, 1, -1])),
    )
    rep = verify_K2(sys_)
    assert not rep.passed
    assert abs(rep.max_dt_phi - 3.0) < 1e-12
    assert rep.threshold == 1.0


def test_verify_K2_rejects_small_grid(kan):
    with pytest.raises(ValueError):
        verify_K2(kan, grid_theta=512)


def test_verify_K3_kan(kan):
    rep = verify_K3(kan)
    assert rep.passed
    assert rep.p == 0.5
    assert rep.q == 0.0
    for f in rep.fibers:
        assert not f.interior


def test_verify_K3_degenerate_fails():
    sys_ = KanSystem(
        base=ExpandingCircleMap(degree=3),
        fiber=FiberFamily(eps=0.0, coupling=TrigPoly.make([1.0]), profile=Poly.make([0, 1, -1])),
    )
    rep = verify_K3(sys_)
    assert not rep.passed


def test_verify_K3_sign_flip_swaps_roles():
    sys_ = KanSystem(
        base=ExpandingCircleMap(degree=3),
        fiber=FiberFamily(eps=-1.0 / 32, coupling=TrigPoly.make([1.0]), profile=Poly.make([0, 1, -1])),
    )
    rep = verify_K3(sys_)
    assert rep.passed
    assert rep.p == 0.0
    assert rep.q == 0.5


def test_fiber_fixed_points_interior_detection():
    # a profile with an interior fixed point over theta=0: xi = t(1-t)(t-1/2)
    sys_ = KanSystem(
        base=ExpandingCircleMap(degree=3),
        fiber=FiberFamily(eps=0.25, coupling=TrigPoly.make([1.0]), profile=Poly.make([0.0, -0.5, 1.5, -1.0])),
    )
    fs = fiber_fixed_points(sys_, 0.0)
    assert len(fs.interior) == 1
    assert abs(fs.interior[0].t - 0.5) < 1e-9


def test_fiber_profile_validation():
    with pytest.raises(ValueError):
        FiberFamily(eps=0.1, coupling=TrigPoly.make([1.0]), profile=Poly.make([0.5, 1.0]))
    with pytest.raises(ValueError):
        FiberFamily(eps=0.1, coupling=TrigPoly.make([1.0]), profile=Poly.make([0.0, 1.0]))


def test_kernel_params_roundtrip(kan):
    kp = kan.kernel_params()
    assert kp[0] == 3
    assert kp[4] == 1.0 / 32
    assert list(kp[7]) == [0.0, 1.0, -1.0]
    assert list(kp[8]) == [0.0, 1.0, -1.0]  # symmetric profile: reflection bitwise equal
