import math

import numpy as np
import pytest

from kanlab.entropy import (
    audit_separation,
    entropy_estimate,
    fiber_entropy_check,
    pressure_estimate,
    pressure_slope,
    separated_count,
)
from kanlab.funcs import TrigPoly
from kanlab.ruelle import solve_equilibrium

LOG3 = math.log(3.0)


def test_counts_monotone_in_n(kan):
    counts = [separated_count(kan, "cylinder", n, 0.1).count for n in range(1, 7)]
    assert all(b >= a for a, b in zip(counts, counts[1:]))


def test_counts_monotone_in_eps(kan):
    for n in (3, 5):
        c_fine = separated_count(kan, "cylinder", n, 0.05).count
        c_coarse = separated_count(kan, "cylinder", n, 0.1).count
        assert c_fine >= c_coarse


def test_static_packing_on_fiber(kan):
    est = separated_count(kan, "fiber", 1, 0.1, theta0=0.2)
    assert abs(est.count - 10) <= 1
    est0 = separated_count(kan, "fiber", 0, 0.1, theta0=0.2)
    assert est0.count == est.count  # n=0 treated as the static window


def test_base_slope_near_log3(kan):
    sl = entropy_estimate(kan, [0.1], range(1, 9), region="base")[0]
    assert abs(sl.slope - LOG3) / LOG3 < 0.15


def test_trivial_fiber_adds_no_entropy():
    from kanlab.circle import ExpandingCircleMap
    from kanlab.funcs import Poly
    from kanlab.skew import FiberFamily, KanSystem

    sys_ = KanSystem(
        base=ExpandingCircleMap(degree=3),
        fiber=FiberFamily(eps=0.0, coupling=TrigPoly.make([1.0]), profile=Poly.make([0, 1, -1])),
    )
    ns = range(3, 8)
    sl_base = entropy_estimate(sys_, [0.05], ns, region="base")[0].slope
    sl_cyl = entropy_estimate(sys_, [0.05], ns, region="cylinder")[0].slope
    assert abs(sl_cyl - sl_base) < 0.05


def test_audit_verifies_separation(kan):
    for region in ("base", "cylinder"):
        est = separated_count(kan, region, 5, 0.1)
        assert audit_separation(kan, est, seed=1)
    est_f = separated_count(kan, "fiber", 20, 0.05, theta0=0.37)
    assert audit_separation(kan, est_f)


def test_pressure_constant_shift_exact(kan):
    p0 = pressure_estimate(kan, TrigPoly(), 6, 0.1)
    pc = pressure_estimate(kan, TrigPoly.make(constant=0.25), 6, 0.1)
    assert pc == pytest.approx(p0 + 0.25, abs=1e-12)


def test_pressure_zero_potential_equals_entropy_path(kan):
    est = separated_count(kan, "cylinder", 6, 0.1)
    assert pressure_estimate(kan, TrigPoly(), 6, 0.1) == math.log(est.count) / 6


def test_pressure_slope_matches_transfer_operator(kan):
    """Cross-pipeline: separated-set pressure slope vs the transfer-operator
    pressure, within 0.15 for the zero and a cosine potential."""
    ns = range(4, 9)
    p_sep0 = pressure_slope(kan, TrigPoly(), ns, 0.05)
    assert abs(p_sep0 - LOG3) < 0.15
    phi = TrigPoly.make([0.2])
    p_sep = pressure_slope(kan, phi, ns, 0.05)
    p_ruelle = solve_equilibrium(kan.base, phi, 4096).pressure
    assert abs(p_sep - p_ruelle) < 0.15


def test_fiber_entropy_bound(kan):
    rng = np.random.Generator(np.random.Philox(key=11))
    rep = fiber_entropy_check(kan, rng.random(4), [1, 5, 10, 20, 30, 40], 0.05)
    assert rep.passed
    assert rep.bound_violations == 0
    assert rep.max_rate < 0.05
    for counts in rep.counts_by_fiber.values():
        for n, c in zip(rep.n_values, counts):
            assert c <= max(n, 1) * (1 / 0.05 + 1)


def test_region_validation(kan):
    with pytest.raises(ValueError):
        separated_count(kan, "plane", 3, 0.1)
    with pytest.raises(ValueError):
        separated_count(kan, "cylinder", 13, 0.1)
    with pytest.raises(ValueError):
        separated_count(kan, "cylinder", 3, 0.3)
    with pytest.raises(ValueError):
        separated_count(kan, "fiber", 50, 0.1)
