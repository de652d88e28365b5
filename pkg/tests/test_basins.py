import numpy as np
import pytest

from kanlab.basins import (
    BASIN0,
    BASIN1,
    UNDECIDED,
    BasinParams,
    classify,
    classify_many,
    compute_raster,
    coverage_curve,
    intermingled_test,
    involution_agreement,
    write_pgm,
)


def test_default_params_match_documented_values():
    p = BasinParams()
    assert (p.n_max, p.delta, p.window) == (5000, 1e-6, 50)


def test_boundary_points_classify_immediately(kan):
    for theta in (0.0, 0.3, 0.9):
        assert classify(kan, theta, 0.0, BasinParams()) == (BASIN0, 0)
        assert classify(kan, theta, 1.0, BasinParams()) == (BASIN1, 0)


def test_symmetric_pairs_agree(kan, calibrated_params):
    """classify(S(x)) = flip(classify(x)) on random decided points.

    Points are drawn dyadic-safe (multiples of 2^-53 below 1/2) so that the
    mirror construction theta+1/2, 1-t is exact in floating point; the
    symmetry-adapted kernels then make the agreement exact, not statistical.
    """
    rng = np.random.Generator(np.random.Philox(key=2024))
    n = 10000
    u = rng.integers(0, 2**52, size=n) / 2.0**53
    t = rng.random(n)
    p = BasinParams(n_max=150000, delta=1e-6, window=50)
    lab1, _ = classify_many(kan, u, t, p)
    lab2, _ = classify_many(kan, u + 0.5, 1.0 - t, p)
    decided = (lab1 != UNDECIDED) & (lab2 != UNDECIDED)
    agree = (lab1[decided] ^ 1) == lab2[decided]
    assert decided.mean() > 0.9
    assert np.mean(agree) >= 0.999


def test_label_stability_under_budget_doubling(kan):
    """A decided label never changes when n_max is doubled: the first
    window firing decides, and a longer run has the same prefix."""
    rng = np.random.Generator(np.random.Philox(key=77))
    n = 10000
    th = rng.random(n)
    ts = rng.random(n)
    lab1, hit1 = classify_many(kan, th, ts, BasinParams(n_max=20000, delta=1e-6, window=50))
    lab2, hit2 = classify_many(kan, th, ts, BasinParams(n_max=40000, delta=1e-6, window=50))
    decided = lab1 != UNDECIDED
    assert decided.sum() > 100
    assert np.array_equal(lab1[decided], lab2[decided])
    assert np.array_equal(hit1[decided], hit2[decided])


def test_both_basins_appear_near_any_point(kan, calibrated_params):
    """Pairs straddling theta=1/2 at t=1/2 realize both labels (finite
    evidence of intermingledness near a point)."""
    offsets = np.array([1e-6 * j for j in range(1, 21)])
    th = np.concatenate([0.5 + offsets, 0.5 - offsets])
    ts = np.full_like(th, 0.5)
    labels, _ = classify_many(kan, th, ts, calibrated_params)
    decided = labels[labels != UNDECIDED]
    assert (decided == BASIN0).any() and (decided == BASIN1).any()


def test_raster_deterministic_across_workers(kan):
    p = BasinParams(n_max=3000, delta=1e-6, window=50)
    r1 = compute_raster(kan, 64, 64, p, workers=1)
    r2 = compute_raster(kan, 64, 64, p, workers=2)
    r3 = compute_raster(kan, 64, 64, p, workers=3)
    assert np.array_equal(r1.labels, r2.labels)
    assert np.array_equal(r1.labels, r3.labels)
    assert np.array_equal(r1.hitting, r3.hitting)


def test_raster_calibrated_small(kan, calibrated_params):
    r = compute_raster(kan, 64, 64, BasinParams(150000, 1e-6, 50))
    f0, f1, fu = r.fractions
    assert abs(f0 + f1 + fu - 1.0) < 1e-12
    assert fu < 0.05
    assert f0 == f1  # exact mirror pairing on a power-of-two grid
    assert involution_agreement(r) == 1.0
    rep = intermingled_test(r, 4, 4)
    assert rep.passed


def test_trivial_family_all_undecided():
    from kanlab.circle import ExpandingCircleMap
    from kanlab.funcs import Poly, TrigPoly
    from kanlab.skew import FiberFamily, KanSystem

    sys_ = KanSystem(
        base=ExpandingCircleMap(degree=3),
        fiber=FiberFamily(eps=0.0, coupling=TrigPoly.make([1.0]), profile=Poly.make([0, 1, -1])),
    )
    r = compute_raster(sys_, 32, 32, BasinParams(n_max=2000, delta=1e-6, window=50))
    assert r.fractions[2] == 1.0


def test_intermingled_test_requires_resolution(kan):
    r = compute_raster(kan, 32, 32, BasinParams(n_max=100, delta=1e-6, window=50))
    with pytest.raises(ValueError):
        intermingled_test(r, 32, 16)


def test_coverage_curve_monotone(kan):
    cc = coverage_curve(kan, 1000, [0, 1000, 5000, 20000, 60000], BasinParams(60000, 1e-6, 50), seed=3)
    fr = cc.undecided_fraction
    assert fr[0] == 1.0
    assert all(a >= b for a, b in zip(fr, fr[1:]))


def test_coverage_curve_deterministic_with_seed(kan):
    a = coverage_curve(kan, 500, [1000, 4000], BasinParams(4000, 1e-6, 50), seed=9)
    b = coverage_curve(kan, 500, [1000, 4000], BasinParams(4000, 1e-6, 50), seed=9)
    assert a.undecided_fraction == b.undecided_fraction


def test_pgm_writer(tmp_path, kan):
    r = compute_raster(kan, 16, 8, BasinParams(n_max=100, delta=1e-6, window=50))
    path = tmp_path / "b.pgm"
    write_pgm(path, r)
    data = path.read_bytes()
    assert data.startswith(b"P5\n16 8\n255\n")
    body = data[len(b"P5\n16 8\n255\n") :]
    assert len(body) == 16 * 8
    assert set(body) <= {0, 128, 255}
