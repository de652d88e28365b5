"""Kan-like skew products K(theta,t) = (E(theta), phi(theta,t)) on the cylinder.

Fiber families have the product form phi(theta,t) = t + eps*C(theta)*xi(t)
with C a trigonometric polynomial and xi a polynomial vanishing at 0 and 1,
so boundary invariance is structural and the t-derivative is exact.  The
three defining axioms of the family are machine-checked:

  K1  phi(theta,0)=0, phi(theta,1)=1 and each fiber map is an increasing
      diffeomorphism of [0,1];
  K2  max |d_t phi| < (1/2) min |E'|  (partial hyperbolicity);
  K3  over two fixed points of the base the fiber maps have exactly two
      hyperbolic fixed points, a sink/source pair at the boundaries, wired
      as a cycle connecting the two boundary circles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from kanlab.circle import ExpandingCircleMap, mod1
from kanlab.funcs import Poly, TrigPoly

HYPERBOLIC_BAND = 1e-9  # sink iff deriv < 1-band, source iff > 1+band
FIXED_POINT_SCAN_CELLS = 4096
FIXED_POINT_TOL = 1e-13


class InvarianceViolation(RuntimeError):
    """A fiber step left [0,1] by more than the rounding allowance."""


@dataclass(frozen=True)
class FiberFamily:
    """phi(theta,t) = t + eps * C(theta) * xi(t)."""

    eps: float
    coupling: TrigPoly  # C
    profile: Poly  # xi, with xi(0) = xi(1) = 0

    def __post_init__(self):
        if abs(self.profile.coeffs[0]) > 1e-15:
            raise ValueError("fiber profile must vanish at t=0")
        if abs(self.profile.value_at_one()) > 1e-12:
            raise ValueError("fiber profile must vanish at t=1")

    def __call__(self, theta, t):
        return np.asarray(t, dtype=float) + self.eps * (self.coupling(theta) * self.profile(t))

    def dt(self, theta, t):
        """d phi / dt, exact."""
        return 1.0 + self.eps * (self.coupling(theta) * self.profile.derivative()(t))

    def dtheta(self, theta, t):
        """d phi / dtheta, exact."""
        return self.eps * (self.coupling.derivative()(theta) * self.profile(t))

    def dt_sup_bound(self) -> float:
        """Coefficient bound for sup |d_t phi| (used as a sanity check only)."""
        dxi = self.profile.derivative()
        sup_dxi = float(np.max(np.abs(dxi(np.linspace(0.0, 1.0, 1 << 10)))))
        return 1.0 + abs(self.eps) * self.coupling.sup_bound() * sup_dxi

    def to_config(self) -> dict:
        return {
            "epsilon": self.eps,
            "C_cos": list(self.coupling.cos_coeffs),
            "C_sin": list(self.coupling.sin_coeffs),
            "xi_poly": list(self.profile.coeffs),
        }


@dataclass(frozen=True)
class KanSystem:
    base: ExpandingCircleMap
    fiber: FiberFamily
    name: str | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def step(self, theta, t):
        """One application of K; clamps sub-1e-15 rounding excursions of t."""
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"t={t} outside the fiber interval")
        t2 = float(self.fiber(theta, t))
        if t2 < 0.0 or t2 > 1.0:
            exc = max(-t2, t2 - 1.0)
            if exc > 1e-12:
                raise InvarianceViolation(
                    f"fiber step left [0,1] by {exc:.3e} at theta={theta}, t={t}"
                )
            t2 = min(max(t2, 0.0), 1.0)
        return float(self.base(theta)), t2

    def orbit(self, theta, t, n):
        """Iterates 0..n-1 as two arrays."""
        thetas = np.empty(n)
        ts = np.empty(n)
        for i in range(n):
            thetas[i] = theta
            ts[i] = t
            theta, t = self.step(theta, t)
        return thetas, ts

    def fiber_composition(self, theta: float, n: int):
        """phi^n over theta: callable t -> (value, d/dt) via the chain rule."""
        if n < 1:
            raise ValueError("composition length must be >= 1")
        base_orbit = [float(theta)]
        for _ in range(n - 1):
            base_orbit.append(float(self.base(base_orbit[-1])))

        def compose(t: float):
            val = float(t)
            deriv = 1.0
            for th in base_orbit:
                deriv *= float(self.fiber.dt(th, val))
                val = float(self.fiber(th, val))
            return val, deriv

        return compose

    def kernel_params(self) -> tuple:
        """Packed parameters for the compiled/pure kernels."""
        if "kp" not in self._cache:
            bac, bas = self.base.perturbation.as_arrays()
            cac, cas = self.fiber.coupling.as_arrays()
            xi = self.fiber.profile
            xi_d = xi.derivative()
            xi_ref_d = Poly.make(xi.reflected).derivative()
            self._cache["kp"] = (
                int(self.base.degree),
                float(self.base.amplitude),
                bac,
                bas,
                float(self.fiber.eps),
                cac,
                cas,
                xi.as_array(),
                xi.reflected_array(),
                xi_d.as_array(),
                xi_ref_d.as_array(),
            )
        return self._cache["kp"]

    def to_config(self) -> dict:
        if self.name:
            return {"builtin": self.name}
        return {"base": self.base.to_config(), "fiber": self.fiber.to_config()}


def kan1994() -> KanSystem:
    """The classic 1994 cylinder example: 3theta mod 1 with
    phi(theta,t) = t + cos(2 pi theta) (t/32)(1-t)."""
    return KanSystem(
        base=ExpandingCircleMap(degree=3),
        fiber=FiberFamily(eps=1.0 / 32.0, coupling=TrigPoly.make([1.0]), profile=Poly.make([0.0, 1.0, -1.0])),
        name="kan1994",
    )


# -- axiom checks ------------------------------------------------------------


@dataclass(frozen=True)
class K1Report:
    passed: bool
    max_boundary_error: float
    min_dt: float  # min d_t phi over the grid (monotonicity margin)
    grid: tuple[int, int]


def verify_K1(sys: KanSystem, grid_theta: int = 4096, grid_t: int = 256) -> K1Report:
    """Boundary invariance and fiberwise monotonicity on a grid."""
    th = np.arange(grid_theta) / grid_theta
    err0 = np.max(np.abs(sys.fiber(th, 0.0)))
    err1 = np.max(np.abs(sys.fiber(th, 1.0) - 1.0))
    ts = np.linspace(0.0, 1.0, grid_t + 1)
    dt = sys.fiber.dt(th[:, None], ts[None, :])
    min_dt = float(np.min(dt))
    return K1Report(
        passed=bool(max(err0, err1) < 1e-12 and min_dt > 0.0),
        max_boundary_error=float(max(err0, err1)),
        min_dt=min_dt,
        grid=(grid_theta, grid_t),
    )


@dataclass(frozen=True)
class K2Report:
    passed: bool
    max_dt_phi: float
    threshold: float  # (1/2) min |E'|
    worst: tuple[float, float]
    grid: tuple[int, int]


def verify_K2(sys: KanSystem, grid_theta: int = 4096, grid_t: int = 256) -> K2Report:
    if grid_theta < 1024 or grid_t < 256:
        raise ValueError("K2 verification grid must be at least 2^10 x 2^8")
    th = np.arange(grid_theta) / grid_theta
    ts = np.linspace(0.0, 1.0, grid_t + 1)
    dt = np.abs(sys.fiber.dt(th[:, None], ts[None, :]))
    i, j = np.unravel_index(int(np.argmax(dt)), dt.shape)
    max_dt = float(dt[i, j])
    threshold = 0.5 * sys.base.expansion_bound(grid_theta)
    return K2Report(max_dt < threshold, max_dt, threshold, (float(th[i]), float(ts[j])), (grid_theta, grid_t))


@dataclass(frozen=True)
class FiberFixedPoint:
    t: float
    derivative: float
    kind: str  # "sink" | "source" | "neutral"


@dataclass(frozen=True)
class FiberStructure:
    theta: float
    boundary0: FiberFixedPoint
    boundary1: FiberFixedPoint
    interior: tuple[FiberFixedPoint, ...]

    @property
    def pattern(self) -> str:
        """'p' for sink-at-0/source-at-1, 'q' for the converse, else '?';
        requires exactly two fixed points (no interior ones)."""
        if self.interior:
            return "?"
        k0, k1 = self.boundary0.kind, self.boundary1.kind
        if k0 == "sink" and k1 == "source":
            return "p"
        if k0 == "source" and k1 == "sink":
            return "q"
        return "?"


@dataclass(frozen=True)
class K3Report:
    passed: bool
    p: float | None
    q: float | None
    fibers: tuple[FiberStructure, ...]
    detail: str


def _classify_derivative(d: float) -> str:
    if d < 1.0 - HYPERBOLIC_BAND:
        return "sink"
    if d > 1.0 + HYPERBOLIC_BAND:
        return "source"
    return "neutral"


def fiber_fixed_points(sys: KanSystem, theta: float) -> FiberStructure:
    """Fixed points of phi(theta,.) by sign-change scan plus bisection."""
    fib = sys.fiber

    def g(t):
        return float(fib(theta, t)) - t

    d0 = float(fib.dt(theta, 0.0))
    d1 = float(fib.dt(theta, 1.0))
    cells = FIXED_POINT_SCAN_CELLS
    ts = np.linspace(0.0, 1.0, cells + 1)
    gv = fib(theta, ts) - ts
    interior = []
    for i in range(cells):
        a, b = float(ts[i]), float(ts[i + 1])
        ga, gb = float(gv[i]), float(gv[i + 1])
        if i > 0 and ga == 0.0:
            interior.append(a)
            continue
        if ga * gb < 0.0:
            while b - a > FIXED_POINT_TOL:
                mid = 0.5 * (a + b)
                gm = g(mid)
                if gm == 0.0:
                    a = b = mid
                    break
                if (gm > 0.0) == (ga > 0.0):
                    a, ga = mid, gm
                else:
                    b = mid
            interior.append(0.5 * (a + b))
    pts = tuple(
        FiberFixedPoint(t, float(fib.dt(theta, t)), _classify_derivative(float(fib.dt(theta, t))))
        for t in interior
        if 0.0 < t < 1.0
    )
    return FiberStructure(
        theta=theta,
        boundary0=FiberFixedPoint(0.0, d0, _classify_derivative(d0)),
        boundary1=FiberFixedPoint(1.0, d1, _classify_derivative(d1)),
        interior=pts,
    )


def base_fixed_points(emap: ExpandingCircleMap) -> list[float]:
    """Fixed points of the base map (exact rationals for the linear case)."""
    from kanlab.circle import periodic_points

    rep = periodic_points(emap, 1, cap=10000)
    return [p.angle for p in rep.points]


def verify_K3(sys: KanSystem) -> K3Report:
    """Locate p (fiber sink at t=0, source at t=1) and q (the converse)
    among the fixed points of the base; each must have exactly two
    hyperbolic fiber fixed points."""
    fixed = base_fixed_points(sys.base)
    if len(fixed) < 2:
        return K3Report(False, None, None, (), "base map has fewer than two fixed points")
    fibers = tuple(fiber_fixed_points(sys, th) for th in fixed)
    p = next((f.theta for f in fibers if f.pattern == "p"), None)
    q = next((f.theta for f in fibers if f.pattern == "q"), None)
    neutral = [f.theta for f in fibers if "neutral" in (f.boundary0.kind, f.boundary1.kind)]
    extra = [f.theta for f in fibers if f.interior and f.theta in (p, q)]
    if p is None or q is None:
        detail = "missing sink/source pattern"
        if neutral:
            detail = f"neutral boundary derivative over theta in {neutral} (not decidable)"
        return K3Report(False, p, q, fibers, detail)
    if extra:
        return K3Report(False, p, q, fibers, f"extra interior fixed points over {extra}")
    return K3Report(True, p, q, fibers, "ok")


@dataclass(frozen=True)
class AxiomReport:
    expanding: object
    k1: K1Report
    k2: K2Report
    k3: K3Report

    @property
    def passed(self) -> bool:
        return bool(self.expanding.passed and self.k1.passed and self.k2.passed and self.k3.passed)


def verify_axioms(sys: KanSystem, grid_theta: int = 4096, grid_t: int = 256) -> AxiomReport:
    from kanlab.circle import verify_expanding

    return AxiomReport(
        expanding=verify_expanding(sys.base, grid_theta),
        k1=verify_K1(sys, grid_theta, grid_t),
        k2=verify_K2(sys, grid_theta, grid_t),
        k3=verify_K3(sys),
    )
