"""Expanding circle maps: evaluation, inverse branches, periodic points.

The base maps have the form E(theta) = k*theta + amplitude*u(theta) mod 1
with u a trigonometric polynomial, so derivatives and lifts are exact.
All mod-1 reductions are x - floor(x); circle distance is
min(|a-b|, 1-|a-b|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from kanlab.funcs import TrigPoly

NEWTON_TOL = 1e-13
NEWTON_MAX_ITER = 60


def mod1(x):
    return x - np.floor(x)


def circle_dist(a, b):
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    d = mod1(d)
    d = np.minimum(d, 1.0 - d)
    return float(d) if d.shape == () else d


class BranchRefinementError(RuntimeError):
    """Newton refinement of an inverse branch failed to converge."""


@dataclass(frozen=True)
class ExpandingCircleMap:
    """E(theta) = degree*theta + amplitude*perturbation(theta) mod 1."""

    degree: int
    perturbation: TrigPoly = TrigPoly()
    amplitude: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if abs(self.degree) < 2:
            raise ValueError("expanding circle maps need |degree| >= 2")

    # -- evaluation ---------------------------------------------------------

    def lift(self, theta):
        """The lift E^(theta) on the real line (no mod reduction)."""
        theta = np.asarray(theta, dtype=float)
        out = self.degree * theta
        if self.amplitude != 0.0:
            out = out + self.amplitude * self.perturbation(mod1(theta))
        return out if out.shape else float(out)

    def __call__(self, theta):
        return mod1(self.lift(theta))

    def derivative(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.full_like(theta, float(self.degree))
        if self.amplitude != 0.0:
            out = out + self.amplitude * self.perturbation.derivative()(mod1(theta))
        return out if out.shape else float(out)

    @property
    def is_linear(self) -> bool:
        return self.amplitude == 0.0 or self.perturbation.n_harmonics == 0

    @property
    def n_branches(self) -> int:
        return abs(self.degree)

    def expansion_bound(self, grid: int = 4096) -> float:
        """Cached min |E'| over a verification grid."""
        key = ("lambda", grid)
        if key not in self._cache:
            th = np.arange(grid) / grid
            self._cache[key] = float(np.min(np.abs(self.derivative(th))))
        return self._cache[key]

    def derivative_sup_bound(self) -> float:
        return abs(self.degree) + abs(self.amplitude) * self.perturbation.derivative().sup_bound()

    # -- inverse branches ---------------------------------------------------

    def inverse_branches(self, theta: float) -> np.ndarray:
        """All |degree| preimages of theta, each solving E(y) = theta to 1e-12.

        The lift restricted to [0,1) is strictly monotone (the map is
        expanding), so the preimages are H^{-1}(target_l) for the |k|
        integer-shifted targets falling in the lift's range over [0,1).
        Newton from the linear-map seed, bisection fallback on the bracket.
        """
        k = self.degree
        theta = float(theta)
        if self.is_linear:
            if k > 0:
                return np.array([(theta + j) / k for j in range(k)])
            ks = -k
            return np.array(sorted(mod1((theta + j) / k) for j in range(ks)))
        pert_bound = abs(self.amplitude) * self.perturbation.sup_bound()
        lo_val = min(0.0, float(k)) - pert_bound  # lift range bounds over [0,1)
        hi_val = max(0.0, float(k)) + pert_bound
        roots = []
        for j in range(math.floor(lo_val) - 1, math.ceil(hi_val) + 2):
            target = theta + j
            y = self._solve_lift(target)
            if y is not None:
                roots.append(y)
        roots = sorted(set(roots))
        if len(roots) != self.n_branches:
            raise BranchRefinementError(
                f"expected {self.n_branches} preimages of {theta}, found {len(roots)}"
            )
        return np.array(roots)

    def _solve_lift(self, target: float):
        """Solve lift(y) = target for y in [0,1); None if target out of range.

        The lift is strictly monotone on [0,1] (the map is expanding), so a
        root exists iff the residual changes sign over the bracket; Newton
        iterates are confined to the bracket with bisection as fallback.
        """
        k = self.degree
        pert = abs(self.amplitude) * self.perturbation.sup_bound()
        # |lift(y) - k*y| <= pert pins the root between the shifted lines
        if k > 0:
            lo = (target - pert) / k - 1e-12
            hi = (target + pert) / k + 1e-12
        else:
            lo = (target + pert) / k - 1e-12
            hi = (target - pert) / k + 1e-12
        if hi < 0.0 or lo >= 1.0:
            return None
        lo = max(lo, 0.0)
        hi = min(hi, 1.0)
        flo = self.lift(lo) - target
        fhi = self.lift(hi) - target
        if flo == 0.0:
            return lo
        if fhi == 0.0:
            return hi if hi < 1.0 else None
        if (flo > 0.0) == (fhi > 0.0):
            return None
        y = min(max(target / k, lo), hi)
        for _ in range(NEWTON_MAX_ITER):
            f = self.lift(y) - target
            if abs(f) < NEWTON_TOL:
                return y if y < 1.0 else None
            if (f > 0.0) == (flo > 0.0):
                lo = y
                flo = f
            else:
                hi = y
                fhi = f
            y_new = y - f / self.derivative(y)
            if not (lo <= y_new <= hi):
                y_new = 0.5 * (lo + hi)
            if y_new == y:
                return y if y < 1.0 else None
            y = y_new
        f = self.lift(y) - target
        if abs(f) < 1e-10:
            return y if y < 1.0 else None
        raise BranchRefinementError(
            f"Newton failed for inverse branch at target {target}: residual {f:.3e}"
        )

    def to_config(self) -> dict:
        return {
            "degree": self.degree,
            "fourier_cos": list(self.perturbation.cos_coeffs),
            "fourier_sin": list(self.perturbation.sin_coeffs),
            "amplitude": self.amplitude,
        }


@dataclass(frozen=True)
class PeriodicPoint:
    angle: float
    period: int  # minimal period (orbit length)
    orbit: tuple[float, ...]
    multiplier: float  # (E^period)'(angle)


@dataclass(frozen=True)
class PeriodicPointReport:
    points: tuple[PeriodicPoint, ...]  # one entry per orbit
    total_count: int  # |Fix(E^n)| = |k^n - 1| for the linear map, else found count
    requested_period: int
    skipped: int  # seeds whose Newton refinement failed


def periodic_points(emap: ExpandingCircleMap, n: int, cap: int = 100000) -> PeriodicPointReport:
    """Fixed points of E^n, one representative per orbit.

    Linear map: Fix(E^n) = { j/(k^n - 1) } enumerated in exact rational
    arithmetic; the enumeration is truncated to roughly `cap` points by a
    uniform stride before orbit grouping.  Perturbed maps refine each
    rational seed by Newton on the lift equation.
    """
    if n < 1:
        raise ValueError("period must be >= 1")
    k = emap.degree
    d = abs(k**n - 1)
    stride = max(1, -(-d // cap))  # ceil division
    # a stride sharing a factor with d samples a multiplicatively invariant
    # subset of Fix(E^n) (j -> k*j mod d preserves gcd(j, d)), which biases
    # the orbit sample; bump to the next coprime stride
    while stride > 1 and math.gcd(stride, d) != 1:
        stride += 1
    seen: set[Fraction] = set()
    points: list[PeriodicPoint] = []
    skipped = 0
    for j0 in range(0, d, stride):
        fj = Fraction(j0, d)
        if fj in seen:
            continue
        # exact orbit of j/d under theta -> k*theta mod 1
        orbit_fracs = []
        x = fj
        while x not in orbit_fracs:
            orbit_fracs.append(x)
            x = (k * x) % 1
        for y in orbit_fracs:
            seen.add(y)
        period = len(orbit_fracs)
        if emap.is_linear:
            orbit = tuple(float(q) for q in orbit_fracs)
            angle = orbit[0]
            mult = float(k) ** period
            points.append(PeriodicPoint(angle, period, orbit, mult))
        else:
            seed = float(fj)
            refined = _refine_periodic(emap, seed, period)
            if refined is None:
                skipped += 1
                continue
            orbit = [refined]
            for _ in range(period - 1):
                orbit.append(float(emap(orbit[-1])))
            mult = float(np.prod([emap.derivative(t) for t in orbit]))
            points.append(PeriodicPoint(refined, period, tuple(orbit), mult))
        if len(points) >= cap:
            break
    total = d if emap.is_linear else len(seen) - skipped
    return PeriodicPointReport(tuple(points), total, n, skipped)


def _refine_periodic(emap: ExpandingCircleMap, seed: float, period: int):
    """Newton on the lift equation E^^period(x) - x - M = 0."""

    def lift_n(x):
        val = x
        deriv = 1.0
        for _ in range(period):
            deriv *= emap.derivative(mod1(val))
            val = emap.lift(mod1(val)) + math.floor(val)
        return val, deriv

    v0, _ = lift_n(seed)
    m_shift = round(v0 - seed)
    x = seed
    for _ in range(NEWTON_MAX_ITER):
        v, dv = lift_n(x)
        f = v - x - m_shift
        if abs(f) < NEWTON_TOL:
            return mod1(x)
        x = x - f / (dv - 1.0)
    v, _ = lift_n(x)
    if abs(v - x - m_shift) < 1e-10:
        return mod1(x)
    return None


@dataclass(frozen=True)
class ExpansionReport:
    passed: bool
    min_derivative: float
    grid: int
    worst_theta: float
    branch_separation: float  # derived injectivity-radius proxy


def verify_expanding(emap: ExpandingCircleMap, grid: int = 4096) -> ExpansionReport:
    """min |E'| over the grid; passes iff > 1.  Also reports the minimal
    gap between adjacent inverse branches (an injectivity-radius proxy)."""
    if grid < 1024:
        raise ValueError("verification grid must be at least 2^10")
    th = np.arange(grid) / grid
    deriv = np.abs(emap.derivative(th))
    imin = int(np.argmin(deriv))
    min_d = float(deriv[imin])
    sep = math.inf
    try:
        for theta in np.arange(64) / 64:
            ys = np.sort(emap.inverse_branches(float(theta)))
            gaps = np.diff(np.concatenate([ys, [ys[0] + 1.0]]))
            sep = min(sep, float(np.min(gaps)))
    except BranchRefinementError:
        sep = float("nan")
    return ExpansionReport(min_d > 1.0, min_d, grid, float(th[imin]), sep)
