"""The separating map sigma and the interior measure of maximal entropy.

sigma(theta) is the fiberwise boundary between the two basins: the stable
sets over theta are [0, sigma) and (sigma, 1].  On a grid it is estimated
by bisecting the basin classifier's label in t.  Over base-periodic points
the fiber composition has an interior repelling fixed point t_n = sigma of
the base point; averaging observables over those interior periodic orbits
approximates the interior invariant measure, whose pushforward definition
integral Phi(theta, sigma(theta)) dnu(theta) is computed from the graph.

Base-periodic sigma samples pin the base iteration to the exact cycle: a
floating-point base orbit shadows away from any periodic point after about
35 steps (the expansion amplifies one ulp to order one), which would turn
the fiber dynamics generic long before the slow boundary contraction
(~1e-4 per step for the classic map) can decide a label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from kanlab._backend import get_kernels
from kanlab._parallel import parallel_map
from kanlab.basins import BASIN0, BASIN1, UNDECIDED, BasinParams
from kanlab.circle import periodic_points
from kanlab.ruelle import GridMeasure
from kanlab.skew import HYPERBOLIC_BAND, KanSystem

SIGMA_TOL = 1e-4
ORBIT_SCAN_CELLS = 4096
ORBIT_ROOT_TOL = 1e-13
# base-periodic probes follow the slow cycle contraction, so they get a much
# larger budget than generic classification (see module docstring)
PINNED_N_MAX = 2_000_000


@dataclass(frozen=True)
class SigmaSample:
    theta: float
    sigma: float  # nan when undecided
    method: str  # "bisection" | "periodic-fixed-point"

    @property
    def decided(self) -> bool:
        return not math.isnan(self.sigma)


@dataclass(frozen=True)
class SeparatingGraph:
    samples: tuple[SigmaSample, ...]
    tol: float
    params: BasinParams

    @property
    def grid(self) -> int:
        return len(self.samples)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([s.theta for s in self.samples])

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([s.sigma for s in self.samples])

    @property
    def decided_fraction(self) -> float:
        return float(np.mean([s.decided for s in self.samples]))

    def total_variation(self) -> float:
        """sum |sigma_{i+1} - sigma_i| over adjacent decided samples (wrapping);
        the refinement non-collapse metric for the discontinuity evidence."""
        sig = self.sigmas
        ok = ~np.isnan(sig)
        vals = sig[ok]
        if len(vals) < 2:
            return 0.0
        return float(np.sum(np.abs(np.diff(vals))) + abs(vals[0] - vals[-1]))


def _probe_state(sys: KanSystem, h: int, u: float, t: float, params: BasinParams, cycle_cvals=None) -> int:
    """Classifier label with the one-time x4 budget extension on UNDECIDED."""
    kern = get_kernels()
    kp = sys.kernel_params()
    for n_max in (params.n_max, 4 * params.n_max):
        if cycle_cvals is None:
            lab, _ = kern.classify_state(kp, h, u, t, n_max, params.delta, params.window)
        else:
            lab, _ = kern.classify_pinned(
                cycle_cvals, kp[4], kp[7], kp[8], t, n_max, params.delta, params.window
            )
        if lab == 3:
            raise RuntimeError(f"invariance violation at (h={h}, u={u}, t={t})")
        if lab != UNDECIDED:
            return lab
    return UNDECIDED


def _sigma_from_state(
    sys: KanSystem, h: int, u: float, params: BasinParams, tol: float, cvals=None
) -> SigmaSample:
    theta = u + 0.5 * h  # display value; probing uses the exact (h, u) state
    lo, hi = params.delta, 1.0 - params.delta
    if _probe_state(sys, h, u, lo, params, cvals) != BASIN0:
        return SigmaSample(theta, math.nan, "bisection")
    if _probe_state(sys, h, u, hi, params, cvals) != BASIN1:
        return SigmaSample(theta, math.nan, "bisection")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lab = _probe_state(sys, h, u, mid, params, cvals)
        if lab == BASIN0:
            lo = mid
        elif lab == BASIN1:
            hi = mid
        else:
            return SigmaSample(theta, math.nan, "bisection")
    return SigmaSample(theta, 0.5 * (lo + hi), "bisection")


def sigma_bisect(
    sys: KanSystem,
    theta: float,
    params: BasinParams,
    tol: float = SIGMA_TOL,
    cycle: np.ndarray | None = None,
) -> SigmaSample:
    """Bisection of the classifier label in t (stable sets are intervals).

    `cycle` pins the base orbit to an exact periodic cycle of angles; the
    probe budget is raised accordingly since escape from the interior fixed
    point and descent to a boundary both happen at the cycle's own rates.
    """
    cvals = None
    if cycle is not None:
        cvals = np.ascontiguousarray(sys.fiber.coupling(np.asarray(cycle, dtype=float)), dtype=np.float64)
        params = BasinParams(n_max=max(params.n_max, PINNED_N_MAX), delta=params.delta, window=params.window)
    theta = float(theta)
    if theta >= 0.5:
        h, u = 1, theta - 0.5
    else:
        h, u = 0, theta
    return _sigma_from_state(sys, h, u, params, tol, cvals)


def _sigma_task(args):
    sys, hs, us, params, tol = args
    return [_sigma_from_state(sys, int(h), float(u), params, tol) for h, u in zip(hs, us)]


def separating_graph(
    sys: KanSystem,
    g_sigma: int,
    params: BasinParams,
    tol: float = SIGMA_TOL,
    workers: int = 1,
) -> SeparatingGraph:
    """sigma on a uniform grid of size g_sigma.

    Sample angles carry the same irrational sub-cell offset as basin
    rasters (exactly representable dyadic angles follow short exact cycles
    of an affine base, see the kernel module docstring), and are built in
    half-grid form for even g_sigma so that the involution pairing
    i <-> i + g_sigma/2 shares the kernel state bitwise.
    """
    kern = get_kernels()
    off = kern.GOLDEN_OFFSET
    idx = np.arange(g_sigma)
    if g_sigma % 2 == 0:
        half = g_sigma // 2
        hs = (idx >= half).astype(np.int64)
        us = ((idx % half) + off) / g_sigma
    else:
        th = (idx + off) / g_sigma
        hs = (th >= 0.5).astype(np.int64)
        us = th - 0.5 * hs
    chunk = 64
    tasks = [(sys, hs[i : i + chunk], us[i : i + chunk], params, tol) for i in range(0, g_sigma, chunk)]
    parts = parallel_map(_sigma_task, tasks, workers)
    samples = tuple(s for part in parts for s in part)
    return SeparatingGraph(samples, tol, params)


@dataclass(frozen=True)
class SymmetryStats:
    n_pairs_decided: int
    frac_within_tol: float  # |sigma(th) + sigma(th+1/2) - 1| <= 2*tol
    max_defect: float
    mean_sigma: float  # over decided samples


def sigma_symmetry_stats(graph: SeparatingGraph) -> SymmetryStats:
    """Involution pairing theta <-> theta + 1/2 for the classic map."""
    g = graph.grid
    if g % 2:
        raise ValueError("symmetry pairing needs an even grid")
    sig = graph.sigmas
    a, b = sig[: g // 2], sig[g // 2 :]
    ok = ~np.isnan(a) & ~np.isnan(b)
    defects = np.abs(a[ok] + b[ok] - 1.0)
    decided = sig[~np.isnan(sig)]
    return SymmetryStats(
        n_pairs_decided=int(ok.sum()),
        frac_within_tol=float(np.mean(defects <= 2.0 * graph.tol)) if ok.any() else 1.0,
        max_defect=float(defects.max()) if ok.any() else 0.0,
        mean_sigma=float(decided.mean()) if len(decided) else math.nan,
    )


# -- interior periodic orbits -------------------------------------------------


@dataclass(frozen=True)
class InteriorPeriodicOrbit:
    base_angle: float
    period: int
    base_orbit: tuple[float, ...]
    t_fixed: float
    t_points: tuple[float, ...]  # fiber coordinates along the orbit
    multiplier: float  # |(phi^n)'(t_fixed)| >= 1
    boundary_mult0: float
    boundary_mult1: float
    residual: float
    alternates: tuple[float, ...]

    @property
    def central_exponent(self) -> float:
        return math.log(abs(self.multiplier)) / self.period


@dataclass(frozen=True)
class OrbitSearchReport:
    period: int
    orbits: tuple[InteriorPeriodicOrbit, ...]
    n_base_orbits: int
    n_skipped_hypothesis: int  # boundary multipliers not both contracting
    n_refine_failures: int


def _cycle_compose_vec(cvals: np.ndarray, eps: float, xi, xi_d, ts: np.ndarray):
    """Vectorized fiber composition along a cycle: values and derivatives."""
    t = ts.copy()
    d = np.ones_like(t)
    for c in cvals:
        d *= 1.0 + eps * (c * xi_d(t))
        t = t + eps * (c * xi(t))
    return t, d


def interior_periodic_orbits(
    sys: KanSystem,
    n: int,
    cap: int = 2000,
    scan_cells: int = ORBIT_SCAN_CELLS,
    resolve_with_sigma: bool = True,
) -> OrbitSearchReport:
    """Interior repelling fixed points of the fiber composition over
    base-periodic points whose both boundary multipliers contract.

    The contracting boundary multipliers force an interior fixed point with
    multiplier >= 1 (the composition's graph leaves t=0 below the diagonal
    and enters t=1 above it); each sign-change bracket of the scan is
    bisected to 1e-13 and repelling roots are kept.  With several repelling
    roots the one closest to the pinned sigma estimate is selected.
    """
    kern = get_kernels()
    kp = sys.kernel_params()
    eps = kp[4]
    xi = sys.fiber.profile
    xi_d = xi.derivative()
    dxi0 = xi_d(0.0)
    dxi1 = xi_d(1.0)
    base_rep = periodic_points(sys.base, n, cap)
    orbits = []
    skipped = 0
    failures = 0
    for pp in base_rep.points:
        cyc = np.asarray(pp.orbit, dtype=float)
        cvals = np.ascontiguousarray(sys.fiber.coupling(cyc), dtype=np.float64)
        m0 = float(np.prod(1.0 + eps * cvals * dxi0))
        m1 = float(np.prod(1.0 + eps * cvals * dxi1))
        if not (abs(m0) < 1.0 - HYPERBOLIC_BAND and abs(m1) < 1.0 - HYPERBOLIC_BAND):
            skipped += 1
            continue
        ts = np.linspace(0.0, 1.0, scan_cells + 1)
        vals, _ = _cycle_compose_vec(cvals, eps, xi, xi_d, ts)
        g = vals - ts
        roots = []
        for i in range(scan_cells):
            ga, gb = float(g[i]), float(g[i + 1])
            a, b = float(ts[i]), float(ts[i + 1])
            if i > 0 and ga == 0.0:
                roots.append(a)
            elif ga * gb < 0.0:
                while b - a > ORBIT_ROOT_TOL:
                    mid = 0.5 * (a + b)
                    gm = kern.cycle_fiber_eval(cvals, eps, kp[7], kp[9], mid)[0] - mid
                    if gm == 0.0:
                        a = b = mid
                        break
                    if (gm > 0.0) == (ga > 0.0):
                        a, ga = mid, gm
                    else:
                        b = mid
                roots.append(0.5 * (a + b))
        roots = [r for r in roots if 1e-9 < r < 1.0 - 1e-9]
        if not roots:
            raise RuntimeError(
                f"no interior fixed point found over base orbit {pp.angle} despite "
                f"contracting boundary multipliers ({m0}, {m1})"
            )
        cands = []
        for r in roots:
            val, der = kern.cycle_fiber_eval(cvals, eps, kp[7], kp[9], r)
            if abs(val - r) < 1e-12 and abs(der) >= 1.0:
                cands.append((r, abs(der), abs(val - r)))
        if not cands:
            failures += 1
            continue
        if len(cands) > 1 and resolve_with_sigma:
            ssample = sigma_bisect(sys, pp.angle, BasinParams(), cycle=cyc)
            anchor = ssample.sigma if ssample.decided else 0.5
            cands.sort(key=lambda c: abs(c[0] - anchor))
        t_fixed, mult, resid = cands[0]
        alternates = tuple(c[0] for c in cands[1:])
        t_points = [t_fixed]
        for c in cvals[:-1]:
            t_points.append(float(t_points[-1] + eps * (c * xi(t_points[-1]))))
        orbits.append(
            InteriorPeriodicOrbit(
                base_angle=pp.angle,
                period=pp.period,
                base_orbit=pp.orbit,
                t_fixed=t_fixed,
                t_points=tuple(t_points),
                multiplier=mult,
                boundary_mult0=m0,
                boundary_mult1=m1,
                residual=resid,
                alternates=alternates,
            )
        )
    return OrbitSearchReport(n, tuple(orbits), len(base_rep.points), skipped, failures)


# -- observables and measure comparison ---------------------------------------


def standard_observables(max_fourier: int = 4, max_power: int = 4):
    """Products of base Fourier modes and fiber monomials, degrees <= 4."""
    obs = []
    for a in range(max_fourier + 1):
        kinds = ("cos",) if a == 0 else ("cos", "sin")
        for kind in kinds:
            for d in range(max_power + 1):
                obs.append((a, kind, d))
    return obs


def _observable_values(obs, thetas, ts):
    a, kind, d = obs
    if a == 0:
        ang = np.ones_like(thetas)
    elif kind == "cos":
        ang = np.cos(2.0 * np.pi * a * thetas)
    else:
        ang = np.sin(2.0 * np.pi * a * thetas)
    return ang * np.asarray(ts, dtype=float) ** d


class ExcludedMassError(RuntimeError):
    pass


def central_measure_estimate(
    graph: SeparatingGraph, nu: GridMeasure, observables=None
) -> dict[tuple, float]:
    """Pushforward integrals int Phi(theta, sigma(theta)) dnu for the test
    observables; undecided samples are excluded and the quadrature is
    renormalized by the included mass (abort above 1% exclusion)."""
    if graph.grid != nu.grid:
        raise ValueError("separating graph and measure must share a grid")
    observables = observables if observables is not None else standard_observables()
    sig = graph.sigmas
    ok = ~np.isnan(sig)
    excluded = float(nu.weights[~ok].sum())
    if excluded > 0.01:
        raise ExcludedMassError(f"undecided sigma samples carry {excluded:.3%} of the measure")
    w = nu.weights[ok] / nu.weights[ok].sum()
    # quadrature at the graph's own sample angles (offset-uniform grid);
    # the weight shift relative to the measure nodes is O(1/grid)
    th = graph.thetas[ok]
    sg = sig[ok]
    return {obs: float(np.dot(_observable_values(obs, th, sg), w)) for obs in observables}


@dataclass(frozen=True)
class ConvergenceRow:
    period: int
    n_orbits: int
    mean_gap: float  # mean |orbit average - pushforward| over observables
    max_gap: float
    mean_exponent: float
    min_multiplier: float
    coverage: float  # cumulative visited fraction of a 32x16 interior grid


def periodic_measure_convergence(
    sys: KanSystem,
    nu: GridMeasure,
    graph: SeparatingGraph,
    periods,
    cap: int = 2000,
    observables=None,
) -> list[ConvergenceRow]:
    """Observable averages over interior periodic orbits vs the sigma
    pushforward, per period; also the orbit central exponents and the
    cumulative support coverage on a 32x16 grid."""
    observables = observables if observables is not None else standard_observables()
    reference = central_measure_estimate(graph, nu, observables)
    visited = np.zeros((32, 16), dtype=bool)
    rows = []
    for n in periods:
        rep = interior_periodic_orbits(sys, n, cap)
        if not rep.orbits:
            rows.append(ConvergenceRow(n, 0, math.nan, math.nan, math.nan, math.nan, float(visited.mean())))
            continue
        per_obs = {obs: [] for obs in observables}
        exps = []
        min_mult = math.inf
        for orb in rep.orbits:
            th = np.asarray(orb.base_orbit)
            tt = np.asarray(orb.t_points)
            for obs in observables:
                per_obs[obs].append(float(np.mean(_observable_values(obs, th, tt))))
            exps.append(orb.central_exponent)
            min_mult = min(min_mult, orb.multiplier)
            ic = np.minimum((th * 32).astype(int), 31)
            jc = np.minimum((tt * 16).astype(int), 15)
            visited[ic, jc] = True
        gaps = [abs(float(np.mean(per_obs[obs])) - reference[obs]) for obs in observables]
        rows.append(
            ConvergenceRow(
                period=n,
                n_orbits=len(rep.orbits),
                mean_gap=float(np.mean(gaps)),
                max_gap=float(np.max(gaps)),
                mean_exponent=float(np.mean(exps)),
                min_multiplier=float(min_mult),
                coverage=float(visited.mean()),
            )
        )
    return rows
