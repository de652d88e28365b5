"""Central Lyapunov exponents at the boundary circles and along orbits.

The boundary exponent with respect to a base measure nu is the quadrature
of log |d_t phi(theta, j)| against nu (midpoint rule on nu's grid); the
Birkhoff estimator averages the same integrand along a single orbit, with
standard errors from batch means.  The negative-exponent hypothesis check
and the small-coupling quadratic scan both build on the quadrature route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from kanlab._backend import get_kernels
from kanlab.ruelle import GridMeasure
from kanlab.skew import KanSystem


@dataclass(frozen=True)
class ExponentReport:
    lambda0: float
    lambda1: float
    method: str  # "quadrature" | "birkhoff"
    size: int  # grid size or sample size
    resolution_error: float  # quadrature: |value(G) - value(G/2)| bound over j
    standard_error: float | None = None  # birkhoff only


def boundary_exponent(sys: KanSystem, j: int, nu: GridMeasure) -> float:
    """integral of log |d_t phi(theta, j)| d nu(theta)."""
    if j not in (0, 1):
        raise ValueError("boundary index must be 0 or 1")
    vals = sys.fiber.dt(nu.nodes, float(j))
    vals = np.asarray(vals, dtype=float)
    if np.any(vals == 0.0):
        raise ZeroDivisionError(
            "d_t phi vanishes at a grid node: logarithmic singularity "
            "(the fiber maps must be diffeomorphisms)"
        )
    return nu.integrate(np.log(np.abs(vals)))


def birkhoff_central_exponent(
    sys: KanSystem,
    theta0: float,
    t0: float,
    n_steps: int,
    burn_in: int = 1000,
    n_batches: int = 20,
) -> tuple[float, float]:
    """Orbit average of log |d_t phi| after burn-in; returns (estimate, s.e.).

    The standard error comes from batch means (serial correlation along the
    orbit makes the naive i.i.d. error estimate too small).
    """
    if n_steps < 10000:
        raise ValueError("Birkhoff estimation needs at least 1e4 steps")
    kern = get_kernels()
    batch_len = n_steps // n_batches
    means = kern.birkhoff_batches(sys.kernel_params(), float(theta0), float(t0), burn_in, n_batches, batch_len)
    if np.any(np.isnan(means)):
        raise ZeroDivisionError("orbit hit a zero fiber derivative")
    est = float(np.mean(means))
    se = float(np.std(means, ddof=1) / math.sqrt(n_batches))
    return est, se


def quadrature_report(sys: KanSystem, nu: GridMeasure) -> ExponentReport:
    """Both boundary exponents with a resolution-halving error estimate."""
    g = nu.grid
    lam0 = boundary_exponent(sys, 0, nu)
    lam1 = boundary_exponent(sys, 1, nu)
    if g % 2 == 0:
        coarse = GridMeasure(_coarsen(nu.weights))
        err = max(
            abs(lam0 - boundary_exponent(sys, 0, coarse)),
            abs(lam1 - boundary_exponent(sys, 1, coarse)),
        )
    else:
        err = math.nan
    return ExponentReport(lam0, lam1, "quadrature", g, float(err))


def _coarsen(weights: np.ndarray) -> np.ndarray:
    return weights.reshape(-1, 2).sum(axis=1)


@dataclass(frozen=True)
class NegativeExponentCheck:
    passed: bool
    report: ExponentReport
    margin_required: float


def check_negative_exponents(sys: KanSystem, nu: GridMeasure) -> NegativeExponentCheck:
    """Passes iff both boundary exponents are negative with margin exceeding
    3x the quadrature-resolution error (the hypotheses are strict
    inequalities, so the numeric check needs a stated margin)."""
    rep = quadrature_report(sys, nu)
    margin = 3.0 * max(rep.resolution_error, 1e-15)
    passed = rep.lambda0 < -margin and rep.lambda1 < -margin
    return NegativeExponentCheck(passed, rep, margin)


@dataclass(frozen=True)
class EpsilonScan:
    eps_values: tuple[float, ...]
    lambda0: tuple[float, ...]
    lambda1: tuple[float, ...]
    gamma: float  # fitted power of |lambda| ~ beta * eps^gamma
    beta: float
    coupling_mean: float  # int C dnu, should vanish for the quadratic regime
    coupling_mean_ok: bool
    predicted_beta: float  # (1/2) int (d_t psi)^2 dnu at the boundary


def epsilon_expansion_scan(sys: KanSystem, nu: GridMeasure, eps_values) -> EpsilonScan:
    """Boundary exponents for a family of coupling strengths, with the
    least-squares power fit |lambda| = beta * eps^gamma on log-log axes.

    For mean-zero coupling the exponents are quadratic in eps with
    coefficient (1/2) int (C * xi'(j))^2 dnu, which is reported alongside
    the fit.
    """
    from kanlab.skew import FiberFamily

    eps_values = tuple(float(e) for e in eps_values)
    c_mean = nu.integrate(sys.fiber.coupling)
    c_ok = abs(c_mean) <= 1e-10
    lam0 = []
    lam1 = []
    for e in eps_values:
        fib = FiberFamily(eps=e, coupling=sys.fiber.coupling, profile=sys.fiber.profile)
        s = KanSystem(base=sys.base, fiber=fib)
        lam0.append(boundary_exponent(s, 0, nu) if e != 0.0 else 0.0)
        lam1.append(boundary_exponent(s, 1, nu) if e != 0.0 else 0.0)
    pos = [(e, abs(l0)) for e, l0 in zip(eps_values, lam0) if e != 0.0 and l0 != 0.0]
    if len(pos) >= 2:
        lx = np.log([p[0] for p in pos])
        ly = np.log([p[1] for p in pos])
        gamma, logbeta = np.polyfit(lx, ly, 1)
    else:
        gamma, logbeta = math.nan, math.nan
    dpsi0 = sys.fiber.coupling(nu.nodes) * sys.fiber.profile.derivative()(0.0)
    predicted = 0.5 * nu.integrate(dpsi0**2)
    return EpsilonScan(
        eps_values=eps_values,
        lambda0=tuple(lam0),
        lambda1=tuple(lam1),
        gamma=float(gamma),
        beta=float(math.exp(logbeta)) if not math.isnan(logbeta) else math.nan,
        coupling_mean=float(c_mean),
        coupling_mean_ok=bool(c_ok),
        predicted_beta=float(predicted),
    )
