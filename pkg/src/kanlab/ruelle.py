"""Discretized Ruelle transfer operator for the base expanding map.

The operator (L f)(x) = sum_{E(y)=x} e^{phi(y)} f(y) is discretized on a
uniform midpoint grid x_i = (i+1/2)/G with periodic linear interpolation:
equilibrium states come out of power iteration on L (eigenfunction h and
the eigenvalue Lambda = e^pressure) and on its exact discrete adjoint (the
measure weights).  A second, independent route builds the same operator as
an explicit sparse matrix and power-iterates it at doubled resolution; the
two pressures must agree, which is the convergence oracle for this scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from kanlab.circle import ExpandingCircleMap, mod1
from kanlab.funcs import TrigPoly


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class GridMeasure:
    """Probability measure on the circle: weights at midpoint nodes (i+1/2)/G."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < -1e-15):
            raise ValueError("grid measure weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError("grid measure weights must sum to 1")
        object.__setattr__(self, "weights", w)

    @staticmethod
    def lebesgue(grid: int) -> "GridMeasure":
        return GridMeasure(np.full(grid, 1.0 / grid))

    @property
    def grid(self) -> int:
        return len(self.weights)

    @property
    def nodes(self) -> np.ndarray:
        g = self.grid
        return (np.arange(g) + 0.5) / g

    def integrate(self, values) -> float:
        """Midpoint-rule integral of a function given by values on the nodes
        (or a callable evaluated there)."""
        v = values(self.nodes) if callable(values) else np.asarray(values, dtype=float)
        return float(np.dot(v, self.weights))

    def interval_mass(self, a: float, b: float) -> float:
        """Mass of the arc [a,b) (node-membership rule, O(1/G) end bias)."""
        x = self.nodes
        if a <= b:
            sel = (x >= a) & (x < b)
        else:
            sel = (x >= a) | (x < b)
        return float(self.weights[sel].sum())


class TransferOperator:
    """Grid discretization of L for one (map, potential, grid) triple."""

    def __init__(self, emap: ExpandingCircleMap, phi: TrigPoly | None, grid: int):
        self.emap = emap
        self.phi = phi if phi is not None else TrigPoly()
        self.grid = grid
        nodes = (np.arange(grid) + 0.5) / grid
        self.nodes = nodes
        y = _preimage_table(emap, nodes)  # (G, |k|)
        self.preimages = y
        pos = y * grid - 0.5
        i0 = np.floor(pos)
        frac = pos - i0
        self.idx0 = (i0.astype(np.int64)) % grid
        self.idx1 = (self.idx0 + 1) % grid
        self.w0 = 1.0 - frac
        self.w1 = frac
        self.branch_weight = np.ones_like(y) if self.phi.is_zero else np.exp(self.phi(y))

    def apply(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        interp = f[self.idx0] * self.w0 + f[self.idx1] * self.w1
        return np.sum(self.branch_weight * interp, axis=1)

    def apply_adjoint(self, nu: np.ndarray) -> np.ndarray:
        nu = np.asarray(nu, dtype=float)
        out = np.zeros(self.grid)
        contrib = self.branch_weight * nu[:, None]
        np.add.at(out, self.idx0, contrib * self.w0)
        np.add.at(out, self.idx1, contrib * self.w1)
        return out

    def sparse_matrix(self):
        """The same operator as an explicit scipy CSR matrix (oracle route)."""
        from scipy.sparse import coo_matrix

        g = self.grid
        k = self.emap.n_branches
        rows = np.repeat(np.arange(g), 2 * k)
        cols = np.stack([self.idx0, self.idx1], axis=2).reshape(-1)
        vals = np.stack([self.branch_weight * self.w0, self.branch_weight * self.w1], axis=2).reshape(-1)
        return coo_matrix((vals, (rows, cols)), shape=(g, g)).tocsr()


def _preimage_table(emap: ExpandingCircleMap, nodes: np.ndarray) -> np.ndarray:
    """All preimages of each node, vectorized Newton on the lift."""
    k = emap.degree
    kk = abs(k)
    if emap.is_linear:
        if k > 0:
            return (nodes[:, None] + np.arange(kk)[None, :]) / k
        return mod1((nodes[:, None] + np.arange(kk)[None, :]) / k)
    c0 = float(emap.lift(0.0))
    if k > 0:
        jmin = np.ceil(c0 - nodes)
    else:
        jmin = np.floor(c0 + k - nodes) + 1.0
    targets = nodes[:, None] + (jmin[:, None] + np.arange(kk)[None, :])
    y = targets / k
    for _ in range(60):
        f = emap.lift(y) - targets
        if np.max(np.abs(f)) < 1e-14:
            break
        y = y - f / emap.derivative(y)
    if np.max(np.abs(emap.lift(y) - targets)) > 1e-11:
        raise ConvergenceError("preimage table Newton failed", float(np.max(np.abs(emap.lift(y) - targets))))
    return mod1(y)


@dataclass(frozen=True)
class EquilibriumState:
    potential: TrigPoly
    pressure: float
    eigenfunction: np.ndarray  # h, normalized so that int h dnu = 1
    measure: GridMeasure
    jacobian: np.ndarray
    grid: int
    iterations: int
    holder_quotient: float  # empirical sup |J(x)-J(y)| / |x-y|^(1/2) over grid neighbors

    def to_jsonable(self) -> dict:
        return {
            "pressure": self.pressure,
            "grid": self.grid,
            "potential": self.potential.to_config(),
            "weights": self.measure.weights.tolist(),
            "eigenfunction": self.eigenfunction.tolist(),
            "jacobian": self.jacobian.tolist(),
            "iterations": self.iterations,
            "holder_quotient": self.holder_quotient,
        }


def transfer_apply(emap: ExpandingCircleMap, phi: TrigPoly | None, f: np.ndarray) -> np.ndarray:
    """One application of L to node values f (grid inferred from len(f))."""
    return TransferOperator(emap, phi, len(np.asarray(f))).apply(f)


def solve_equilibrium(
    emap: ExpandingCircleMap,
    phi: TrigPoly | None = None,
    grid: int = 4096,
    tol: float = 1e-12,
    max_iter: int = 100000,
) -> EquilibriumState:
    """Equilibrium state by power iteration on L and its adjoint.

    Normalizations: nu is a probability vector and int h dnu = 1.  Pressure
    is log of the common eigenvalue; the Jacobian is
    Lambda * e^{-phi} * h(E(x)) / h(x).
    """
    if grid < 1024 or grid & (grid - 1):
        raise ValueError("grid must be a power of two >= 2^10")
    op = TransferOperator(emap, phi, grid)
    h = np.ones(grid)
    lam_prev = math.nan
    lam = math.nan
    iters = 0
    for iters in range(1, max_iter + 1):
        h_new = op.apply(h)
        lam = float(h_new.sum() / h.sum())
        h = h_new / h_new.sum() * grid
        if iters >= 2 and abs(lam - lam_prev) < tol:
            break
        lam_prev = lam
    else:
        raise ConvergenceError("transfer operator power iteration did not converge", abs(lam - lam_prev))
    nu = np.full(grid, 1.0 / grid)
    res = math.nan
    for it2 in range(1, max_iter + 1):
        nu_new = op.apply_adjoint(nu)
        s = nu_new.sum()
        nu_new /= s
        res = float(np.abs(nu_new - nu).sum())
        nu = nu_new
        if res < tol:
            break
    else:
        raise ConvergenceError("adjoint power iteration did not converge", res)
    nu = np.maximum(nu, 0.0)
    nu /= nu.sum()
    measure = GridMeasure(nu)
    h = h / measure.integrate(h)
    phi_t = phi if phi is not None else TrigPoly()
    e_theta = mod1(emap(op.nodes))
    pos = e_theta * grid - 0.5
    i0 = np.floor(pos)
    frac = pos - i0
    i0 = i0.astype(np.int64) % grid
    h_at_image = h[i0] * (1.0 - frac) + h[(i0 + 1) % grid] * frac
    phi_vals = np.zeros(grid) if phi_t.is_zero else phi_t(op.nodes)
    jac = lam * np.exp(-phi_vals) * h_at_image / h
    if np.any(jac <= 0.0):
        raise ConvergenceError("nonpositive Jacobian in equilibrium state", float(jac.min()))
    dj = np.abs(np.diff(jac, append=jac[:1]))
    holder = float(np.max(dj) / (1.0 / grid) ** 0.5)
    return EquilibriumState(
        potential=phi_t,
        pressure=math.log(lam),
        eigenfunction=h,
        measure=measure,
        jacobian=jac,
        grid=grid,
        iterations=iters,
        holder_quotient=holder,
    )


def pressure_sparse_oracle(
    emap: ExpandingCircleMap, phi: TrigPoly | None, grid: int, power_steps: int = 2000
) -> float:
    """log of the largest eigenvalue of the explicit sparse branch matrix,
    by plain power steps; the independent cross-check for solve_equilibrium."""
    op = TransferOperator(emap, phi, grid)
    mat = op.sparse_matrix()
    v = np.ones(grid)
    lam = 1.0
    for _ in range(power_steps):
        v = mat @ v
        lam = v.sum() / grid
        v = v / lam
    return float(np.log(lam))


@dataclass(frozen=True)
class DistortionReport:
    max_ratio_per_n: dict[int, float]
    bound: float
    passed: bool


def bounded_distortion_report(
    state: EquilibriumState,
    emap: ExpandingCircleMap,
    n_max: int = 8,
    samples: int = 200,
    seed: int = 0,
) -> DistortionReport:
    """Jacobian-product ratios along pairs in the same branch cylinder.

    Pairs are built by pulling two random endpoints back through the same
    random inverse-branch itinerary.  Bounded distortion for an expanding
    map with a Lipschitz log-Jacobian gives the a-priori ratio bound
    exp(Lip(log J) * diam * lambda/(lambda-1)), which is the pass threshold
    (for the zero potential on a linear base the ratios are exactly 1).
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    g = state.grid
    log_j = np.log(state.jacobian)
    lip = float(np.max(np.abs(np.diff(log_j, append=log_j[:1]))) * g)
    lam = emap.expansion_bound()
    # endpoints sit in one fundamental interval (|a-b| <= 1), so
    # sum_j dist(x_j,y_j) <= sum_{i>=1} lambda^-i = 1/(lambda-1)
    bound = math.exp(lip / (lam - 1.0))

    def jac_at(x):
        pos = mod1(x) * g - 0.5
        i0 = np.floor(pos)
        fr = pos - i0
        i0 = i0.astype(np.int64) % g
        return state.jacobian[i0] * (1.0 - fr) + state.jacobian[(i0 + 1) % g] * fr

    max_ratio: dict[int, float] = {}
    kk = emap.n_branches
    for n in range(1, n_max + 1):
        worst = 1.0
        for _ in range(samples):
            a, b = rng.random(2)
            branches = rng.integers(0, kk, size=n)
            xs = [a]
            ys = [b]
            for ell in branches[::-1]:
                xs.append(float(emap.inverse_branches(xs[-1])[ell]))
                ys.append(float(emap.inverse_branches(ys[-1])[ell]))
            # forward orbit points are the pullbacks read backwards, minus the endpoints
            jx = float(np.prod(jac_at(np.array(xs[1:]))))
            jy = float(np.prod(jac_at(np.array(ys[1:]))))
            r = jx / jy if jx > jy else jy / jx
            worst = max(worst, r)
        max_ratio[n] = worst
    passed = all(v <= max(bound, 2.0 * max_ratio[1]) * (1.0 + 1e-9) for v in max_ratio.values())
    return DistortionReport(max_ratio, bound, passed)


FOURIER_TEST_MODES = 4  # weak* proxy distance uses cos/sin up to this order


def weakstar_distance(mu: GridMeasure, nu: GridMeasure) -> float:
    """max discrepancy over the first Fourier observables (weak* proxy)."""
    worst = 0.0
    for m in range(1, FOURIER_TEST_MODES + 1):
        for f in (lambda x, m=m: np.cos(2 * np.pi * m * x), lambda x, m=m: np.sin(2 * np.pi * m * x)):
            worst = max(worst, abs(mu.integrate(f) - nu.integrate(f)))
    return worst


@dataclass(frozen=True)
class StabilityRow:
    s: float
    distance: float
    pressure: float


def statistical_stability_experiment(
    degree: int,
    perturbation: TrigPoly,
    s_values: list[float],
    phi: TrigPoly | None = None,
    grid: int = 4096,
) -> list[StabilityRow]:
    """Weak*-distance of the equilibrium state of E_s = k theta + s*u(theta)
    to the unperturbed one, for each deformation size s."""
    phi_t = phi if phi is not None else TrigPoly()
    if not phi_t.is_zero:
        spread = float(np.ptp(phi_t(np.arange(4096) / 4096)))
        if spread >= math.log(abs(degree)):
            raise ValueError("potential oscillation must stay below log|degree|")
    base0 = ExpandingCircleMap(degree=degree)
    ref = solve_equilibrium(base0, phi_t, grid)
    rows = []
    for s in s_values:
        emap = ExpandingCircleMap(degree=degree, perturbation=perturbation, amplitude=s) if s else base0
        st = solve_equilibrium(emap, phi_t, grid)
        rows.append(StabilityRow(s, weakstar_distance(st.measure, ref.measure), st.pressure))
    return rows
