"""Command-line front end.

Commands: verify, basin, sigma, orbits, entropy, equilibrium, scan.
Exit codes: 0 ok, 1 check failed, 2 usage/config error.  Commands that
produce artifacts run the axiom and exponent gate first unless --force.
"""

from __future__ import annotations

import argparse
import sys as _sys
import time

import numpy as np

from kanlab import basins as basins_mod
from kanlab import central as central_mod
from kanlab import entropy as entropy_mod
from kanlab import exponents as exponents_mod
from kanlab import ruelle as ruelle_mod
from kanlab.funcs import TrigPoly
from kanlab.runio import ArtifactWriter, ConfigError, RunConfig, load_config, write_csv, write_json
from kanlab.skew import verify_axioms

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


def _verify_payload(cfg: RunConfig) -> tuple[bool, dict]:
    vb = cfg.block("verify")
    axioms = verify_axioms(cfg.system, int(vb["grid_theta"]), int(vb["grid_t"]))
    nu = cfg.measure(int(vb["exponent_grid"]))
    check = exponents_mod.check_negative_exponents(cfg.system, nu)
    payload = {
        "axioms_passed": axioms.passed,
        "expanding": {
            "passed": axioms.expanding.passed,
            "min_derivative": axioms.expanding.min_derivative,
            "branch_separation": axioms.expanding.branch_separation,
        },
        "k1": {"passed": axioms.k1.passed, "max_boundary_error": axioms.k1.max_boundary_error, "min_dt": axioms.k1.min_dt},
        "k2": {"passed": axioms.k2.passed, "max_dt_phi": axioms.k2.max_dt_phi, "threshold": axioms.k2.threshold},
        "k3": {"passed": axioms.k3.passed, "p": axioms.k3.p, "q": axioms.k3.q, "detail": axioms.k3.detail},
        "exponents": {
            "passed": check.passed,
            "lambda0": check.report.lambda0,
            "lambda1": check.report.lambda1,
            "margin_required": check.margin_required,
            "grid": check.report.size,
        },
    }
    return bool(axioms.passed and check.passed), payload


def cmd_verify(cfg: RunConfig, out: ArtifactWriter) -> int:
    ok, payload = _verify_payload(cfg)
    payload["config_hash"] = cfg.hash
    payload["seed"] = cfg.seed
    write_json(out.path("verify_report.json"), payload)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _gate(cfg: RunConfig, force: bool) -> int | None:
    if force:
        return None
    ok, _ = _verify_payload(cfg)
    if not ok:
        print("verification gate failed (rerun with --force to override)", file=_sys.stderr)
        return EXIT_CHECK_FAILED
    return None


def cmd_basin(cfg: RunConfig, out: ArtifactWriter) -> int:
    bb = cfg.block("basin")
    params = basins_mod.BasinParams(int(bb["n_max"]), float(bb["delta"]), int(bb["window"]))
    raster = basins_mod.compute_raster(cfg.system, int(bb["width"]), int(bb["height"]), params, cfg.workers)
    basins_mod.write_pgm(out.path("basin.pgm"), raster)
    f0, f1, fu = raster.fractions
    sidecar = {
        "width": raster.width,
        "height": raster.height,
        "params": params.to_config(),
        "fractions": {"basin0": f0, "basin1": f1, "undecided": fu},
        "config_hash": cfg.hash,
        "seed": cfg.seed,
    }
    if raster.width % 2 == 0 and raster.height % 2 == 0:
        sidecar["involution_agreement"] = basins_mod.involution_agreement(raster)
    write_json(out.path("basin.json"), sidecar)
    if "coverage_n_values" in bb:
        cc = basins_mod.coverage_curve(
            cfg.system,
            int(bb.get("coverage_samples", 10000)),
            bb["coverage_n_values"],
            params,
            seed=cfg.seed,
            workers=cfg.workers,
        )
        write_csv(out.path("coverage.csv"), ["N", "fraction"], list(zip(cc.n_values, cc.undecided_fraction)))
    return EXIT_OK


def cmd_sigma(cfg: RunConfig, out: ArtifactWriter) -> int:
    sb = cfg.block("sigma")
    params = basins_mod.BasinParams(int(sb["n_max"]), float(sb["delta"]), int(sb["window"]))
    graph = central_mod.separating_graph(
        cfg.system, int(sb["g_sigma"]), params, float(sb["tol"]), cfg.workers
    )
    rows = [(s.theta, s.sigma, s.method) for s in graph.samples]
    # sigma over base-periodic angles is the interior fixed point of the
    # fiber composition; appended with its own method tag when requested
    for n in sb.get("periodic_periods", []):
        rep = central_mod.interior_periodic_orbits(cfg.system, int(n), int(sb.get("cap", 2000)))
        rows.extend((o.base_angle, o.t_fixed, "periodic-fixed-point") for o in rep.orbits)
    write_csv(out.path("sigma.csv"), ["theta", "sigma", "method"], rows)
    summary = {
        "g_sigma": graph.grid,
        "tol": graph.tol,
        "params": params.to_config(),
        "decided_fraction": graph.decided_fraction,
        "total_variation": graph.total_variation(),
        "config_hash": cfg.hash,
        "seed": cfg.seed,
    }
    if graph.grid % 2 == 0:
        st = central_mod.sigma_symmetry_stats(graph)
        summary["symmetry"] = {
            "pairs_decided": st.n_pairs_decided,
            "frac_within_tol": st.frac_within_tol,
            "max_defect": st.max_defect,
            "mean_sigma": st.mean_sigma,
        }
    write_json(out.path("sigma.json"), summary)
    return EXIT_OK


def cmd_orbits(cfg: RunConfig, out: ArtifactWriter) -> int:
    ob = cfg.block("orbits")
    rows = []
    payload = {}
    for n in ob["periods"]:
        rep = central_mod.interior_periodic_orbits(cfg.system, int(n), int(ob["cap"]))
        payload[str(n)] = [
            {
                "base_angle": o.base_angle,
                "period": o.period,
                "t_fixed": o.t_fixed,
                "multiplier": o.multiplier,
                "boundary_mult0": o.boundary_mult0,
                "boundary_mult1": o.boundary_mult1,
                "central_exponent": o.central_exponent,
                "alternates": list(o.alternates),
            }
            for o in rep.orbits
        ]
        exps = [o.central_exponent for o in rep.orbits]
        rows.append(
            (
                int(n),
                len(rep.orbits),
                rep.n_skipped_hypothesis,
                float(np.mean(exps)) if exps else float("nan"),
            )
        )
    write_json(out.path("orbits.json"), {"orbits": payload, "config_hash": cfg.hash, "seed": cfg.seed})
    write_csv(out.path("orbits.csv"), ["period", "accepted", "skipped", "mean_central_exponent"], rows)
    if "sigma_csv" in ob:
        # convergence table against a previously computed separating graph
        graph = _load_sigma_csv(ob["sigma_csv"])
        nu = cfg.measure(graph.grid)
        conv = central_mod.periodic_measure_convergence(
            cfg.system, nu, graph, [int(n) for n in ob["periods"]], int(ob["cap"])
        )
        write_csv(
            out.path("convergence.csv"),
            ["period", "n_orbits", "mean_gap", "max_gap", "mean_central_exponent", "coverage"],
            [(r.period, r.n_orbits, r.mean_gap, r.max_gap, r.mean_exponent, r.coverage) for r in conv],
        )
    return EXIT_OK


def _load_sigma_csv(path: str):
    import math as _math

    from kanlab.basins import BasinParams
    from kanlab.central import SeparatingGraph, SigmaSample

    samples = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != "theta,sigma,method":
                raise ConfigError(f"{path} is not a sigma CSV (header {header!r})")
            for line in fh:
                theta_s, sigma_s, method = line.strip().split(",")
                samples.append(SigmaSample(float(theta_s), float(sigma_s), method))
    except OSError as exc:
        raise ConfigError(f"cannot read sigma CSV: {exc}") from exc
    return SeparatingGraph(tuple(samples), 1e-4, BasinParams())


def cmd_entropy(cfg: RunConfig, out: ArtifactWriter) -> int:
    eb = cfg.block("entropy")
    slopes = entropy_mod.entropy_estimate(
        cfg.system, [float(e) for e in eb["eps_values"]], eb["n_values"], str(eb["region"])
    )
    rows = []
    for sl in slopes:
        for n, c in zip(sl.n_values, sl.counts):
            rows.append((sl.eps, n, c))
    write_csv(out.path("entropy.csv"), ["epsilon", "n", "count"], rows)
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    fibs = rng.random(int(eb["fiber_count"]))
    fiber_rep = entropy_mod.fiber_entropy_check(
        cfg.system, fibs, eb["fiber_n_values"], float(eb["fiber_eps"])
    )
    write_json(
        out.path("entropy.json"),
        {
            "slopes": [{"epsilon": s.eps, "slope": s.slope, "counts": list(s.counts), "n_values": list(s.n_values)} for s in slopes],
            "fiber_check": {
                "passed": fiber_rep.passed,
                "bound_violations": fiber_rep.bound_violations,
                "max_rate": fiber_rep.max_rate,
                "eps": fiber_rep.eps,
            },
            "config_hash": cfg.hash,
            "seed": cfg.seed,
        },
    )
    return EXIT_OK if fiber_rep.passed else EXIT_CHECK_FAILED


def cmd_equilibrium(cfg: RunConfig, out: ArtifactWriter) -> int:
    qb = cfg.block("equilibrium")
    phi = TrigPoly.make(
        qb.get("potential_cos", []), qb.get("potential_sin", []), qb.get("potential_constant", 0.0)
    )
    state = ruelle_mod.solve_equilibrium(
        cfg.system.base, phi, int(cfg.raw["grid"]), float(qb["tol"]), int(qb["max_iter"])
    )
    oracle = ruelle_mod.pressure_sparse_oracle(cfg.system.base, phi, 2 * int(cfg.raw["grid"]))
    payload = state.to_jsonable()
    payload["pressure_sparse_oracle_2g"] = oracle
    payload["config_hash"] = cfg.hash
    payload["seed"] = cfg.seed
    write_json(out.path("equilibrium.json"), payload)
    return EXIT_OK


def cmd_scan(cfg: RunConfig, out: ArtifactWriter) -> int:
    scb = cfg.block("scan")
    nu = cfg.measure()
    scan = exponents_mod.epsilon_expansion_scan(cfg.system, nu, scb["eps_values"])
    write_csv(
        out.path("scan.csv"),
        ["epsilon", "lambda0", "lambda1"],
        list(zip(scan.eps_values, scan.lambda0, scan.lambda1)),
    )
    write_json(
        out.path("scan.json"),
        {
            "gamma": scan.gamma,
            "beta": scan.beta,
            "predicted_beta": scan.predicted_beta,
            "coupling_mean": scan.coupling_mean,
            "coupling_mean_ok": scan.coupling_mean_ok,
            "config_hash": cfg.hash,
            "seed": cfg.seed,
        },
    )
    return EXIT_OK


COMMANDS = {
    "verify": (cmd_verify, False),
    "basin": (cmd_basin, True),
    "sigma": (cmd_sigma, True),
    "orbits": (cmd_orbits, True),
    "entropy": (cmd_entropy, True),
    "equilibrium": (cmd_equilibrium, False),
    "scan": (cmd_scan, False),
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="kanlab", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--workers", type=int, default=None, help="override config worker count")
    parser.add_argument("--force", action="store_true", help="skip the verification gate")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        cfg = load_config(args.config, seed=args.seed, workers=args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    fn, gated = COMMANDS[args.command]
    out = ArtifactWriter(args.out)
    t0 = time.monotonic()
    try:
        if gated:
            rc = _gate(cfg, args.force)
            if rc is not None:
                return rc
        rc = fn(cfg, out)
    except ConfigError as exc:
        out.cleanup()
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # module errors: nonzero exit, partial files removed
        out.cleanup()
        print(f"{args.command} failed: {exc}", file=_sys.stderr)
        return EXIT_CHECK_FAILED
    out.manifest(args.command, cfg, time.monotonic() - t0)
    return rc


if __name__ == "__main__":
    raise SystemExit(main())
