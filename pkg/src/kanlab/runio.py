"""Config parsing, canonical serialization, and artifact writing.

Reproducibility is the product: every artifact embeds the fully resolved
config and its hash, floats are always written with 17 significant digits,
JSON keys are sorted, and a manifest records command, hash, versions and
wall time.  Identical config + seed must give byte-identical artifacts
(the manifest's wall-time field is the single documented exception).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from kanlab.funcs import Poly, TrigPoly
from kanlab.circle import ExpandingCircleMap
from kanlab.ruelle import GridMeasure, solve_equilibrium
from kanlab.skew import FiberFamily, KanSystem, kan1994


class ConfigError(ValueError):
    """Malformed run configuration (CLI exit code 2)."""


def fmt_float(x: float) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    return str(x)


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, fixed float formatting."""

    def enc(o):
        if isinstance(o, dict):
            items = sorted(o.items(), key=lambda kv: str(kv[0]))
            return "{" + ",".join(f"{json.dumps(str(k))}:{enc(v)}" for k, v in items) + "}"
        if isinstance(o, (list, tuple)):
            return "[" + ",".join(enc(v) for v in o) + "]"
        if isinstance(o, np.ndarray):
            return enc(o.tolist())
        if isinstance(o, (bool, np.bool_)):
            return "true" if o else "false"
        if isinstance(o, (float, np.floating)):
            return fmt_float(float(o))
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if o is None:
            return "null"
        return json.dumps(str(o))

    return enc(obj)


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(obj))
        fh.write("\n")


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt_float(v) if isinstance(v, float) else str(v) for v in row) + "\n")


# -- run configuration ---------------------------------------------------------

DEFAULTS = {
    "system": "kan1994",
    "measure": "lebesgue",
    "grid": 4096,
    "seed": 0,
    "workers": 1,
    "verify": {"grid_theta": 4096, "grid_t": 256, "exponent_grid": 16384},
    "basin": {"width": 512, "height": 512, "n_max": 5000, "delta": 1e-6, "window": 50},
    "sigma": {"g_sigma": 4096, "tol": 1e-4, "n_max": 5000, "delta": 1e-6, "window": 50},
    "orbits": {"periods": [1, 2, 3, 4, 5, 6], "cap": 2000},
    "entropy": {
        "eps_values": [0.05],
        "n_values": [4, 5, 6, 7, 8, 9, 10],
        "region": "cylinder",
        "fiber_count": 16,
        "fiber_n_values": [1, 5, 10, 20, 30, 40],
        "fiber_eps": 0.05,
    },
    "equilibrium": {"potential_cos": [], "potential_sin": [], "tol": 1e-12, "max_iter": 100000},
    "scan": {"eps_values": [0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125]},
}


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


@dataclass
class RunConfig:
    raw: dict
    system: KanSystem
    measure_spec: object
    seed: int
    workers: int

    @property
    def hash(self) -> str:
        # worker count is execution machinery, not semantics: artifacts must
        # be byte-identical across worker counts, so it stays out of the hash
        payload = {k: v for k, v in self.raw.items() if k != "workers"}
        return config_hash(payload)

    def block(self, name: str) -> dict:
        return self.raw[name]

    def measure(self, grid: int | None = None) -> GridMeasure:
        g = int(grid if grid is not None else self.raw["grid"])
        spec = self.measure_spec
        if spec == "lebesgue":
            return GridMeasure.lebesgue(g)
        if isinstance(spec, dict) and "equilibrium" in spec:
            pot = spec["equilibrium"]
            phi = TrigPoly.make(
                pot.get("potential_cos", []),
                pot.get("potential_sin", []),
                pot.get("potential_constant", 0.0),
            )
            return solve_equilibrium(self.system.base, phi, g).measure
        raise ConfigError(f"unknown measure spec {spec!r}")


def build_system(block) -> KanSystem:
    if block == "kan1994" or block == {"builtin": "kan1994"}:
        return kan1994()
    if not isinstance(block, dict):
        raise ConfigError(f"system block must be 'kan1994' or an object, got {block!r}")
    try:
        base_b = block["base"]
        fiber_b = block["fiber"]
        base = ExpandingCircleMap(
            degree=int(base_b["degree"]),
            perturbation=TrigPoly.make(base_b.get("fourier_cos", []), base_b.get("fourier_sin", [])),
            amplitude=float(base_b.get("amplitude", 0.0)),
        )
        fiber = FiberFamily(
            eps=float(fiber_b["epsilon"]),
            coupling=TrigPoly.make(fiber_b.get("C_cos", []), fiber_b.get("C_sin", [])),
            profile=Poly.make(fiber_b["xi_poly"]),
        )
        return KanSystem(base=base, fiber=fiber)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad system block: {exc}") from exc


def load_config(path_or_dict, seed=None, workers=None) -> RunConfig:
    if isinstance(path_or_dict, dict):
        user = path_or_dict
    else:
        try:
            with open(path_or_dict, "r", encoding="utf-8") as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(user, dict):
        raise ConfigError("config root must be a JSON object")
    raw = _merge(DEFAULTS, user)
    if seed is not None:
        raw["seed"] = int(seed)
    if workers is not None:
        raw["workers"] = int(workers)
    system = build_system(raw["system"])
    raw["system"] = system.to_config()  # resolved form goes into the hash
    return RunConfig(
        raw=raw,
        system=system,
        measure_spec=raw["measure"],
        seed=int(raw["seed"]),
        workers=int(raw["workers"]),
    )


# -- artifact transactions -----------------------------------------------------


class ArtifactWriter:
    """Tracks written files; removes them all if the command fails."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.files: list[str] = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        p = os.path.join(self.out_dir, name)
        self.files.append(p)
        return p

    def cleanup(self) -> None:
        for p in self.files:
            try:
                os.unlink(p)
            except OSError:
                pass

    def manifest(self, command: str, cfg: RunConfig, wall_time: float) -> None:
        import kanlab

        write_json(
            os.path.join(self.out_dir, f"{command}_manifest.json"),
            {
                "command": command,
                "config": cfg.raw,
                "config_hash": cfg.hash,
                "package_version": kanlab.__version__,
                "kernel_backend": kanlab.kernel_backend,
                "wall_time_seconds": wall_time,
            },
        )
