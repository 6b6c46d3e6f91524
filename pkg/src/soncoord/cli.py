"""Command-line entry point: ``soncoord <command> --input cfg.json --out DIR``.

Exit codes: 0 on success (an infeasible synthesis is a result, not a
failure), 2 for unreadable or invalid configuration, 3 when a computation
raises one of the library's errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._json import dumps
from .errors import DegenerateMatrix, NoUniqueSolution, SonCoordError
from .estimation import (ConditionDatabase, SampleSet, finite_difference_estimate,
                         least_squares_estimate)
from .lte import Scenario, coordination_demo
from .queueing import DEFAULT_MODEL, PsQueueModel, stability_region_scan
from .simulation import Constant, Harmonic, SaConfig, simulate_sa
from .stability import (is_hurwitz_eigen, lyapunov_certificate, routh_hurwitz_2,
                        routh_hurwitz_3)
from .synthesis import SolverConfig, SynthesisProblem, synthesize
from .system_model import LinearEvaluator, LinearLoopSystem

log = logging.getLogger("soncoord")

COMMANDS = ("analyze", "synthesize", "simulate", "estimate", "region", "lte-demo")


class ConfigError(Exception):
    """Invalid or unreadable configuration (exit code 2)."""


def sub_seed(seed: int, purpose: str) -> int:
    """Independent 63-bit seed derived from the CLI seed and a purpose label."""
    h = hashlib.sha256(f"{int(seed)}:{purpose}".encode()).digest()
    return int.from_bytes(h[:8], "big") >> 1


def _load_json(path):
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _require(cfg, key):
    if key not in cfg:
        raise ConfigError(f"missing required key '{key}'")
    return cfg[key]


class _Writer:
    """Writes artifacts into the output directory and tracks their hashes."""

    def __init__(self, out: Path):
        self.out = out
        self.files = {}
        out.mkdir(parents=True, exist_ok=True)

    def text(self, name: str, content: str):
        data = content.encode()
        (self.out / name).write_bytes(data)
        self.files[name] = hashlib.sha256(data).hexdigest()
        log.info("wrote %s", self.out / name)

    def json(self, name: str, obj):
        self.text(name, dumps(obj) + "\n")

    def manifest(self, command: str, seed: int):
        self.json("manifest.json", {"command": command, "seed": seed, "version": __version__,
                                    "files": dict(sorted(self.files.items()))})


def _system(cfg) -> LinearLoopSystem:
    try:
        return LinearLoopSystem.from_dict(cfg)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid system: {exc}") from None


def cmd_analyze(cfg, w: _Writer, seed: int):
    sys_ = _system(cfg.get("system", cfg))
    rep = is_hurwitz_eigen(sys_.A)
    out = rep.to_dict()
    try:
        X = lyapunov_certificate(sys_.A)
    except NoUniqueSolution:
        X = None
    out["lyapunov_certificate"] = X is not None
    if X is not None:
        out["lyapunov_X"] = X.tolist()
    routh = {2: routh_hurwitz_2, 3: routh_hurwitz_3}.get(sys_.dim)
    if routh is not None:
        try:
            out["routh_hurwitz"] = routh(sys_.A)
        except DegenerateMatrix:
            out["routh_hurwitz"] = None
    out["seed"] = seed
    w.json("report.json", out)


def cmd_synthesize(cfg, w: _Writer, seed: int):
    try:
        problem = SynthesisProblem.from_dict(cfg)
        solver = SolverConfig(**{"seed": sub_seed(seed, "synthesis"), **cfg.get("solver", {})})
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid synthesis problem: {exc}") from None
    sol = synthesize(problem, solver)
    w.json("problem.json", problem.to_dict())
    w.json("solution.json", {**sol.to_dict(), "seed": seed})


def _schedule(sched):
    sched = sched or {"type": "harmonic"}
    kind = sched.get("type", "harmonic")
    if kind == "harmonic":
        return Harmonic(sched.get("a", 1.0), sched.get("b", 10.0))
    if kind == "constant":
        return Constant(_require(sched, "eps"))
    raise ConfigError(f"unknown step schedule '{kind}'")


def cmd_simulate(cfg, w: _Writer, seed: int):
    sys_ = _system(_require(cfg, "system"))
    n = sys_.dim
    C = cfg.get("C", "identity")
    try:
        C = np.eye(n) if C == "identity" else np.asarray(C, dtype=float)
        theta0 = np.asarray(cfg.get("theta0", np.zeros(n)), dtype=float)
        config = SaConfig(steps=int(_require(cfg, "steps")),
                          step_schedule=_schedule(cfg.get("step_schedule")),
                          boxes=cfg.get("boxes"), noise_std=float(cfg.get("noise_std", 0.0)),
                          mode=cfg.get("mode", "synchronous"), seed=sub_seed(seed, "sa"),
                          record_every=int(cfg.get("record_every", 1)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid simulation config: {exc}") from None
    if C.shape != (n, n) or theta0.shape != (n,):
        raise ConfigError("C must be IxI and theta0 must have I entries")
    traj = simulate_sa(LinearEvaluator(sys_), C, config, theta0)
    w.text("trajectory.csv", traj.to_csv())
    w.json("summary.json", {"seed": seed, "final": traj.final, "theta_star": traj.theta_star,
                            "final_error": traj.final_error, "steps": config.steps})


def cmd_estimate(cfg, w: _Writer, seed: int, base: Path):
    key = cfg.get("key", "default")
    method = cfg.get("method", "least_squares")
    db = ConditionDatabase()
    if method == "least_squares":
        path = Path(_require(cfg, "samples"))
        if not path.is_absolute():
            path = base / path
        try:
            samples = SampleSet.from_csv(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read samples: {exc}") from None
        A, b, rms = least_squares_estimate(samples)
        db.put(key, A, b, len(samples), rms)
    elif method == "finite_difference":
        sys_ = _system(_require(cfg, "system"))
        rng = np.random.default_rng(sub_seed(seed, "estimate"))
        repeats = int(cfg.get("repeats", 1))
        A, b = finite_difference_estimate(LinearEvaluator(sys_),
                                          cfg.get("theta0", np.zeros(sys_.dim)),
                                          cfg.get("delta", 1e-3), repeats, rng,
                                          float(cfg.get("noise_std", 0.0)))
        db.put(key, A, b, (2 * sys_.dim + 1) * repeats, 0.0)
    else:
        raise ConfigError(f"unknown estimation method '{method}'")
    w.text("database.json", db.to_json() + "\n")
    w.json("estimate.json", {"seed": seed, "key": key, "method": method})


def _grid(axis, default):
    axis = {**default, **(axis or {})}
    return np.linspace(float(axis["min"]), float(axis["max"]), int(axis["n"]))


def cmd_region(cfg, w: _Writer, seed: int):
    try:
        model = PsQueueModel(**cfg["model"]) if "model" in cfg else DEFAULT_MODEL
        xs = _grid(cfg.get("x"), {"min": 0.02, "max": 1.0, "n": 50})
        bs = _grid(cfg.get("beta"), {"min": 0.0, "max": 20.0, "n": 50})
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid region config: {exc}") from None
    scan = stability_region_scan(model, xs, bs)
    w.text("region.csv", scan.to_csv())
    w.json("region_summary.json", {"seed": seed, "model": model.to_dict(),
                                   "points": int(scan.unstable.size),
                                   "unstable": int(scan.unstable.sum()),
                                   "degenerate": int(scan.degenerate.sum())})


def cmd_lte_demo(cfg, w: _Writer, seed: int):
    try:
        scenario = Scenario.from_dict(cfg.get("scenario", {}))
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from None
    rates = tuple(cfg.get("hotspot_sweep", [2.0, 4.0, 8.0, 16.0, 32.0]))
    weights = cfg.get("priority_weights", [1.0, 1.0, 20.0])
    demo = coordination_demo(scenario, rates, weights, seed=sub_seed(seed, "lte-sa"))

    w.json("scenario.json", demo.scenario.to_dict())
    w.json("linearization.json", demo.linearization.to_dict())
    w.text("kpis_coordinated.csv", demo.coordinated.to_csv())
    w.text("kpis_uncoordinated.csv", demo.uncoordinated.to_csv())
    w.text("kpis_weighted.csv", demo.weighted.to_csv())
    w.json("summary.json", {"seed": seed, **demo.summary()})


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="soncoord", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", "-i", help="JSON configuration file")
    p.add_argument("--out", "-o", default="out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", "-v", action="count", default=0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(message)s")
    try:
        if args.input is None and args.command not in ("region", "lte-demo"):
            raise ConfigError(f"{args.command} requires --input")
        cfg = _load_json(args.input)
        if not isinstance(cfg, dict):
            raise ConfigError("configuration must be a JSON object")
        w = _Writer(Path(args.out))
        base = Path(args.input).parent if args.input else Path(".")
        handlers = {
            "analyze": lambda: cmd_analyze(cfg, w, args.seed),
            "synthesize": lambda: cmd_synthesize(cfg, w, args.seed),
            "simulate": lambda: cmd_simulate(cfg, w, args.seed),
            "estimate": lambda: cmd_estimate(cfg, w, args.seed, base),
            "region": lambda: cmd_region(cfg, w, args.seed),
            "lte-demo": lambda: cmd_lte_demo(cfg, w, args.seed),
        }
        handlers[args.command]()
        w.manifest(args.command, args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SonCoordError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
