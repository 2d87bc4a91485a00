"""Scenario-driven command line: potential, solve, verify, exponents, manufacture.

Exit status: 0 on success, 1 when a hard assertion fails (or the solver
does not converge), 2 on configuration or parameter-range errors.
"""

from __future__ import annotations

import argparse
import copy
import datetime as _dt
import json
import platform
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from . import __version__
from ._parallel import get_threads, set_threads
from .exponents import ProblemParams, TrivialRegimeError, derive_exponents, exponent_table, validate_params
from .io import load_measure, read_field_csv, save_measure, write_field_csv, write_json
from .kernels import DomainError, KernelSpec, GreenBall, GreenHalfSpace, Riesz, kernel_potential
from .measures import AtomicMeasure, CellDensityMeasure, DimensionError, uniform_box
from .potentials import WolffParams, havin_mazya_potential, wolff_potential
from .solver import SolverInputError, manufacture_solution, solve_kernel, solve_wolff
from .verify import STANDARD_CHECKS, run_checks

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG = 0, 1, 2

SOLVER_DEFAULTS = {"tol": 1e-4, "max_iter": 500, "c0": 1.0, "dx_norm": False, "nodes_per_decade": 48}
VERIFY_DEFAULTS = {"checks": ["all"], "points": 1000, "trials": 50}


class ConfigError(ValueError):
    pass


def load_schema() -> dict:
    return json.loads(resources.files("nlpot").joinpath("scenario.schema.json").read_text(encoding="utf-8"))


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping")
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    v = jsonschema.Draft7Validator(load_schema())
    errors = sorted(v.iter_errors(cfg), key=lambda e: list(e.path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.path) or "<root>"
        raise ConfigError(f"schema violation at {where}: {e.message}")


def resolve(cfg: dict, args) -> dict:
    """Config with every default filled in and command-line overrides applied."""
    out = copy.deepcopy(cfg)
    out.setdefault("seed", 0)
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    out.setdefault("output", str(Path("out") / out["name"]))
    if getattr(args, "out", None):
        out["output"] = str(args.out)
    if "params" in out:
        out["params"].setdefault("alpha", 1)
    if "kernel" in out:
        k = out["kernel"]
        if k["type"] == "riesz":
            k.setdefault("two_alpha", 2.0)
        if k["type"] == "green_ball":
            k.setdefault("radius", 1.0)
            k.setdefault("center", [0.0] * int(out.get("params", {}).get("n", 3)))
    out["solver"] = {**SOLVER_DEFAULTS, **out.get("solver", {})}
    ver = {**VERIFY_DEFAULTS, **out.get("verify", {})}
    if getattr(args, "check", None):
        ver["checks"] = [c.strip() for c in args.check.split(",") if c.strip()]
    if getattr(args, "points", None) is not None:
        ver["points"] = args.points
    if getattr(args, "trials", None) is not None:
        ver["trials"] = args.trials
    out["verify"] = ver
    if "manufacture" in out:
        out["manufacture"].setdefault("rule", "center")
        out["manufacture"].setdefault("target", "kernel" if "kernel" in out else "wolff")
    return out


# ---------------------------------------------------------------------------
# config -> objects
# ---------------------------------------------------------------------------

def _params(cfg, need_qr: bool = True) -> ProblemParams:
    if "params" not in cfg:
        raise ConfigError("this command needs a params block")
    p = cfg["params"]
    if need_qr and not {"q", "r"} <= set(p):
        raise ConfigError("params need q and r")
    try:
        return ProblemParams(p["n"], p["p"], p.get("q", "1/2"), p.get("alpha", 1), p.get("r", 1))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad params: {exc}") from exc


def _kernel(cfg) -> KernelSpec:
    k = cfg["kernel"]
    n = int(cfg["params"]["n"]) if "params" in cfg else len(k.get("center", [0, 0, 0]))
    if k["type"] == "riesz":
        return Riesz(float(k.get("two_alpha", 2.0)), n)
    if k["type"] == "green_ball":
        return GreenBall(n, float(k.get("radius", 1.0)), k.get("center"))
    return GreenHalfSpace(n)


def _measure(spec, base: Path):
    t = spec["type"]
    if t == "uniform_box":
        return uniform_box(spec["lo"], spec["hi"], spec["cells"], spec.get("value", 1.0))
    if t == "cells":
        return CellDensityMeasure(spec["origin"], spec["cell_size"], tuple(spec["extents"]), np.asarray(spec["density"], dtype=float))
    if t == "atoms":
        return AtomicMeasure(np.asarray(spec["points"], dtype=float), np.asarray(spec["masses"], dtype=float))
    path = Path(spec["path"])
    path = path if path.is_absolute() else base / path
    if not path.exists():
        raise ConfigError(f"measure file not found: {path}")
    return load_measure(path)


def _points(cfg, mu, n: int):
    spec = cfg.get("points")
    if spec is None:
        spec = {"type": "cells"}
    t = spec["type"]
    if t == "list":
        X = np.asarray(spec["values"], dtype=float)
    elif t == "cells":
        if not isinstance(mu, CellDensityMeasure):
            raise ConfigError("points of type 'cells' need a cell-density measure")
        X = mu.grid.centers()
    else:
        lo, hi = np.asarray(spec["lo"], dtype=float), np.asarray(spec["hi"], dtype=float)
        if t == "grid":
            k = spec["count"]
            axes = [np.linspace(a, b, k) if b > a else np.array([a]) for a, b in zip(lo, hi)]
            X = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, lo.size)
        else:
            rng = np.random.default_rng(cfg["seed"])
            X = lo + rng.random((spec["count"], lo.size)) * (hi - lo)
    if X.ndim != 2 or X.shape[1] != n:
        raise ConfigError(f"points must be in R^{n}")
    return X


def _json_num(v):
    v = float(v)
    if np.isnan(v):
        return "nan"
    if np.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_exponents(cfg, base, outdir):
    pp = _params(cfg)
    verdict = validate_params(pp)
    report = {"command": "exponents", "config": cfg, "params": pp.to_dict(), "verdict": verdict.to_dict(), "exponents": None}
    if verdict.ok:
        es = derive_exponents(pp)
        report["exponents"] = es.to_dict()
        print(exponent_table(es))
    else:
        for m in verdict.messages:
            print(m)
    write_json(outdir / "report.json", report)
    return EXIT_OK


def cmd_potential(cfg, base, outdir):
    if "measure" not in cfg:
        raise ConfigError("potential needs a measure")
    mu = _measure(cfg["measure"], base)
    target = cfg.get("target", "kernel" if "kernel" in cfg else "wolff")
    X = _points(cfg, mu, mu.n)
    if target == "kernel":
        if "kernel" not in cfg:
            raise ConfigError("target 'kernel' needs a kernel block")
        K = _kernel(cfg)
        vals = np.asarray(kernel_potential(K, mu, X), dtype=float)
        errs = np.zeros_like(vals) if isinstance(mu, AtomicMeasure) else 1e-9 * np.abs(vals)
        desc = K.describe()
    else:
        pp = _params(cfg, need_qr=False)
        wp = WolffParams(float(pp.alpha), float(pp.p), pp.n)
        if target == "wolff":
            vals, errs = wolff_potential(mu, wp, X, return_error=True)
        else:
            grid = mu.grid.padded(max(mu.grid.extents)) if isinstance(mu, CellDensityMeasure) else None
            if grid is None:
                raise ConfigError("havin_mazya needs a cell-density measure")
            vals = np.asarray(havin_mazya_potential(mu, wp, X, grid), dtype=float)
            errs = np.full_like(vals, np.nan)
        desc = {"alpha": wp.alpha, "p": wp.p, "n": wp.n}
    write_field_csv(outdir / "potential.csv", X, vals, errs)
    fin = vals[np.isfinite(vals)]
    report = {
        "command": "potential",
        "config": cfg,
        "target": target,
        "operator": desc,
        "count": int(vals.size),
        "finite": int(fin.size),
        "min": _json_num(fin.min()) if fin.size else None,
        "max": _json_num(fin.max()) if fin.size else None,
    }
    write_json(outdir / "report.json", report)
    print(f"{vals.size} values written, {vals.size - fin.size} infinite")
    return EXIT_OK


def _kernel_params(pp: ProblemParams, K: KernelSpec) -> ProblemParams:
    alpha = K.two_alpha / 2 if K.kind == "riesz" else 1
    return pp.replace(p=2, alpha=alpha)


def cmd_solve(cfg, base, outdir):
    if "measure" not in cfg:
        raise ConfigError("solve needs a measure")
    pp = _params(cfg)
    s = cfg["solver"]
    kernel = "kernel" in cfg
    gate = _kernel_params(pp, _kernel(cfg)) if kernel else pp
    verdict = validate_params(gate)
    if not verdict.ok:
        raise TrivialRegimeError(verdict)
    sigma = _measure(cfg["measure"], base)
    if kernel:
        K = _kernel(cfg)
        gamma = float(derive_exponents(gate).gamma)
        rep, u = solve_kernel(K, sigma, float(pp.q), s["c0"], s["tol"], s["max_iter"], gamma=gamma)
    else:
        rep, u = solve_wolff(sigma, pp, s["c0"], s["tol"], s["max_iter"], dx_norm=s["dx_norm"],
                             nodes_per_decade=s["nodes_per_decade"])
    report = {"command": "solve", "config": cfg, "verdict": verdict.to_dict(), "solve": rep.to_dict(), "reference_error": None}
    if "reference" in cfg:
        path = Path(cfg["reference"])
        path = path if path.is_absolute() else base / path
        if not path.exists():
            raise ConfigError(f"reference file not found: {path}")
        ref = read_field_csv(path)
        if ref.values.shape != u.values.shape or not np.allclose(ref.nodes, u.nodes):
            raise ConfigError("reference nodes differ from the solution nodes")
        err = np.abs(u.values - ref.values) / np.maximum(np.abs(ref.values), 1e-300)
        report["reference_error"] = _json_num(err.max())
    write_field_csv(outdir / "solution.csv", u.nodes, u.values, rep.final_residual * u.values)
    write_json(outdir / "report.json", report)
    print(f"converged={rep.converged} iterations={rep.iterations} residual={rep.final_residual:.3e}")
    if report["reference_error"] is not None:
        print(f"sup-relative error vs reference: {report['reference_error']:.3e}")
    return EXIT_OK if rep.converged else EXIT_ASSERT


def cmd_manufacture(cfg, base, outdir):
    m = cfg.get("manufacture")
    if m is None:
        raise ConfigError("manufacture needs a manufacture block")
    pp = _params(cfg)
    rho = _measure(m["rho"], base)
    if not isinstance(rho, CellDensityMeasure):
        raise ConfigError("rho must be a cell-density measure")
    if m["target"] == "kernel":
        if "kernel" not in cfg:
            raise ConfigError("target 'kernel' needs a kernel block")
        target = _kernel(cfg)
    else:
        target = WolffParams(float(pp.alpha), float(pp.p), pp.n)
    sigma, u_star = manufacture_solution(target, rho, float(pp.q), rule=m["rule"])
    save_measure(outdir / "sigma.npz", sigma)
    write_field_csv(outdir / "u_star.csv", u_star.nodes, u_star.values)
    scenario = {
        "name": f"{cfg['name']}-solve",
        "seed": cfg["seed"],
        "params": cfg["params"],
        "measure": {"type": "file", "path": "sigma.npz"},
        "reference": "u_star.csv",
        "solver": cfg["solver"],
    }
    if m["target"] == "kernel":
        scenario["kernel"] = cfg["kernel"]
    (outdir / "scenario.yaml").write_text(yaml.safe_dump(scenario, sort_keys=True), encoding="utf-8")
    report = {
        "command": "manufacture",
        "config": cfg,
        "cells": int(sigma.grid.size),
        "sigma_mass": _json_num(sigma.cell_masses().sum()),
        "u_star_min": _json_num(u_star.values.min()),
        "u_star_max": _json_num(u_star.values.max()),
    }
    write_json(outdir / "report.json", report)
    print(f"wrote sigma.npz, u_star.csv and scenario.yaml to {outdir}")
    return EXIT_OK


def cmd_verify(cfg, base, outdir):
    v = cfg["verify"]
    names = v["checks"]
    if names != ["all"]:
        unknown = [n for n in names if n not in STANDARD_CHECKS]
        if unknown:
            raise ConfigError(f"unknown check(s): {', '.join(unknown)}; choose from {', '.join(STANDARD_CHECKS)} or all")
    reports = run_checks(names if names != ["all"] else "all", cfg["seed"], v["points"], v["trials"])
    failed = [r for r in reports if r.asserted and not r.passed]
    for r in reports:
        tag = "PASS" if r.passed else "FAIL"
        kind = "assert" if r.asserted else "report"
        c = "" if r.empirical_constant is None else f" constant={r.empirical_constant:.6g}"
        print(f"{tag} {r.name} [{kind}] margin={r.worst_margin:.3e}{c}")
    write_json(outdir / "report.json", {"command": "verify", "config": cfg, "reports": [r.to_dict() for r in reports],
                                        "failed": len(failed)})
    return EXIT_ASSERT if failed else EXIT_OK


COMMANDS = {
    "potential": cmd_potential,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "exponents": cmd_exponents,
    "manufacture": cmd_manufacture,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlpot", description="Nonlinear potentials and sublinear integral equations")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} step of a scenario")
        p.add_argument("config", nargs="?" if name == "verify" else None, type=Path, help="scenario YAML file")
        p.add_argument("--out", type=Path, default=None, help="output directory (overrides the config)")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: $NLPOT_THREADS or 1)")
        p.add_argument("--seed", type=int, default=None)
        if name == "verify":
            p.add_argument("--check", default=None, help="comma-separated check names or 'all'")
            p.add_argument("--points", type=int, default=None)
            p.add_argument("--trials", type=int, default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads is not None:
            set_threads(args.threads)
        if args.config is None:
            cfg, base = {"name": args.command}, Path.cwd()
        else:
            cfg, base = load_config(args.config), args.config.resolve().parent
        cfg = resolve(cfg, args)
        outdir = Path(cfg["output"])
        if not outdir.is_absolute() and args.out is None and args.config is not None:
            outdir = base / outdir
        outdir.mkdir(parents=True, exist_ok=True)
        # the output location is run metadata, not part of the echoed config
        cfg.pop("output")
        status = COMMANDS[args.command](cfg, base, outdir)
    except TrivialRegimeError as exc:
        print(f"error: trivial regime: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, SolverInputError, DomainError, DimensionError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    meta = {
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "argv": [str(a) for a in (sys.argv[1:] if argv is None else argv)],
        "version": __version__,
        "threads": get_threads(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "exit_status": status,
        "output": str(outdir),
    }
    write_json(outdir / "metadata.json", meta)
    return status


if __name__ == "__main__":
    sys.exit(main())
