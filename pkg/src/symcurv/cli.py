"""Batch front end: run checks and solves from an INI-style config file.

Usage: symcurv <config> [--seed S] [--trials T] [--output DIR]

Exit codes: 0 = property verified / solve converged, 1 = property refuted /
solve failed (a witness file is written), 2 = usage or runtime error.
Sections: [run] [operator] [psi] [grid] [verify]; 'key = value' lines,
comma-separated numeric lists, '#' comments; unknown keys are rejected.
"""

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConfigError, ConvergenceError, DomainError, SymcurvError
from .combop import OperatorSpec, lower_operator
from .cones import ConeSpec, segment_convexity_check, ellipticity_scan
from . import concave, geomsolve, hypcheck

COMMANDS = (
    "check-condition-c",
    "check-condition-q",
    "check-cone",
    "verify-concavity",
    "verify-guan",
    "solve",
    "homotopy",
    "barrier-check",
)

# section -> key -> parser
_SCHEMA = {
    "run": {
        "command": "str",
        "output_dir": "str",
        "seed": "int",
        "trials": "int",
        "tol": "float",
    },
    "operator": {"n": "int", "k": "int", "alphas": "fraclist"},
    "psi": {
        "family": "str",
        "c": "float",
        "p": "float",
        "eps": "float",
        "axis": "floatlist",
        "axes": "floatlist",
    },
    "grid": {"n_lon": "int", "n_lat": "int"},
    "verify": {
        "field": "str",
        "l": "int",
        "delta": "float",
        "cone": "str",
        "hessian_trials": "int",
        "r1": "float",
        "r2": "float",
        "steps": "int",
        "homotopy_eps": "float",
        "init_rho": "float",
        "init_noise": "float",
    },
}

_DEFAULTS = {"seed": 0, "trials": 1000, "output_dir": "out"}


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    trials: int = 1000
    tol: float = None
    output_dir: str = "out"
    operator: dict = None
    psi: dict = None
    grid: dict = None
    verify: dict = field(default_factory=dict)


def _parse_value(kind, raw, lineno):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(Fraction(raw)) if "/" in raw else float(raw)
        if kind == "str":
            return raw
        if kind == "floatlist":
            return tuple(float(Fraction(p)) if "/" in p else float(p)
                         for p in raw.split(","))
        if kind == "fraclist":
            out = []
            for p in raw.split(","):
                p = p.strip()
                out.append(Fraction(p) if ("/" in p or "." not in p) else float(p))
            return tuple(out)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"non-numeric value {raw!r}", line=lineno) from None
    raise ConfigError(f"unhandled value kind {kind}", line=lineno)


def parse_config(text):
    """Parse and validate config text into a RunConfig with defaults filled."""
    sections = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            sections.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=lineno)
        if section is None:
            raise ConfigError("key outside of any section", line=lineno)
        key, raw_val = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", line=lineno)
        if key in sections[section]:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", line=lineno)
        sections[section][key] = _parse_value(_SCHEMA[section][key], raw_val, lineno)

    run = sections.get("run", {})
    if "command" not in run:
        raise ConfigError("missing required key 'command' in [run]")
    command = run["command"]
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; choose from {COMMANDS}")
    cfg = RunConfig(
        command=command,
        seed=run.get("seed", _DEFAULTS["seed"]),
        trials=run.get("trials", _DEFAULTS["trials"]),
        tol=run.get("tol"),
        output_dir=run.get("output_dir", _DEFAULTS["output_dir"]),
        operator=sections.get("operator"),
        psi=sections.get("psi"),
        grid=sections.get("grid"),
        verify=sections.get("verify", {}),
    )
    _validate_for_command(cfg)
    return cfg


def _validate_for_command(cfg):
    needs_operator = cfg.command in COMMANDS  # every command references Q
    if needs_operator and cfg.operator is None:
        raise ConfigError(f"command {cfg.command!r} needs an [operator] section")
    op = cfg.operator
    for key in ("n", "k", "alphas"):
        if key not in op:
            raise ConfigError(f"missing key {key!r} in [operator]")
    if len(op["alphas"]) != op["k"] + 1:
        raise ConfigError(
            f"alphas must list k+1 = {op['k'] + 1} coefficients, got {len(op['alphas'])}"
        )
    if cfg.command in ("solve", "homotopy") and cfg.grid is None:
        raise ConfigError(f"command {cfg.command!r} needs a [grid] section")
    if cfg.command in ("solve", "homotopy", "barrier-check") and cfg.psi is None:
        raise ConfigError(f"command {cfg.command!r} needs a [psi] section")
    if cfg.command == "verify-concavity" and "field" not in cfg.verify:
        raise ConfigError("verify-concavity needs 'field' in [verify]")
    if cfg.command in ("homotopy", "barrier-check"):
        if "r1" not in cfg.verify:
            raise ConfigError(f"{cfg.command} needs 'r1' in [verify]")


def _operator(cfg):
    op = cfg.operator
    return OperatorSpec(op["n"], op["k"], tuple(op["alphas"]))


def _psi(cfg, op):
    p = dict(cfg.psi or {})
    family = p.pop("family", None)
    if family is None:
        raise ConfigError("missing 'family' in [psi]")
    if family == "manufactured-ellipsoid":
        return geomsolve.PsiSpec(family=family, axes=p.get("axes", (1.0, 1.0, 1.2)), op=op)
    return geomsolve.PsiSpec(family=family, **p)


def _echo(cfg):
    print(f"command      : {cfg.command}")
    print(f"seed         : {cfg.seed}")
    print(f"trials       : {cfg.trials}")
    print(f"output_dir   : {cfg.output_dir}")
    if cfg.operator:
        print(f"operator     : n={cfg.operator['n']} k={cfg.operator['k']} "
              f"alphas={','.join(str(a) for a in cfg.operator['alphas'])}")
    for name, sec in (("psi", cfg.psi), ("grid", cfg.grid), ("verify", cfg.verify)):
        if sec:
            print(f"{name:<13}: " + " ".join(f"{k}={v}" for k, v in sorted(sec.items())))


def _write_report_csv(out_dir, rows):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["property", "trials", "worst_value", "passed"])
        for prop, trials, worst, passed in rows:
            w.writerow([prop, trials, repr(float(worst)), str(bool(passed)).lower()])


def _write_witness(out_dir, payload):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "witness.json")

    def default(obj):
        if isinstance(obj, Fraction):
            return str(obj)
        if isinstance(obj, complex):
            return {"re": obj.real, "im": obj.imag}
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        return str(obj)

    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=default, sort_keys=True)
    return path


def _report_line(name, rep):
    tag = "PASS" if rep.passed else "FAIL"
    print(f"{name:<28} {tag}  trials={rep.trials:<8d} worst={rep.worst_value: .6e}")


def _field_from_config(cfg, op):
    kind = cfg.verify["field"]
    alpha = op.sum_type_alpha
    n, k = op.n, op.k
    if kind in ("quotient", "sigma-over-q", "sum-ratio", "sum-root") and alpha is None:
        raise ConfigError(f"field {kind!r} needs a sum-type operator")
    if kind == "quotient":
        return concave.quotient_qk_field(n, k - 1, float(alpha)) if k >= 2 else \
            concave.quotient_qk_field(n, k, float(alpha))
    if kind == "sigma-over-q":
        return concave.sigma_over_q_field(n, k, float(alpha))
    if kind == "sum-ratio":
        return concave.sum_ratio_field(n, k, cfg.verify.get("l", 1), float(alpha))
    if kind == "sum-root":
        return concave.sum_root_field(n, k, float(alpha))
    if kind == "root-q":
        return concave.root_q_field(op)
    if kind == "lower-quotient":
        rep = hypcheck.check_condition_c(op)
        if not rep.all_real:
            raise DomainError("operator fails the exact real-rootedness check")
        l = cfg.verify.get("l", 1)
        return concave.lower_quotient_field(op, lower_operator(op, rep.witness, l, rep.N))
    raise ConfigError(f"unknown field {kind!r}")


def execute(cfg):
    """Run the configured command; returns the process exit code."""
    _echo(cfg)
    out = cfg.output_dir
    op = _operator(cfg)
    rows = []

    if cfg.command == "check-condition-c":
        rep = hypcheck.check_condition_c(op)
        print(f"alpha' = ({', '.join(str(a) for a in rep.alphas_prime)})")
        print(str(rep))
        rows.append(("condition-c", 1, 0.0 if rep.all_real else -1.0, rep.all_real))
        _write_report_csv(out, rows)
        if not rep.all_real:
            _write_witness(out, {
                "command": cfg.command,
                "operator": {"n": op.n, "k": op.k, "alphas": [str(a) for a in op.alphas]},
                "complex_roots": list(rep.failure_witness),
            })
            return 1
        return 0

    if cfg.command == "check-condition-q":
        c_rep = hypcheck.check_condition_c(op)
        if not c_rep.all_real:
            print(str(c_rep))
            rows.append(("condition-c", 1, -1.0, False))
            _write_report_csv(out, rows)
            _write_witness(out, {
                "command": cfg.command,
                "operator": {"n": op.n, "k": op.k, "alphas": [str(a) for a in op.alphas]},
                "complex_roots": list(c_rep.failure_witness),
            })
            return 1
        rep = hypcheck.check_condition_q(op, cfg.trials, cfg.seed,
                                         hessian_trials=cfg.verify.get("hessian_trials"))
        _report_line("condition-q", rep)
        rows.append(("condition-q", rep.trials, rep.worst_value, rep.passed))
        _write_report_csv(out, rows)
        if not rep.passed:
            _write_witness(out, {"command": cfg.command, "witness": rep.witness,
                                 "operator": {"n": op.n, "k": op.k,
                                              "alphas": [str(a) for a in op.alphas]}})
            return 1
        return 0

    if cfg.command == "check-cone":
        kind = cfg.verify.get("cone", "tilde")
        alpha = float(op.sum_type_alpha or 0.0)
        spec = ConeSpec(kind, op.n, op.k, alpha)
        conv = segment_convexity_check(spec, cfg.trials, cfg.seed)
        elli = ellipticity_scan(op, spec, cfg.trials, cfg.seed)
        _report_line("cone-convexity", conv)
        _report_line("ellipticity", elli)
        rows.append(("cone-convexity", conv.trials, conv.worst_value, conv.passed))
        rows.append(("ellipticity", elli.trials, elli.worst_value, elli.passed))
        _write_report_csv(out, rows)
        if not (conv.passed and elli.passed):
            bad = conv if not conv.passed else elli
            _write_witness(out, {"command": cfg.command, "witness": bad.witness,
                                 "extra": bad.witness_extra})
            return 1
        return 0

    if cfg.command == "verify-concavity":
        fld = _field_from_config(cfg, op)
        rep = concave.concavity_scan(fld, cfg.trials, cfg.seed,
                                     hessian_trials=cfg.verify.get("hessian_trials"))
        _report_line(fld.name, rep)
        rows.append((f"concavity:{fld.name}", rep.trials, rep.worst_value, rep.passed))
        _write_report_csv(out, rows)
        if not rep.passed:
            _write_witness(out, {"command": cfg.command, "field": fld.name,
                                 "witness": rep.witness, "extra": rep.witness_extra,
                                 "hessian_witness": rep.details.get("hessian_witness")})
            return 1
        return 0

    if cfg.command == "verify-guan":
        c_rep = hypcheck.check_condition_c(op)
        if not c_rep.all_real:
            print(str(c_rep))
            _write_report_csv(out, [("condition-c", 1, -1.0, False)])
            return 1
        l = cfg.verify.get("l", op.k - 1)
        s_l = lower_operator(op, c_rep.witness, l, c_rep.N)
        rep = concave.guan_scan(op, s_l, cfg.trials, cfg.seed,
                                delta=cfg.verify.get("delta", 1.0))
        _report_line(f"guan-inequality l={l}", rep)
        rows.append((f"guan-inequality:l={l}", rep.trials, rep.worst_value, rep.passed))
        _write_report_csv(out, rows)
        if not rep.passed:
            _write_witness(out, {"command": cfg.command, "witness": rep.witness,
                                 "extra": rep.witness_extra})
            return 1
        return 0

    psi = _psi(cfg, op)

    if cfg.command == "barrier-check":
        rep = geomsolve.barrier_check(psi, op, cfg.verify["r1"], cfg.verify.get("r2"))
        _report_line("barrier", rep)
        rows.append(("barrier", rep.trials, rep.worst_value, rep.passed))
        _write_report_csv(out, rows)
        if not rep.passed:
            _write_witness(out, {"command": cfg.command, "witness": rep.witness,
                                 "details": rep.details})
            return 1
        return 0

    grid = geomsolve.SphereGrid(cfg.grid["n_lon"], cfg.grid["n_lat"])
    opts = geomsolve.SolveOptions(tol=cfg.tol)

    if cfg.command == "solve":
        rho0 = cfg.verify.get("init_rho", 1.0)
        noise = cfg.verify.get("init_noise", 0.0)
        if noise:
            initial = geomsolve.perturbed_sphere(grid, rho0, noise, cfg.seed)
        else:
            initial = geomsolve.RadialSurfaceField.sphere(grid, rho0)
        try:
            surface, diag = geomsolve.newton_solve(initial, op, psi, opts)
        except (ConvergenceError, SymcurvError) as exc:
            print(f"solve failed: {exc}")
            rows.append(("solve", 0, -1.0, False))
            _write_report_csv(out, rows)
            _write_witness(out, {"command": cfg.command, "error": str(exc),
                                 "operator": {"n": op.n, "k": op.k,
                                              "alphas": [str(a) for a in op.alphas]},
                                 "psi": cfg.psi, "grid": cfg.grid,
                                 "seed": cfg.seed, "verify": cfg.verify})
            return 1
        res_norm = diag.iterations[-1][0]
        print(f"converged in {diag.n_iter - 1} iterations, residual {res_norm:.3e}")
        os.makedirs(out, exist_ok=True)
        geomsolve.write_solution_csv(os.path.join(out, "solution.csv"), surface, op, psi)
        record = geomsolve.curvature_monitor(surface)
        print(f"max kappa1 = {record['max_kappa1']:.6f}  min support = "
              f"{record['min_support']:.6f}  convex = {record['is_convex']}")
        rows.append(("solve", diag.n_iter, res_norm, True))
        _write_report_csv(out, rows)
        return 0

    if cfg.command == "homotopy":
        r1, r2 = cfg.verify["r1"], cfg.verify.get("r2")
        if r2 is None:
            raise ConfigError("homotopy needs 'r2' in [verify]")
        barrier = geomsolve.barrier_check(psi, op, r1, r2)
        _report_line("barrier", barrier)
        rows.append(("barrier", barrier.trials, barrier.worst_value, barrier.passed))
        if not barrier.passed:
            _write_report_csv(out, rows)
            _write_witness(out, {"command": cfg.command, "witness": barrier.witness,
                                 "details": barrier.details})
            return 1
        steps = cfg.verify.get("steps", 20)
        h_eps = cfg.verify.get("homotopy_eps", 1e-2)
        try:
            path = geomsolve.homotopy_solve(op, psi, grid, r1, r2, steps=steps,
                                            eps=h_eps, opts=opts, check_barrier=False)
        except (ConvergenceError, SymcurvError) as exc:
            print(f"continuation failed: {exc}")
            rows.append(("homotopy", 0, -1.0, False))
            _write_report_csv(out, rows)
            _write_witness(out, {"command": cfg.command, "error": str(exc),
                                 "operator": {"n": op.n, "k": op.k,
                                              "alphas": [str(a) for a in op.alphas]},
                                 "psi": cfg.psi, "grid": cfg.grid,
                                 "seed": cfg.seed, "verify": cfg.verify})
            return 1
        _, summary = geomsolve.monitor_path(path)
        final_res = path.final_diagnostics.iterations[-1][0]
        print(f"continuation reached t=1 in {len(path.ts)} accepted steps; "
              f"final residual {final_res:.3e}")
        print(f"max-over-path kappa1 = {summary['max_kappa1']:.6f}  "
              f"min support = {summary['min_support']:.6f}")
        geomsolve.write_path_csv(out, path, op, psi, h_eps)
        rows.append(("homotopy", len(path.ts), final_res, True))
        _write_report_csv(out, rows)
        return 0

    raise ConfigError(f"unhandled command {cfg.command!r}")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="symcurv", description="run symcurv checks and solves from a config file"
    )
    parser.add_argument("config", help="path to an INI-style run configuration")
    parser.add_argument("--seed", type=int, help="override [run] seed")
    parser.add_argument("--trials", type=int, help="override [run] trials")
    parser.add_argument("--output", help="override [run] output_dir")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.trials is not None:
            cfg.trials = args.trials
        if args.output is not None:
            cfg.output_dir = args.output
        return execute(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SymcurvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
