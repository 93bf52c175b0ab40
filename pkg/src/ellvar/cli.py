"""Command-line interface: verification and solve pipeline.

    ellvar check-phi   --config PATH [--out DIR]           condition reports
    ellvar thresholds  --config PATH [--out DIR]           admissibility report
    ellvar solve       --config PATH [--out DIR] [--force] two-solution run
    ellvar sweep       --config PATH [--out DIR]           admissibility sweep
    ellvar gradcheck   --config PATH                       gradient self-check

Exit codes: 0 success, 2 configuration error, 3 hypothesis/admissibility
failure, 4 solver failure, 5 gradient-check failure.  All JSON reports
carry a provenance block (config hash, seed, grid shape, artifact version,
timestamp); reruns with identical config and seed are byte-identical up to
the timestamp.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import config as cfg_mod
from . import expr as ex
from .config import ConfigError
from .energy import ProblemSpec, gradient_check
from .grid import FieldPair, coordinate_arrays, norm_W, random_field
from .phi import certify, family_in_paper_range
from .pipeline import build_grid, phi_specs, resolve, solver_options
from .solvers import (HypothesisViolation, classify, endpoint_beyond_sphere,
                      minimize_on_ball, mountain_pass, seed_negative)
from .thresholds import ThresholdError, sphere_lower_bound_check

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3
EXIT_SOLVER = 4
EXIT_GRADCHECK = 5


def _provenance(config_text, seed, grid_shape, extra=None):
    block = {
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
        "seed": seed,
        "grid_shape": list(grid_shape),
        "artifact_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        block.update(extra)
    return block


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_fields_csv(path, grid, z: FieldPair):
    coords = coordinate_arrays(grid)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{k + 1}" for k in range(grid.ndim)] + ["u", "v"])
        flat = [c.ravel() for c in coords] + [z.u.ravel(), z.v.ravel()]
        for row in zip(*flat):
            writer.writerow([repr(float(v)) for v in row])


def _ensure_out(args):
    out = args.out
    os.makedirs(out, exist_ok=True)
    return out


def _load(args):
    with open(args.config, "r", encoding="utf-8") as fh:
        text = fh.read()
    return cfg_mod.loads(text), text


# ----------------------------------------------------------------- commands


def cmd_check_phi(args) -> int:
    cfg, text = _load(args)
    out = _ensure_out(args)
    grid = build_grid(cfg)
    ab = cfg.alpha + cfg.beta
    seed = args.seed if args.seed is not None else cfg.seed
    for label, spec in zip(("phi1", "phi2"), phi_specs(cfg)):
        report = certify(spec, ab)
        payload = report.as_dict()
        payload["family_id"] = spec.family_id
        payload["in_documented_range"] = family_in_paper_range(spec, ab)
        payload["provenance"] = _provenance(text, seed, grid.shape)
        path = os.path.join(out, f"{label}_conditions.json")
        _write_json(path, payload)
        flags = ", ".join(f"{k.split('_', 1)[1]}={'pass' if v else 'FAIL'}"
                          for k, v in payload.items() if k.startswith("pass_"))
        print(f"{label}: family {spec.family_id}: {flags} -> {path}")
    return EXIT_OK


def _threshold_payload(setup, text, seed):
    payload = setup.report.as_dict()
    payload["provenance"] = _provenance(text, seed, setup.grid.shape, extra={
        "lambda": setup.lam,
        "mu": setup.mu,
        "h_scale": setup.h_scale,
        "sobolev": setup.sc.as_dict(),
        "weight_norms": setup.hyp.as_dict(),
        "rho0": min(r.rho0 for r in setup.phi_reports),
        "rho1": max(r.rho1 for r in setup.phi_reports),
        "forced_violations": setup.forced_violations,
    })
    return payload


def cmd_thresholds(args) -> int:
    cfg, text = _load(args)
    out = _ensure_out(args)
    seed = args.seed if args.seed is not None else cfg.seed
    setup = resolve(cfg, force=args.force)
    path = os.path.join(out, "thresholds.json")
    _write_json(path, _threshold_payload(setup, text, seed))
    rep = setup.report
    print(f"Lambda0={rep.Lambda0:.6g} m_lm={rep.m_lm:.6g} t_lm={rep.t_lm:.6g} "
          f"admissible_lm={rep.admissible_lm} admissible_h={rep.admissible_h}")
    print(f"-> {path}")
    return EXIT_OK


def _solve_payload(result, cls, text, seed, grid, csv_name):
    return {
        "kind": result.kind,
        "energy": result.energy,
        "residual": result.residual,
        "residual_dual": result.residual_dual,
        "iterations": result.iterations,
        "converged": result.converged,
        "boundary_stall": result.boundary_stall,
        "geometry_violation": result.geometry_violation,
        "stall_reason": result.stall_reason,
        "norm_W": norm_W(grid, result.z),
        "classification": cls.as_dict(),
        "fields_csv": csv_name,
        "provenance": _provenance(text, seed, grid.shape),
    }


def _run_two_solutions(setup, opts):
    ps, grid, report = setup.ps, setup.grid, setup.report
    z0 = seed_negative(ps, grid, report)
    ball = minimize_on_ball(ps, grid, report, z0, opts)
    endpoint = endpoint_beyond_sphere(ps, grid, report)
    mp = mountain_pass(ps, grid, report, endpoint, opts)
    return ball, mp


def _summary_lines(entries, report, unverified):
    """entries: [(SolveResult, Classification, norm_W), ...]."""
    lines = []
    if unverified:
        lines.append("WARNING: hypotheses unverified (--force)")
    lines.append(f"sphere radius t_lm = {report.t_lm:.6g}, "
                 f"barrier alpha_lm = {report.alpha_lm:.6g}")
    header = (f"{'result':<16} {'energy':>14} {'residual':>11} "
              f"{'norm_W':>10} {'iters':>7} {'converged':>9}")
    lines.append(header)
    lines.append("-" * len(header))
    for r, c, nw in entries:
        lines.append(
            f"{r.kind:<16} {r.energy:>+14.6e} {r.residual:>11.3e} "
            f"{nw:>10.4g} {r.iterations:>7d} "
            f"{'yes' if r.converged else 'NO':>9}")
        lines.append(
            f"{'':<16} nontrivial={c.nontrivial} "
            f"non_semi_trivial={c.non_semi_trivial} "
            f"energy_sign={c.energy_sign:+d} inside_ball={c.inside_ball}")
    return lines


def cmd_solve(args) -> int:
    cfg, text = _load(args)
    out = _ensure_out(args)
    seed = args.seed if args.seed is not None else cfg.seed
    setup = resolve(cfg, force=args.force)
    rep = setup.report
    if not (rep.admissible_lm and rep.admissible_h):
        msg = (f"inadmissible configuration: lambda+mu in window: "
               f"{rep.admissible_lm}, forcing size in window: {rep.admissible_h}")
        if not args.force:
            print(msg, file=sys.stderr)
            return EXIT_HYPOTHESIS
        print(f"WARNING: {msg}; continuing under --force", file=sys.stderr)

    opts = solver_options(cfg, seed_override=args.seed)
    ball, mp = _run_two_solutions(setup, opts)
    ball_cls = classify(setup.ps, setup.grid, ball, rep)
    mp_cls = classify(setup.ps, setup.grid, mp, rep)

    _write_json(os.path.join(out, "thresholds.json"),
                _threshold_payload(setup, text, seed))
    for result, cls, stem in ((ball, ball_cls, "ball_minimizer"),
                              (mp, mp_cls, "mountain_pass")):
        _write_fields_csv(os.path.join(out, f"{stem}.csv"), setup.grid,
                          result.z)
        _write_json(os.path.join(out, f"{stem}.json"),
                    _solve_payload(result, cls, text, seed, setup.grid,
                                   f"{stem}.csv"))

    entries = [(ball, ball_cls, norm_W(setup.grid, ball.z)),
               (mp, mp_cls, norm_W(setup.grid, mp.z))]
    lines = _summary_lines(entries, rep,
                           unverified=bool(setup.forced_violations)
                           or not (rep.admissible_lm and rep.admissible_h))
    summary = "\n".join(lines) + "\n"
    with open(os.path.join(out, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(summary)
    print(summary, end="")

    if not (ball.converged and mp.converged):
        print("solver failed to converge: "
              f"ball={ball.converged} ({ball.stall_reason or 'budget'}), "
              f"mp={mp.converged} ({mp.stall_reason or 'budget'})",
              file=sys.stderr)
        return EXIT_SOLVER
    if mp.geometry_violation:
        print("geometry violation: the saddle search returned a nonpositive "
              "energy", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _sweep_point(cfg, param, value, seed, index):
    row = {"param": param, "value": value}
    try:
        kwargs = {param: value}
        setup = resolve(cfg, **kwargs)
        rep = setup.report
        row.update(Lambda0=rep.Lambda0, m_lm=rep.m_lm, lam=setup.lam,
                   mu=setup.mu, admissible=rep.admissible_lm and rep.admissible_h)
        if not row["admissible"]:
            row["note"] = "inadmissible; solvers skipped"
            return row
        opts = solver_options(cfg, seed_override=seed + index)
        ball, mp = _run_two_solutions(setup, opts)
        row.update(ball_energy=ball.energy, ball_residual=ball.residual,
                   ball_converged=ball.converged, mp_energy=mp.energy,
                   mp_residual=mp.residual, mp_converged=mp.converged)
    except (HypothesisViolation, ThresholdError, RuntimeError,
            ValueError) as err:
        row["note"] = f"error: {err}"
    return row


_SWEEP_COLUMNS = ["param", "value", "lam", "mu", "Lambda0", "m_lm",
                  "admissible", "ball_energy", "ball_residual",
                  "ball_converged", "mp_energy", "mp_residual",
                  "mp_converged", "note"]


def cmd_sweep(args) -> int:
    cfg, text = _load(args)
    out = _ensure_out(args)
    if cfg.sweep_param is None:
        print("config error: sweep.param is not set", file=sys.stderr)
        return EXIT_CONFIG
    seed = args.seed if args.seed is not None else cfg.seed
    values = list(cfg.sweep_values)
    rows = []
    if values:
        with ThreadPoolExecutor(max_workers=min(4, len(values))) as pool:
            futures = [pool.submit(_sweep_point, cfg, cfg.sweep_param, v,
                                   seed, i) for i, v in enumerate(values)]
            rows = [f.result() for f in futures]
    path = os.path.join(out, "sweep.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=_SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in _SWEEP_COLUMNS})
    print(f"{len(rows)} sweep point(s) -> {path}")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    cfg, _text = _load(args)
    grid = build_grid(cfg)
    p1, p2 = phi_specs(cfg)
    lam = cfg.lam if cfg.lam is not None else 1.0
    mu = cfg.mu if cfg.mu is not None else 1.0
    from .weights import WeightSet

    ps = ProblemSpec(lam=lam, mu=mu, q=cfg.q, alpha=cfg.alpha, beta=cfg.beta,
                     phi1=p1, phi2=p2,
                     weights=WeightSet.from_strings(cfg.w_a, cfg.w_b, cfg.w_c,
                                                    cfg.w_h1, cfg.w_h2))
    seed = args.seed if args.seed is not None else cfg.seed
    z = FieldPair(random_field(grid, seed + 11, 0.5),
                  random_field(grid, seed + 12, 0.5))
    corrupt = os.environ.get("ELLVAR_CORRUPT_GRADCHECK", "") == "1"
    err, worst = gradient_check(ps, grid, z, n_probes=50, step=1e-6,
                                seed=seed, corrupt=corrupt)
    print(f"max relative gradient error over 50 probes: {err:.3e}")
    if err > 1e-5:
        comp, node = worst
        coords = tuple(float(grid.axis_coords(k)[i])
                       for k, i in enumerate(node))
        print(f"worst probe: component {comp} at node {coords}",
              file=sys.stderr)
        return EXIT_GRADCHECK
    return EXIT_OK


# --------------------------------------------------------------- dispatcher


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ellvar",
        description="Variational verification and two-solution solver for a "
                    "quasilinear elliptic system with concave-convex terms")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("check-phi", cmd_check_phi),
                     ("thresholds", cmd_thresholds),
                     ("solve", cmd_solve),
                     ("sweep", cmd_sweep),
                     ("gradcheck", cmd_gradcheck)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="configuration file")
        p.add_argument("--force", action="store_true",
                       help="run even when hypotheses fail (stamped in output)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override solver.seed")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ex.ParseError, ex.ExprEvalError, OSError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (HypothesisViolation, ThresholdError) as err:
        print(f"hypothesis failure: {err}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except RuntimeError as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return EXIT_SOLVER


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
