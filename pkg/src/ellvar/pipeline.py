"""From a validated configuration to a fully resolved, admissible problem.

Resolution order: build the grid, sample the weights and gate on the
standing hypotheses, certify both coefficient families, estimate the
Sobolev constants, resolve lambda/mu (fractional mode measures against the
window Lambda0, which does not depend on lambda or mu), then rescale the
forcings to the requested fraction of m and recompute the final threshold
report.  Fractional-mode resolution always measures Lambda0 with the
symmetric eps choice; the configured eps policy is applied to the final
report (the golden policy never shrinks the window, so admissibility is
preserved).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import expr as ex
from .config import RunConfig
from .energy import ProblemSpec
from .grid import Grid
from .phi import ConditionReport, PhiSpec, certify
from .solvers import HypothesisViolation, SolverOptions
from .thresholds import (SobolevConstants, ThresholdReport, compute_thresholds,
                         estimate_Sp)
from .weights import HypothesisReport, WeightSet, check_hypotheses, sample_weights

__all__ = ["ResolvedSetup", "build_grid", "phi_specs", "solver_options",
           "resolve"]


@dataclass
class ResolvedSetup:
    grid: Grid
    ps: ProblemSpec
    hyp: HypothesisReport
    sc: SobolevConstants
    report: ThresholdReport
    phi_reports: tuple
    lam: float
    mu: float
    h_scale: float
    forced_violations: list


def build_grid(cfg: RunConfig) -> Grid:
    return Grid(lo=cfg.lo, hi=cfg.hi, shape=cfg.nodes)


def phi_specs(cfg: RunConfig):
    return (PhiSpec(cfg.phi1_family, cfg.phi1_A, cfg.phi1_p, cfg.phi1_r),
            PhiSpec(cfg.phi2_family, cfg.phi2_A, cfg.phi2_p, cfg.phi2_r))


def solver_options(cfg: RunConfig, seed_override=None) -> SolverOptions:
    return SolverOptions(
        max_iters=cfg.max_iters, step0=cfg.step0,
        residual_tol=cfg.residual_tol, path_points=cfg.path_points,
        backtracking=cfg.backtracking,
        seed=cfg.seed if seed_override is None else seed_override,
    )


def _weight_set(cfg: RunConfig, h_scale: float = 1.0) -> WeightSet:
    h1 = ex.parse(cfg.w_h1)
    h2 = ex.parse(cfg.w_h2)
    if h_scale != 1.0:
        h1 = ex.scale_expr(h1, h_scale)
        h2 = ex.scale_expr(h2, h_scale)
    return WeightSet(a=ex.parse(cfg.w_a), b=ex.parse(cfg.w_b),
                     c=ex.parse(cfg.w_c), h1=h1, h2=h2)


def _problem(cfg, lam, mu, h_scale):
    p1, p2 = phi_specs(cfg)
    return ProblemSpec(lam=lam, mu=mu, q=cfg.q, alpha=cfg.alpha,
                       beta=cfg.beta, phi1=p1, phi2=p2,
                       weights=_weight_set(cfg, h_scale))


def resolve(cfg: RunConfig, force: bool = False,
            lambda_mu_fraction=None, h_fraction=None) -> ResolvedSetup:
    """Resolve a configuration; raises HypothesisViolation unless forced.

    lambda_mu_fraction/h_fraction override the configured fractions (used
    by parameter sweeps).
    """
    grid = build_grid(cfg)
    lm_frac = (cfg.lambda_mu_fraction if lambda_mu_fraction is None
               else lambda_mu_fraction)
    h_frac = cfg.h_fraction if h_fraction is None else h_fraction

    violations = []
    ws0 = _weight_set(cfg)
    sw = sample_weights(ws0, grid)
    ab = cfg.alpha + cfg.beta
    hyp = check_hypotheses(sw, grid, cfg.q, ab)
    if not hyp.B_ok:
        violations.append(
            "(B): the coupling weight b is not positive on any full grid cell")
    if not hyp.H_ok:
        violations.append("(H): a forcing has zero discrete L2 norm")

    p1, p2 = phi_specs(cfg)
    r1 = certify(p1, ab)
    r2 = certify(p2, ab)
    if min(r1.rho0, r2.rho0) <= 0:
        violations.append(
            "(phi1): the coefficient lower bound rho0 is not positive")
    if violations and not force:
        raise HypothesisViolation("; ".join(violations))

    sc = estimate_Sp(grid, ab, restarts=cfg.sp_restarts, seed=cfg.sp_seed)

    if lm_frac is not None:
        probe = _problem(cfg, 1.0, 1.0, 1.0)
        window = compute_thresholds(probe, grid, sc, eps_policy="symmetric")
        lam = mu = 0.5 * lm_frac * window.Lambda0
    else:
        lam, mu = cfg.lam, cfg.mu

    h_scale = 1.0
    if h_frac is not None:
        base = _problem(cfg, lam, mu, 1.0)
        rep = compute_thresholds(base, grid, sc, eps_policy=cfg.eps_policy)
        current = hyp.h1_l2 ** 2 + hyp.h2_l2 ** 2
        if current <= 0:
            if not force:
                raise HypothesisViolation(
                    "(H): cannot rescale identically-zero forcings")
        else:
            h_scale = (h_frac * rep.m_lm / current) ** 0.5

    ps = _problem(cfg, lam, mu, h_scale)
    ps.validate_for_grid(grid)
    report = compute_thresholds(ps, grid, sc, eps_policy=cfg.eps_policy)
    return ResolvedSetup(grid=grid, ps=ps, hyp=hyp, sc=sc, report=report,
                         phi_reports=(r1, r2), lam=lam, mu=mu,
                         h_scale=h_scale, forced_violations=violations)
