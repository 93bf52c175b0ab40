"""Discrete Sobolev constants and the explicit admissibility thresholds.

S2 is the best constant of the discrete embedding |f|_2 <= S2 * |grad f|_2
over Dirichlet fields; it equals 1/sqrt(lambda_min) for the interior
Laplacian stencil and is computed by inverse power iteration.  S_p for
p > 2 is the supremum of |f|_p / |grad f|_2, estimated by projected
gradient ascent on the ratio (W-metric ascent direction, Armijo steps,
unit-W-norm projection) from several seeded restarts plus the S2
eigenfield as a warm start.

From the certified coefficient bounds rho0 <= phi <= rho1, the weight
norms and the two Sobolev constants, the scalar threshold chain is

    alpha0  = (2-q)(a+b) * max(|a|, |c|) / (q (a+b-2) |b|_inf S_ab^{a+b-q})
    C0      = S_ab^q max(|a|,|c|) alpha0^{(q-2)/(a+b-q)} / q
              + |b|_inf S_ab^{a+b} alpha0^{(a+b-2)/(a+b-q)} / (a+b)
    t       = ((lam+mu) * alpha0)^{1/(a+b-q)}        (the sphere radius)
    Lambda0 = [ (rho0/2 - S2(e1^2+e2^2)/2) / C0 ]^{(a+b-q)/(a+b-2)}
    m       = t^2 (rho0/2 - S2(e1^2+e2^2)/2 - C0 (lam+mu)^{(a+b-2)/(a+b-q)})
              / (2 max(S2/(2 e1^2), S2/(2 e2^2)))
    alpha   = max(S2/(2 e1^2), S2/(2 e2^2)) * m

where t minimizes f(t) = (lam+mu) S_ab^q max(|a|,|c|) t^{q-2}/q
+ |b|_inf S_ab^{a+b} t^{a+b-2}/(a+b) and f(t) = C0 (lam+mu)^{(a+b-2)/(a+b-q)}
at the minimum.  Admissibility: 0 < lam+mu < Lambda0 and
0 < |h1|_2^2 + |h2|_2^2 <= m.  On the sphere of radius t the energy is then
at least alpha > 0, which sphere_lower_bound_check samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energy import ProblemSpec, energy
from .grid import (FieldPair, Grid, interior_mask, laplacian_matrix,
                   laplacian_solver, norm_Lp, norm_W, random_field,
                   riesz_solve)
from .phi import certify
from .weights import check_hypotheses, sample_weights

__all__ = [
    "SobolevConstants",
    "ThresholdReport",
    "ThresholdError",
    "estimate_S2",
    "estimate_Sp",
    "threshold_formulas",
    "compute_thresholds",
    "sphere_lower_bound_check",
]


class ThresholdError(ValueError):
    """Inadmissible inputs for the threshold formulas."""


@dataclass
class SobolevConstants:
    S2: float
    S_ab: float
    restarts_used: int
    converged: bool

    def as_dict(self):
        return {"S2": self.S2, "S_ab": self.S_ab,
                "restarts_used": self.restarts_used,
                "converged": self.converged}


@dataclass
class ThresholdReport:
    eps1: float
    eps2: float
    C0: float
    alpha0: float
    t_lm: float
    Lambda0: float
    m_lm: float
    alpha_lm: float
    admissible_lm: bool
    admissible_h: bool

    def as_dict(self):
        return {"eps1": self.eps1, "eps2": self.eps2, "C0": self.C0,
                "alpha0": self.alpha0, "t_lm": self.t_lm,
                "Lambda0": self.Lambda0, "m_lm": self.m_lm,
                "alpha_lm": self.alpha_lm,
                "admissible_lm": self.admissible_lm,
                "admissible_h": self.admissible_h}


def estimate_S2(grid: Grid, tol: float = 1e-13, max_iters: int = 20000) -> float:
    """Best discrete constant of the L2 embedding via inverse power iteration."""
    L = laplacian_matrix(grid)
    lu = laplacian_solver(grid)
    x = np.ones(L.shape[0])
    x /= np.linalg.norm(x)
    lam_prev = np.inf
    for _ in range(max_iters):
        y = lu.solve(x)
        x = y / np.linalg.norm(y)
        lam = float(x @ (L @ x))
        if abs(lam - lam_prev) <= tol * abs(lam):
            return 1.0 / math.sqrt(lam)
        lam_prev = lam
    raise RuntimeError("inverse power iteration failed to converge")


def _ground_field(grid: Grid) -> np.ndarray:
    """Eigenfield belonging to the smallest Laplacian eigenvalue."""
    lu = laplacian_solver(grid)
    x = np.ones(laplacian_matrix(grid).shape[0])
    x /= np.linalg.norm(x)
    for _ in range(200):
        y = lu.solve(x)
        x = y / np.linalg.norm(y)
    out = np.zeros(grid.shape)
    out[interior_mask(grid)] = x
    return out


def _w_normalize(grid, f):
    n = norm_W(grid, FieldPair(f, np.zeros_like(f)))
    if n == 0:
        raise ValueError("cannot normalize the zero field")
    return f / n


def _ascend_ratio(grid, p, f0, max_iters=2000, tol=1e-12):
    """Maximize |f|_p over the unit W-sphere by projected gradient ascent."""
    vol = grid.cell_volume
    f = _w_normalize(grid, f0)
    val = norm_Lp(grid, f, p)
    eta = 1.0
    converged = False
    flat_hits = 0
    for _ in range(max_iters):
        # nodal gradient of the p-mass, lifted to the W metric
        gl = p * np.sign(f) * np.abs(f) ** (p - 1.0) * vol
        d = riesz_solve(grid, gl)
        # tangent projection on the unit sphere: <d, f>_W = gl . f
        d_t = d - float(np.sum(gl * f)) * f
        slope = float(np.sum(gl * d_t))
        if slope <= 0:
            converged = True
            break
        stepped = False
        while eta > 1e-16:
            trial = _w_normalize(grid, f + eta * d_t)
            tval = norm_Lp(grid, trial, p)
            if tval > val:
                tiny_gain = tval - val <= tol * max(val, 1.0)
                f, val = trial, tval
                eta *= 1.3
                stepped = True
                break
            eta *= 0.5
        if not stepped:
            converged = True
            break
        if tiny_gain:
            flat_hits += 1
            if flat_hits >= 3:
                converged = True
                break
        else:
            flat_hits = 0
    return val, converged


def estimate_Sp(grid: Grid, p: float, restarts: int = 8,
                seed: int = 7_654_321, max_iters: int = 2000) -> SobolevConstants:
    """Estimate the best constant of the L^p embedding, p >= 2.

    Returns the best ratio over all runs (a certified lower bound of the
    discrete supremum) plus a convergence flag.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    if grid.ndim == 3 and p >= 6.0:
        raise ValueError("p must stay below 2N/(N-2) = 6 when N = 3")
    S2 = estimate_S2(grid)
    best = 0.0
    all_ok = True
    warm = _ground_field(grid)
    starts = [warm]
    for i in range(restarts):
        starts.append(random_field(grid, seed + i, 1.0))
    for f0 in starts:
        val, ok = _ascend_ratio(grid, p, f0, max_iters=max_iters)
        best = max(best, val)
        all_ok = all_ok and ok
    return SobolevConstants(S2=S2, S_ab=best, restarts_used=restarts,
                            converged=all_ok)


# --------------------------------------------------------- scalar formulas


def threshold_formulas(q, ab, norm_ac, b_sup, S2, S_ab, rho0,
                       eps1, eps2, lam_plus_mu):
    """The scalar threshold chain; see the module docstring.

    Pure function of scalars so the formula identities can be tested
    without any grid.
    """
    if not (1.0 < q < 2.0 < ab):
        raise ThresholdError("need 1 < q < 2 < alpha+beta")
    if b_sup <= 0.0:
        raise ThresholdError(
            "sup|b| vanishes on the grid; the coupling threshold needs b != 0")
    if norm_ac <= 0.0:
        raise ThresholdError("max(|a|, |c|) norm must be positive")
    if eps1 <= 0 or eps2 <= 0 or eps1 ** 2 + eps2 ** 2 >= rho0 / S2:
        raise ThresholdError("need eps1, eps2 > 0 with eps1^2 + eps2^2 < rho0/S2")
    alpha0 = ((2.0 - q) * ab * norm_ac
              / (q * (ab - 2.0) * b_sup * S_ab ** (ab - q)))
    C0 = (S_ab ** q * norm_ac * alpha0 ** ((q - 2.0) / (ab - q)) / q
          + b_sup * S_ab ** ab * alpha0 ** ((ab - 2.0) / (ab - q)) / ab)
    gap = rho0 / 2.0 - S2 * (eps1 ** 2 + eps2 ** 2) / 2.0
    Lambda0 = (gap / C0) ** ((ab - q) / (ab - 2.0))
    if Lambda0 <= 0:
        raise ThresholdError("nonpositive admissibility window")
    t_lm = (lam_plus_mu * alpha0) ** (1.0 / (ab - q))
    K = max(S2 / (2.0 * eps1 ** 2), S2 / (2.0 * eps2 ** 2))
    m_lm = t_lm ** 2 * (gap - C0 * lam_plus_mu ** ((ab - 2.0) / (ab - q))) / (2.0 * K)
    alpha_lm = K * m_lm
    return {"alpha0": alpha0, "C0": C0, "gap": gap, "Lambda0": Lambda0,
            "t_lm": t_lm, "m_lm": m_lm, "alpha_lm": alpha_lm, "K": K}


def _symmetric_eps(rho0, S2):
    # spend half the budget eps1^2 + eps2^2 < rho0/S2 symmetrically
    e = math.sqrt(rho0 / (4.0 * S2))
    return e, e


def _golden_eps(rho0, S2, m_of_eps):
    """Golden-section search for the common eps maximizing m."""
    lo = 1e-9 * math.sqrt(rho0 / S2)
    hi = math.sqrt(rho0 / (2.0 * S2)) * (1.0 - 1e-12)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = m_of_eps(c), m_of_eps(d)
    for _ in range(200):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = m_of_eps(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = m_of_eps(d)
        if b - a <= 1e-14 * hi:
            break
    e = 0.5 * (a + b)
    return e, e


def _phi_envelope(ps: ProblemSpec):
    """min rho0 / max rho1 over the two coefficient families."""
    r1 = certify(ps.phi1, ps.ab_sum)
    r2 = certify(ps.phi2, ps.ab_sum)
    return min(r1.rho0, r2.rho0), max(r1.rho1, r2.rho1), (r1, r2)


def compute_thresholds(ps: ProblemSpec, grid: Grid, sc: SobolevConstants,
                       eps_policy: str = "symmetric") -> ThresholdReport:
    """Evaluate every explicit constant and the admissibility verdicts."""
    rho0, rho1, reports = _phi_envelope(ps)
    if rho0 <= 0:
        raise ThresholdError("coefficient lower bound rho0 is not positive")
    sw = sample_weights(ps.weights, grid)
    hyp = check_hypotheses(sw, grid, ps.q, ps.ab_sum)
    norm_ac = max(hyp.a_norm, hyp.c_norm)
    lam_plus_mu = ps.lam + ps.mu

    def run(eps1, eps2):
        return threshold_formulas(ps.q, ps.ab_sum, norm_ac, hyp.b_sup,
                                  sc.S2, sc.S_ab, rho0, eps1, eps2,
                                  lam_plus_mu)

    if eps_policy == "symmetric":
        eps1, eps2 = _symmetric_eps(rho0, sc.S2)
    elif eps_policy == "golden":
        def m_of(e):
            try:
                return run(e, e)["m_lm"]
            except ThresholdError:
                return -math.inf

        eps1, eps2 = _golden_eps(rho0, sc.S2, m_of)
    else:
        raise ValueError(f"unknown eps policy {eps_policy!r}")

    vals = run(eps1, eps2)
    h_norm_sq = hyp.h1_l2 ** 2 + hyp.h2_l2 ** 2
    admissible_lm = 0.0 < lam_plus_mu < vals["Lambda0"]
    admissible_h = 0.0 < h_norm_sq <= vals["m_lm"]
    return ThresholdReport(
        eps1=eps1, eps2=eps2, C0=vals["C0"], alpha0=vals["alpha0"],
        t_lm=vals["t_lm"], Lambda0=vals["Lambda0"], m_lm=vals["m_lm"],
        alpha_lm=vals["alpha_lm"], admissible_lm=admissible_lm,
        admissible_h=admissible_h,
    )


def sphere_lower_bound_check(ps: ProblemSpec, grid: Grid,
                             report: ThresholdReport, n_samples: int = 500,
                             seed: int = 0):
    """Sample random pairs on the sphere of radius t_lm and count violations
    of energy >= alpha_lm - 1e-10 (1 + alpha_lm).

    Returns (violations, checked, notice); the check is skipped (checked
    False) when the admissibility hypotheses fail.
    """
    if not report.admissible_lm:
        return 0, False, "skipped: lambda+mu outside (0, Lambda0)"
    if not report.admissible_h:
        return 0, False, "skipped: |h1|^2+|h2|^2 outside (0, m_lm]"
    floor = report.alpha_lm - 1e-10 * (1.0 + report.alpha_lm)
    violations = 0
    for i in range(n_samples):
        u = random_field(grid, seed + 2 * i, 1.0)
        v = random_field(grid, seed + 2 * i + 1, 1.0)
        z = FieldPair(u, v)
        n = norm_W(grid, z)
        if n == 0:
            continue
        s = report.t_lm / n
        z = FieldPair(u * s, v * s)
        if energy(ps, grid, z).total < floor:
            violations += 1
    return violations, True, "checked"
