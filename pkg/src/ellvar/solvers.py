"""Locating the two critical pairs: a negative-energy minimizer inside the
admissibility ball and a positive-energy saddle across the energy barrier.

All descent directions are gradient-metric (Dirichlet-Laplacian
preconditioned) representatives of the exact discrete gradient, stepped
with Armijo backtracking; iteration counts stay essentially mesh
independent that way.  The ball constraint |z|_W <= t_lm is enforced by
radial rescaling (the norm ball is convex, radial projection is exact).

The saddle search has two phases.  Phase 1 is path deformation: the
segment from (0,0) to a negative-energy endpoint beyond the sphere is
discretized, the maximal-energy state takes a backtracked descent step,
and the path is re-interpolated to keep states roughly equi-spaced in
norm (re-interpolation is skipped whenever it would raise the path
maximum, so the recorded sequence of path-maximum energies never
increases).  The discrete path max brackets the saddle but its residual
floor scales with the state spacing, so phase 2 polishes it: with the
crossing direction e frozen, Armijo descent runs on the reduced peak
functional F(y) = max_t E(y + t e), evaluated by bracketed scalar
maximization.  F's critical points carry zero full gradient (the
tangential component vanishes at the inner maximum, the transversal one
at convergence), so the residual can be driven to the stated tolerance
with first-order information only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .energy import ProblemSpec, energy, energy_gradient, residual, residual_dual
from .grid import (FieldPair, Grid, assert_dirichlet, grad_sq, norm_Lp,
                   norm_W, random_field, riesz_solve, zero_boundary)
from .phi import phi_eval
from .thresholds import ThresholdReport
from .weights import positive_cell_mask, sample_weights

__all__ = [
    "SolverOptions",
    "Classification",
    "SolveResult",
    "HypothesisViolation",
    "seed_negative",
    "minimize_on_ball",
    "endpoint_beyond_sphere",
    "mountain_pass",
    "classify",
]

_ARMIJO_C1 = 1e-4


class HypothesisViolation(RuntimeError):
    """A standing hypothesis fails on the grid (named in the message)."""


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 20000
    step0: float = 1.0
    residual_tol: float = 1e-8
    path_points: int = 41
    backtracking: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.max_iters <= 0 or self.step0 <= 0 or self.residual_tol <= 0:
            raise ValueError("max_iters, step0 and residual_tol must be positive")
        if self.path_points < 3:
            raise ValueError("path_points must be at least 3")
        if not (0.0 < self.backtracking < 1.0):
            raise ValueError("backtracking factor must lie in (0, 1)")


@dataclass
class Classification:
    nontrivial: bool
    non_semi_trivial: bool
    energy_sign: int
    inside_ball: bool
    rr1: float
    rr1_v: float

    def as_dict(self):
        return {"nontrivial": self.nontrivial,
                "non_semi_trivial": self.non_semi_trivial,
                "energy_sign": self.energy_sign,
                "inside_ball": self.inside_ball,
                "rr1": self.rr1, "rr1_v": self.rr1_v}


@dataclass
class SolveResult:
    z: FieldPair
    energy: float
    residual: float
    residual_dual: float
    iterations: int
    kind: str
    converged: bool
    classification: Classification | None = None
    boundary_stall: bool = False
    geometry_violation: bool = False
    stall_reason: str = ""
    energy_history: list = field(default_factory=list)
    peak_history: list = field(default_factory=list)


# ------------------------------------------------------------- pair helpers


def _axpy(a, x: FieldPair, y: FieldPair) -> FieldPair:
    return FieldPair(y.u + a * x.u, y.v + a * x.v)


def _scale(a, x: FieldPair) -> FieldPair:
    return FieldPair(a * x.u, a * x.v)


def _dot(x: FieldPair, y: FieldPair) -> float:
    return float(np.sum(x.u * y.u) + np.sum(x.v * y.v))


def _riesz_pair(grid: Grid, g: FieldPair) -> FieldPair:
    vol = grid.cell_volume
    return FieldPair(riesz_solve(grid, g.u * vol), riesz_solve(grid, g.v * vol))


def _e_total(ps, grid, z):
    return energy(ps, grid, z).total


# ------------------------------------------------------------ seed/endpoint


def _jacobi_smooth(grid: Grid, f: np.ndarray, sweeps: int = 2) -> np.ndarray:
    """Damped neighbour-averaging sweeps with Dirichlet extension.

    The sweep operator (I + neighbour-average)/2 is symmetric positive
    definite on the interior, so pairing the smoothed field against the
    original stays strictly positive for nonzero input.
    """
    out = zero_boundary(f)
    for _ in range(sweeps):
        acc = np.zeros_like(out)
        for k in range(out.ndim):
            for shift in (1, -1):
                moved = np.zeros_like(out)
                src = [slice(None)] * out.ndim
                dst = [slice(None)] * out.ndim
                if shift == 1:
                    src[k], dst[k] = slice(1, None), slice(0, -1)
                else:
                    src[k], dst[k] = slice(0, -1), slice(1, None)
                moved[tuple(dst)] = out[tuple(src)]
                acc += moved
        out = 0.5 * out + 0.5 * acc / (2.0 * out.ndim)
        out = zero_boundary(out)
    return out


def seed_negative(ps: ProblemSpec, grid: Grid,
                  report: ThresholdReport) -> FieldPair:
    """A pair with negative energy strictly inside the admissibility ball.

    The forcings themselves (boundary zeroed, two smoothing sweeps) give
    trial directions whose forcing pairing is strictly positive, so the
    energy along t*(f1, f2) dips below zero for small t; a scan plus local
    refinement returns the most negative point found.
    """
    sw = sample_weights(ps.weights, grid)
    if not np.any(zero_boundary(sw.h1)) or not np.any(zero_boundary(sw.h2)):
        raise HypothesisViolation(
            "(H) fails: a forcing vanishes at every interior node")
    direction = FieldPair(_jacobi_smooth(grid, sw.h1),
                          _jacobi_smooth(grid, sw.h2))
    dn = norm_W(grid, direction)
    t_max = 0.999 * report.t_lm / dn
    ts = np.logspace(-8, 0, 160) * t_max
    vals = np.array([_e_total(ps, grid, _scale(t, direction)) for t in ts])
    i = int(np.argmin(vals))
    lo = ts[max(i - 1, 0)]
    hi = ts[min(i + 1, len(ts) - 1)]
    res = minimize_scalar(lambda t: _e_total(ps, grid, _scale(t, direction)),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12 * t_max})
    best_t, best_e = float(res.x), float(res.fun)
    if vals[i] < best_e:
        best_t, best_e = float(ts[i]), float(vals[i])
    if best_e >= 0.0:
        raise RuntimeError("no negative-energy seed found along the forcing "
                           "direction (unexpected under (H))")
    return _scale(best_t, direction)


def _largest_true_box(mask: np.ndarray):
    """Index extents (inclusive, per axis) of a large all-True cell box.

    Exact longest run in 1-D and exact maximal-area rectangle in 2-D; in
    3-D the largest inscribed cube (dynamic programming) greedily extended
    per axis.  Returns None when no cell is True.
    """
    nd = mask.ndim
    if not mask.any():
        return None
    if nd == 1:
        best_len = best_start = 0
        run = start = 0
        for i, v in enumerate(mask):
            if v:
                if run == 0:
                    start = i
                run += 1
                if run > best_len:
                    best_len, best_start = run, start
            else:
                run = 0
        return (best_start,), (best_start + best_len - 1,)
    if nd == 2:
        n0, n1 = mask.shape
        heights = np.zeros(n1, dtype=int)
        best_area, best_box = 0, None
        for i in range(n0):
            heights = np.where(mask[i], heights + 1, 0)
            stack = []
            for j in range(n1 + 1):
                h = int(heights[j]) if j < n1 else 0
                start = j
                while stack and stack[-1][1] >= h:
                    sj, sh = stack.pop()
                    area = sh * (j - sj)
                    if sh > 0 and area > best_area:
                        best_area = area
                        best_box = (i - sh + 1, i, sj, j - 1)
                    start = sj
                stack.append((start, h))
        i0, i1, j0, j1 = best_box
        return (i0, j0), (i1, j1)
    # 3-D: cube DP, then greedy growth
    dp = np.zeros(mask.shape, dtype=int)
    n0, n1, n2 = mask.shape
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                if not mask[i, j, k]:
                    continue
                if i == 0 or j == 0 or k == 0:
                    dp[i, j, k] = 1
                else:
                    dp[i, j, k] = 1 + min(
                        dp[i - 1, j, k], dp[i, j - 1, k], dp[i, j, k - 1],
                        dp[i - 1, j - 1, k], dp[i - 1, j, k - 1],
                        dp[i, j - 1, k - 1], dp[i - 1, j - 1, k - 1])
    pos = np.unravel_index(int(np.argmax(dp)), dp.shape)
    side = int(dp[pos])
    lo = [p - side + 1 for p in pos]
    hi = list(pos)
    grew = True
    while grew:
        grew = False
        for ax in range(3):
            for end, delta in ((0, -1), (1, +1)):
                trial_lo, trial_hi = lo.copy(), hi.copy()
                if end == 0:
                    trial_lo[ax] += delta
                else:
                    trial_hi[ax] += delta
                if trial_lo[ax] < 0 or trial_hi[ax] >= mask.shape[ax]:
                    continue
                sl = tuple(slice(a, b + 1) for a, b in zip(trial_lo, trial_hi))
                if mask[sl].all():
                    lo, hi = trial_lo, trial_hi
                    grew = True
    return tuple(lo), tuple(hi)


def _bump_pair(grid: Grid, cell_lo, cell_hi) -> FieldPair:
    """Tensor product of squared sines supported on a cell box."""
    profiles = []
    for k in range(grid.ndim):
        xs = grid.axis_coords(k)
        a = xs[cell_lo[k]]
        b = xs[cell_hi[k] + 1]
        w = np.sin(np.pi * (xs - a) / (b - a)) ** 2
        w[(xs < a) | (xs > b)] = 0.0
        profiles.append(w)
    bump = profiles[0]
    for w in profiles[1:]:
        bump = np.multiply.outer(bump, w)
    bump = zero_boundary(bump)
    return FieldPair(bump.copy(), bump.copy())


def endpoint_beyond_sphere(ps: ProblemSpec, grid: Grid,
                           report: ThresholdReport) -> FieldPair:
    """A pair beyond the sphere radius with negative energy.

    Both components share a smooth bump supported where the coupling
    weight is positive on a whole cell box, so the coupling integral is
    strictly positive and dominates for large amplitudes.
    """
    sw = sample_weights(ps.weights, grid)
    cells = positive_cell_mask(grid, sw.b)
    box = _largest_true_box(cells)
    if box is None:
        raise HypothesisViolation(
            "(B) fails: no grid cell has the coupling weight positive on "
            "all corners")
    bump = _bump_pair(grid, *box)
    t = 1.0
    for _ in range(60):
        z = _scale(t, bump)
        if norm_W(grid, z) > report.t_lm and _e_total(ps, grid, z) < 0.0:
            return z
        t *= 2.0
    raise RuntimeError(
        "energy did not turn negative within 60 doublings; the coupling "
        "integral over the positive cell box is too weak for this "
        "configuration")


# ---------------------------------------------------------- ball minimizer


def _project_ball(grid, z, radius):
    n = norm_W(grid, z)
    if n > radius:
        return _scale(radius / n, z), True
    return z, False


def minimize_on_ball(ps: ProblemSpec, grid: Grid, report: ThresholdReport,
                     z0: FieldPair, opts: SolverOptions) -> SolveResult:
    """Projected descent inside the closed ball of radius t_lm.

    Monotone Armijo steps along the gradient-metric descent direction;
    radial rescaling whenever a trial leaves the ball.  Terminates at the
    residual tolerance, iteration budget, or a backtracking stall.
    """
    radius = report.t_lm
    e0 = _e_total(ps, grid, z0)
    if e0 >= 0:
        raise ValueError("starting energy must be negative")
    if norm_W(grid, z0) > radius * (1 + 1e-12):
        raise ValueError("starting point must lie in the closed ball")

    for attempt in range(4):
        out = _descend(ps, grid, z0, opts, radius)
        if not out.boundary_stall:
            return out
        # perturb and retry: stay in the ball, keep the energy negative
        rng_seed = opts.seed + 1000 + attempt
        noise = FieldPair(random_field(grid, rng_seed, 1e-3),
                          random_field(grid, rng_seed + 1, 1e-3))
        trial = _axpy(1.0, noise, _scale(0.95, z0))
        trial, _ = _project_ball(grid, trial, radius)
        if _e_total(ps, grid, trial) < 0:
            z0 = trial
    return out


def _descend(ps, grid, z0, opts, radius):
    z = z0.copy()
    e_val = _e_total(ps, grid, z)
    history = [e_val]
    eta = opts.step0
    vol = grid.cell_volume
    stall = ""
    it = 0
    converged = False
    while it < opts.max_iters:
        G = energy_gradient(ps, grid, z)
        res = float(np.sqrt((np.sum(G.u ** 2) + np.sum(G.v ** 2)) * vol))
        if res <= opts.residual_tol:
            converged = True
            break
        it += 1
        g = _scale(vol, G)  # nodal partial derivatives
        d = _riesz_pair(grid, G)
        accepted = False
        while eta > 1e-18:
            trial = _axpy(-eta, d, z)
            trial, _ = _project_ball(grid, trial, radius)
            pred = _dot(g, FieldPair(z.u - trial.u, z.v - trial.v))
            e_trial = _e_total(ps, grid, trial)
            if pred > 0 and e_trial <= e_val - _ARMIJO_C1 * pred:
                z, e_val = trial, e_trial
                history.append(e_val)
                eta = min(eta * 2.0, 1e12)
                accepted = True
                break
            eta *= opts.backtracking
        if not accepted:
            stall = "backtracking exhausted without energy decrease"
            break
        assert_dirichlet(z.u, "u iterate")
        assert_dirichlet(z.v, "v iterate")
    G = energy_gradient(ps, grid, z)
    res = float(np.sqrt((np.sum(G.u ** 2) + np.sum(G.v ** 2)) * vol))
    on_boundary = norm_W(grid, z) >= radius * (1 - 1e-8)
    boundary_stall = bool(stall) and on_boundary and res > opts.residual_tol
    return SolveResult(
        z=z, energy=e_val, residual=res,
        residual_dual=residual_dual(ps, grid, z),
        iterations=it, kind="ball_minimizer",
        converged=converged, boundary_stall=boundary_stall,
        stall_reason=stall, energy_history=history,
    )


# ------------------------------------------------------------ mountain pass


def _path_interpolate(path, energies, grid, ps):
    """Re-sample the polyline so states are equi-spaced in the pair norm."""
    P = len(path)
    seg = [norm_W(grid, FieldPair(path[i + 1].u - path[i].u,
                                  path[i + 1].v - path[i].v))
           for i in range(P - 1)]
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total <= 0:
        return path, energies
    targets = np.linspace(0.0, total, P)
    new_path = [path[0]]
    j = 0
    for s in targets[1:-1]:
        while j < P - 2 and cum[j + 1] < s:
            j += 1
        theta = (s - cum[j]) / max(cum[j + 1] - cum[j], 1e-300)
        new_path.append(_axpy(theta, FieldPair(path[j + 1].u - path[j].u,
                                               path[j + 1].v - path[j].v),
                              path[j]))
    new_path.append(path[-1])
    new_e = np.array([energies[0]]
                     + [_e_total(ps, grid, z) for z in new_path[1:-1]]
                     + [energies[-1]])
    return new_path, new_e


def _local_peak_bracket(val, dt0, cap=1e12):
    """Bracket the local maximum of val nearest t = 0.

    Walks uphill (doubling steps) on the rising side until a decrease is
    seen, so the bracket never jumps across a valley to a different hump.
    Returns (lo, hi) with the interior maximum strictly inside.
    """
    f0 = val(0.0)
    fp, fm = val(dt0), val(-dt0)
    if fp <= f0 and fm <= f0:
        return -dt0, dt0
    sign = 1.0 if fp >= fm else -1.0
    a, b = 0.0, sign * dt0
    fb = fp if sign > 0 else fm
    step = sign * dt0
    for _ in range(200):
        step *= 2.0
        c = b + step
        if abs(c) > cap:
            break
        fc = val(c)
        if fc <= fb:
            return (min(a, c), max(a, c))
        a, b, fb = b, c, fc
    return (min(a, b), max(a, b))


def _peak_along(ps, grid, y, e_dir, dt0, xatol):
    """Locate the local maximum of t -> E(y + t e) nearest t = 0.

    A bounded scalar maximization finds the crest to xatol; the position is
    then polished by root-finding the analytic directional derivative, so
    the tangential gradient component vanishes to machine precision and the
    peak energy is crest-accurate (the value is stationary there).
    """

    def val(t):
        return _e_total(ps, grid, _axpy(t, e_dir, y))

    vol = grid.cell_volume

    def slope_at(t):
        G = energy_gradient(ps, grid, _axpy(t, e_dir, y))
        return _dot(_scale(vol, G), e_dir)

    lo, hi = _local_peak_bracket(val, dt0)
    width = max(hi - lo, 1e-300)
    res = minimize_scalar(lambda t: -val(t), bounds=(lo, hi),
                          method="bounded",
                          options={"xatol": max(xatol, 1e-6 * width)})
    t_star = float(res.x)
    w = max(1e-4 * width, 1e-13 * (1.0 + abs(t_star)))
    for _ in range(40):
        a, b = t_star - w, t_star + w
        pa, pb = slope_at(a), slope_at(b)
        if pa > 0.0 >= pb:
            t_star = float(brentq(slope_at, a, b, xtol=1e-14 * (1 + abs(t_star)),
                                  rtol=8.9e-16, maxiter=200))
            break
        w *= 4.0
        if w > width:
            break
    p = _axpy(t_star, e_dir, y)
    return t_star, p, _e_total(ps, grid, p)


def mountain_pass(ps: ProblemSpec, grid: Grid, report: ThresholdReport,
                  endpoint: FieldPair, opts: SolverOptions) -> SolveResult:
    """Path-deformation minimax followed by a reduced-peak polish."""
    P = opts.path_points
    zero = FieldPair(np.zeros(grid.shape), np.zeros(grid.shape))
    taus = np.linspace(0.0, 1.0, P)
    path = [_scale(t, endpoint) for t in taus]
    path[0] = zero
    energies = np.array([_e_total(ps, grid, z) for z in path])
    vol = grid.cell_volume
    tol = opts.residual_tol

    max_history = []
    eta = opts.step0
    it = 0
    budget1 = int(min(max(100, opts.max_iters // 20), 1000))
    plateau_window = 40

    def path_residual(z):
        G = energy_gradient(ps, grid, z)
        return G, float(np.sqrt((np.sum(G.u ** 2) + np.sum(G.v ** 2)) * vol))

    converged = False
    m = int(np.argmax(energies))
    while it < budget1:
        m = int(np.argmax(energies))
        if m in (0, P - 1):
            break
        G, res = path_residual(path[m])
        if res <= tol:
            converged = True
            break
        it += 1
        # descend the current maximum until it is dethroned (a few steps);
        # displacement stays below half the local segment length so a state
        # cannot be flung down the unbounded far side of the barrier
        seg_len = min(
            norm_W(grid, FieldPair(path[m].u - path[m - 1].u,
                                   path[m].v - path[m - 1].v)),
            norm_W(grid, FieldPair(path[m + 1].u - path[m].u,
                                   path[m + 1].v - path[m].v)))
        for _ in range(8):
            g = _scale(vol, G)
            d = _riesz_pair(grid, G)
            slope = _dot(g, d)
            d_norm = np.sqrt(max(_dot(g, d), 1e-300))  # = |d|_W
            eta = min(eta, 0.5 * seg_len / max(d_norm, 1e-300))
            accepted = False
            while eta > 1e-18:
                trial = _axpy(-eta, d, path[m])
                e_trial = _e_total(ps, grid, trial)
                if e_trial <= energies[m] - _ARMIJO_C1 * eta * slope:
                    path[m] = trial
                    energies[m] = e_trial
                    eta = min(eta * 2.0, 1e12)
                    accepted = True
                    break
                eta *= opts.backtracking
            if not accepted or int(np.argmax(energies)) != m:
                break
            G, res = path_residual(path[m])
            if res <= tol:
                break
        max_history.append(float(np.max(energies)))
        # keep states roughly equi-spaced, but never raise the path max
        if it % 10 == 0:
            new_path, new_e = _path_interpolate(path, energies, grid, ps)
            guard = max_history[-1] + 1e-12 * (1 + abs(max_history[-1]))
            if float(np.max(new_e)) <= guard:
                path, energies = new_path, new_e
        if (len(max_history) > plateau_window
                and max_history[-plateau_window] - max_history[-1]
                <= 1e-9 * (1.0 + abs(max_history[-1]))):
            break

    m = int(np.argmax(energies))
    best = path[m]
    if converged:
        return _finish_mp(ps, grid, best, it, True, max_history, [])

    # phase 2: reduced-peak descent along the frozen crossing direction;
    # if the deformed path degenerated (max at an endpoint), restart the
    # bracket from the original segment discretization
    if m in (0, P - 1):
        path = [_scale(t, endpoint) for t in taus]
        path[0] = zero
        energies = np.array([_e_total(ps, grid, z) for z in path])
        m = int(np.argmax(energies))
        best = path[m]
    lo_n, hi_n = max(m - 1, 0), min(m + 1, P - 1)
    tangent = FieldPair(path[hi_n].u - path[lo_n].u, path[hi_n].v - path[lo_n].v)
    tn = norm_W(grid, tangent)
    if tn == 0:
        return _finish_mp(ps, grid, best, it, False, max_history, [],
                          stall="degenerate path tangent")
    e_dir = _scale(1.0 / tn, tangent)
    seg = tn / max(hi_n - lo_n, 1)

    xatol = 1e-9 * max(seg, 1.0)
    dt0 = 0.25 * seg
    t_star, peak, f_val = _peak_along(ps, grid, best, e_dir, dt0, xatol)
    peak_history = [f_val]
    eta = opts.step0
    stalls = 0
    G, res = path_residual(peak)
    while it < opts.max_iters:
        if res <= tol:
            converged = True
            break
        it += 1
        g = _scale(vol, G)
        ge = _dot(g, e_dir)
        d = _riesz_pair(grid, G)
        d_perp = _axpy(-ge, e_dir, d)
        slope = _dot(g, d_perp)
        dt_trial = max(8.0 * xatol, min(0.25 * seg, 4.0 * abs(t_star) + 8.0 * xatol))
        noise = 64.0 * np.finfo(float).eps * (1.0 + abs(f_val))
        accepted = False
        if slope <= 0:
            stalls += 1
        elif _ARMIJO_C1 * eta * slope > noise:
            # sufficient-decrease steps on the reduced peak functional
            while eta > 1e-18:
                y_trial = _axpy(-eta, d_perp, peak)
                t_new, peak_new, f_new = _peak_along(
                    ps, grid, y_trial, e_dir, dt_trial, xatol)
                if f_new <= f_val - _ARMIJO_C1 * eta * slope:
                    peak, f_val, t_star = peak_new, f_new, t_new
                    peak_history.append(f_val)
                    G, res = path_residual(peak)
                    eta = min(eta * 2.0, 1e12)
                    accepted = True
                    break
                eta *= opts.backtracking
            if not accepted:
                stalls += 1
                eta = opts.step0
        else:
            # predicted decrease is below the float noise of the energy
            # value: accept on residual decrease instead (still first order)
            while eta > 1e-18:
                y_trial = _axpy(-eta, d_perp, peak)
                t_new, peak_new, f_new = _peak_along(
                    ps, grid, y_trial, e_dir, dt_trial, xatol)
                if f_new > f_val + 16.0 * noise:
                    eta *= opts.backtracking
                    continue
                G_new, res_new = path_residual(peak_new)
                if res_new < res:
                    peak, f_val, t_star = peak_new, f_new, t_new
                    peak_history.append(f_val)
                    G, res = G_new, res_new
                    eta = min(eta * 1.5, 1e12)
                    accepted = True
                    break
                eta *= opts.backtracking
            if not accepted:
                stalls += 1
                eta = opts.step0
        if accepted:
            stalls = 0
        elif stalls >= 8:
            return _finish_mp(ps, grid, peak, it, False, max_history,
                              peak_history,
                              stall="reduced-peak descent stalled")
    return _finish_mp(ps, grid, peak, it, converged, max_history, peak_history)


def _finish_mp(ps, grid, z, iterations, converged, max_history, peak_history,
               stall=""):
    e_val = _e_total(ps, grid, z)
    return SolveResult(
        z=z, energy=e_val, residual=residual(ps, grid, z),
        residual_dual=residual_dual(ps, grid, z),
        iterations=iterations, kind="mountain_pass", converged=converged,
        geometry_violation=e_val <= 0.0,
        stall_reason=stall, energy_history=list(max_history),
        peak_history=list(peak_history),
    )


# ------------------------------------------------------------ classification


def classify(ps: ProblemSpec, grid: Grid, result: SolveResult,
             report: ThresholdReport) -> Classification:
    """Triviality/semi-triviality verdicts plus the exclusion scalars.

    rr1 (and rr1_v for the second component) is the pairing that must
    vanish if a critical pair had a zero component; a strictly positive
    value certifies that no critical pair of this energy level can be
    semi-trivial in that component.
    """
    z = result.z
    floor = 1e-8 * report.t_lm
    n_w = norm_W(grid, z)
    nontrivial = n_w > floor
    u_l2 = norm_Lp(grid, z.u, 2.0)
    v_l2 = norm_Lp(grid, z.v, 2.0)
    non_semi = u_l2 > floor and v_l2 > floor
    if result.energy > 0:
        sign = 1
    elif result.energy < 0:
        sign = -1
    else:
        sign = 0
    sw = sample_weights(ps.weights, grid)

    def exclusion(f, weight, coeff, h, spec):
        dens = f * f + grad_sq(grid, f)
        return float(np.sum(
            phi_eval(spec, dens / 2.0) * dens
            - coeff * weight * np.abs(f) ** ps.q - h * f) * grid.cell_volume)

    return Classification(
        nontrivial=nontrivial,
        non_semi_trivial=non_semi,
        energy_sign=sign,
        inside_ball=n_w <= report.t_lm * (1 + 1e-12),
        rr1=exclusion(z.u, sw.a, ps.lam, sw.h1, ps.phi1),
        rr1_v=exclusion(z.v, sw.c, ps.mu, sw.h2, ps.phi2),
    )
