"""Discrete energy functional, its exact gradient, and residual norms.

For a pair z = (u, v) on a Dirichlet grid the energy is the rectangle-rule
sum

    E(z) = sum vol * [ F1((u^2+|Du|^2)/2) + F2((v^2+|Dv|^2)/2) ]
         - (1/q)     sum vol * ( lam*a*|u|^q + mu*c*|v|^q )
         - (1/(a+b)) sum vol * b*|u|^alpha*|v|^beta
         - sum vol * ( h1*u + h2*v )

with D the forward-difference gradient and F1, F2 the normalized
antiderivatives of the coefficient families.  The gradient here is the
exact derivative of this discrete function with respect to the interior
nodal values (discretize-then-differentiate), scaled by 1/vol so that it
approximates the strong-form operator; its boundary entries are zero.
|u|^{q-2}u extends continuously by 0 at u = 0 since q > 1.

The reported residual is the discrete L2 norm of the scaled gradient,
|G|_2 * sqrt(vol); a gradient-metric (H^-1-type) variant obtained by one
Dirichlet-Laplacian solve is available separately.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import (FieldPair, Grid, assert_dirichlet, gradient_field,
                   riesz_solve, zero_boundary)
from .phi import Phi_eval, PhiSpec, phi_eval
from .weights import SampledWeights, WeightSet, sample_weights

__all__ = [
    "ProblemSpec",
    "EnergyBreakdown",
    "EnergyEvalError",
    "energy",
    "energy_gradient",
    "residual",
    "residual_dual",
    "gradient_check",
]


class EnergyEvalError(ArithmeticError):
    """Non-finite energy/gradient; message carries the offending node."""


@dataclass(frozen=True)
class ProblemSpec:
    """Full system data: parameters, exponents, coefficient families, weights."""

    lam: float
    mu: float
    q: float
    alpha: float
    beta: float
    phi1: PhiSpec
    phi2: PhiSpec
    weights: WeightSet

    def __post_init__(self):
        if self.lam <= 0 or self.mu <= 0:
            raise ValueError("lambda and mu must be positive")
        if not (1.0 < self.q < 2.0):
            raise ValueError("q must lie in (1, 2)")
        if self.alpha <= 1.0 or self.beta <= 1.0:
            raise ValueError("alpha and beta must exceed 1")
        if self.ab_sum <= 2.0:
            raise ValueError("alpha + beta must exceed 2")

    @property
    def ab_sum(self) -> float:
        return self.alpha + self.beta

    def validate_for_grid(self, grid: Grid) -> None:
        # the critical exponent only bites in three dimensions
        if grid.ndim == 3 and self.ab_sum >= 6.0:
            raise ValueError("alpha + beta must stay below 2N/(N-2) = 6 when N = 3")


@dataclass
class EnergyBreakdown:
    phi_term: float
    concave_term: float
    coupling_term: float
    forcing_term: float
    total: float

    def as_dict(self):
        return {"phi_term": self.phi_term, "concave_term": self.concave_term,
                "coupling_term": self.coupling_term,
                "forcing_term": self.forcing_term, "total": self.total}


@lru_cache(maxsize=32)
def _sampled(ps: ProblemSpec, grid: Grid) -> SampledWeights:
    return sample_weights(ps.weights, grid)


def _half_density(grid, f):
    gsq = np.zeros_like(f)
    for g in gradient_field(grid, f):
        gsq += g * g
    return 0.5 * (f * f + gsq), gsq


def _report_nonfinite(grid, arrays):
    stacked = sum(arrays)
    bad = ~np.isfinite(stacked)
    if np.any(bad):
        where = np.unravel_index(int(np.argmax(bad)), grid.shape)
        point = tuple(float(grid.axis_coords(k)[i]) for k, i in enumerate(where))
        raise EnergyEvalError(f"non-finite energy contribution at node {point}")


def energy(ps: ProblemSpec, grid: Grid, z: FieldPair) -> EnergyBreakdown:
    """Evaluate the discrete energy, returning the four-term breakdown."""
    sw = _sampled(ps, grid)
    vol = grid.cell_volume
    su, _ = _half_density(grid, z.u)
    sv, _ = _half_density(grid, z.v)
    phi_density = Phi_eval(ps.phi1, su) + Phi_eval(ps.phi2, sv)
    au = np.abs(z.u)
    av = np.abs(z.v)
    concave_density = ps.lam * sw.a * au ** ps.q + ps.mu * sw.c * av ** ps.q
    coupling_density = sw.b * au ** ps.alpha * av ** ps.beta
    forcing_density = sw.h1 * z.u + sw.h2 * z.v

    phi_term = float(np.sum(phi_density) * vol)
    concave_term = float(np.sum(concave_density) * vol / ps.q)
    coupling_term = float(np.sum(coupling_density) * vol / ps.ab_sum)
    forcing_term = float(np.sum(forcing_density) * vol)
    total = phi_term - concave_term - coupling_term - forcing_term
    if not np.isfinite(total):
        _report_nonfinite(grid, [phi_density, concave_density,
                                 coupling_density, forcing_density])
    return EnergyBreakdown(phi_term, concave_term, coupling_term,
                           forcing_term, total)


def _odd_power(f, exponent):
    # sign(f) * |f|^exponent, continuous at 0 for exponent > 0
    return np.sign(f) * np.abs(f) ** exponent


def _component_gradient(grid, f, weight, lin_weight, lin_coeff, q_exp,
                        coupling, h):
    """Strong-form gradient of one component; see module docstring."""
    out = weight * f
    for k, (g, hk) in enumerate(zip(gradient_field(grid, f), grid.h)):
        t = weight * g
        shifted = np.zeros_like(t)
        src = [slice(None)] * f.ndim
        dst = [slice(None)] * f.ndim
        src[k] = slice(0, -1)
        dst[k] = slice(1, None)
        shifted[tuple(dst)] = t[tuple(src)]  # value at the lower neighbour
        out += (shifted - t) / hk
    out -= lin_coeff * lin_weight * _odd_power(f, q_exp)
    out -= coupling
    out -= h
    return zero_boundary(out)


def energy_gradient(ps: ProblemSpec, grid: Grid, z: FieldPair) -> FieldPair:
    """Exact gradient of the discrete energy, scaled to strong form.

    Entry (j) equals (dE/du_j)/vol; boundary entries are zero.
    """
    sw = _sampled(ps, grid)
    su, _ = _half_density(grid, z.u)
    sv, _ = _half_density(grid, z.v)
    w1 = phi_eval(ps.phi1, su)
    w2 = phi_eval(ps.phi2, sv)
    au = np.abs(z.u)
    av = np.abs(z.v)
    ab = ps.ab_sum
    coup_u = (ps.alpha / ab) * sw.b * _odd_power(z.u, ps.alpha - 1.0) * av ** ps.beta
    coup_v = (ps.beta / ab) * sw.b * au ** ps.alpha * _odd_power(z.v, ps.beta - 1.0)
    gu = _component_gradient(grid, z.u, w1, sw.a, ps.lam, ps.q - 1.0,
                             coup_u, sw.h1)
    gv = _component_gradient(grid, z.v, w2, sw.c, ps.mu, ps.q - 1.0,
                             coup_v, sw.h2)
    if not (np.all(np.isfinite(gu)) and np.all(np.isfinite(gv))):
        _report_nonfinite(grid, [gu, gv])
    return FieldPair(gu, gv)


def residual(ps: ProblemSpec, grid: Grid, z: FieldPair) -> float:
    """Discrete L2 norm of the strong-form gradient."""
    g = energy_gradient(ps, grid, z)
    sq = float(np.sum(g.u ** 2) + np.sum(g.v ** 2))
    return float(np.sqrt(sq * grid.cell_volume))


def residual_dual(ps: ProblemSpec, grid: Grid, z: FieldPair) -> float:
    """Gradient-metric residual: W-norm of the Riesz representative."""
    g = energy_gradient(ps, grid, z)
    vol = grid.cell_volume
    du = riesz_solve(grid, g.u * vol)
    dv = riesz_solve(grid, g.v * vol)
    val = float(np.sum(g.u * vol * du) + np.sum(g.v * vol * dv))
    return float(np.sqrt(max(val, 0.0)))


def gradient_check(ps: ProblemSpec, grid: Grid, z: FieldPair,
                   n_probes: int = 50, step: float = 1e-6,
                   seed: int = 0, corrupt: bool = False):
    """Central-difference check of the analytic gradient at random coordinates.

    Returns (max relative error, worst (component, node) tuple).  The
    relative error at a probe is |analytic - fd| / (1 + |analytic|) in
    strong-form units.  `corrupt` is a negative-control hook that biases the
    analytic value.
    """
    assert_dirichlet(z.u, "u")
    assert_dirichlet(z.v, "v")
    g = energy_gradient(ps, grid, z)
    vol = grid.cell_volume
    rng = np.random.default_rng(seed)
    interior = [k for k in np.ndindex(*grid.shape)
                if all(0 < i < n - 1 for i, n in zip(k, grid.shape))]
    worst = (0.0, None)
    for _ in range(n_probes):
        comp = int(rng.integers(0, 2))
        node = interior[int(rng.integers(0, len(interior)))]
        f = z.u if comp == 0 else z.v
        saved = f[node]
        f[node] = saved + step
        e_plus = energy(ps, grid, z).total
        f[node] = saved - step
        e_minus = energy(ps, grid, z).total
        f[node] = saved
        fd = (e_plus - e_minus) / (2.0 * step) / vol
        analytic = (g.u if comp == 0 else g.v)[node]
        if corrupt:
            analytic = analytic + 1e-3 * (1.0 + abs(analytic))
        err = abs(analytic - fd) / (1.0 + abs(analytic))
        if err > worst[0]:
            worst = (err, ("u" if comp == 0 else "v", node))
    return worst
