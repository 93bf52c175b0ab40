"""Weight and forcing fields over the grid, and the standing hypotheses.

The system data are five closed-form expressions: the concave-term weights
a and c (may change sign), the coupling weight b, and the forcings h1, h2.
check_hypotheses verifies their discrete admissibility:

  (B)  b is positive on at least one full grid cell (every corner of the
       cell strictly positive) -- the discrete stand-in for a nonempty open
       subdomain where b > 0;
  (H)  the discrete L2 norms of h1 and h2 are both positive;
  (A)  integrability of a and c is automatic for continuous expressions on
       a bounded box (every continuous function lies in every finite L^p
       there); the report records their discrete L^{(α+β)/(α+β-q)} norms
       and sign-change flags for information.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .grid import Grid, coordinate_arrays, norm_Linf, norm_Lp

__all__ = ["WeightSet", "SampledWeights", "HypothesisReport",
           "sample", "sample_weights", "check_hypotheses", "positive_cell_mask"]


@dataclass(frozen=True)
class WeightSet:
    """The five weight/forcing expressions (parsed ASTs)."""

    a: ex.Expr
    b: ex.Expr
    c: ex.Expr
    h1: ex.Expr
    h2: ex.Expr

    @staticmethod
    def from_strings(a, b, c, h1, h2):
        return WeightSet(ex.parse(a), ex.parse(b), ex.parse(c),
                         ex.parse(h1), ex.parse(h2))


@dataclass
class SampledWeights:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    h1: np.ndarray
    h2: np.ndarray


def sample(e: ex.Expr, grid: Grid) -> np.ndarray:
    """Evaluate an expression at every node (boundary included)."""
    coords = coordinate_arrays(grid)
    try:
        vals = ex.evaluate(e, coords)
    except ex.ExprEvalError as err:
        if err.bad_index is not None:
            where = np.unravel_index(err.bad_index, grid.shape)
            point = tuple(float(c[where]) for c in coords)
            raise ex.ExprEvalError(f"{err} at node {point}") from err
        raise
    return np.broadcast_to(vals, grid.shape).astype(float)


def sample_weights(ws: WeightSet, grid: Grid) -> SampledWeights:
    return SampledWeights(*(sample(getattr(ws, k), grid)
                            for k in ("a", "b", "c", "h1", "h2")))


def positive_cell_mask(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Cells (shape nodes-1 per axis) whose 2^N corners are all positive."""
    out = f > 0.0
    for k in range(grid.ndim):
        lo = [slice(None)] * grid.ndim
        hi = [slice(None)] * grid.ndim
        lo[k] = slice(0, -1)
        hi[k] = slice(1, None)
        out = out[tuple(lo)] & out[tuple(hi)]
    return out


@dataclass
class HypothesisReport:
    B_ok: bool
    H_ok: bool
    A_note: str
    a_norm: float
    c_norm: float
    b_sup: float
    h1_l2: float
    h2_l2: float
    a_sign_changing: bool
    b_sign_changing: bool
    c_sign_changing: bool
    positive_cell_count: int

    def as_dict(self):
        return {
            "B_ok": self.B_ok,
            "H_ok": self.H_ok,
            "A_note": self.A_note,
            "a_norm": self.a_norm,
            "c_norm": self.c_norm,
            "b_sup": self.b_sup,
            "h1_l2": self.h1_l2,
            "h2_l2": self.h2_l2,
            "a_sign_changing": self.a_sign_changing,
            "b_sign_changing": self.b_sign_changing,
            "c_sign_changing": self.c_sign_changing,
            "positive_cell_count": self.positive_cell_count,
        }


def _changes_sign(f: np.ndarray) -> bool:
    return bool(np.any(f > 0) and np.any(f < 0))


def check_hypotheses(sw: SampledWeights, grid: Grid, q: float,
                     ab_sum: float) -> HypothesisReport:
    """Check (A), (B), (H) on the sampled fields."""
    cells = positive_cell_mask(grid, sw.b)
    n_pos = int(cells.sum())
    r = ab_sum / (ab_sum - q)
    a_norm = norm_Lp(grid, sw.a, r)
    c_norm = norm_Lp(grid, sw.c, r)
    h1_l2 = norm_Lp(grid, sw.h1, 2.0)
    h2_l2 = norm_Lp(grid, sw.h2, 2.0)
    note = ("(A) holds automatically: continuous expressions on a bounded box "
            "lie in every finite Lebesgue class; discrete L^{:.6g} norms of a, c "
            "reported".format(r))
    return HypothesisReport(
        B_ok=n_pos > 0,
        H_ok=h1_l2 > 0 and h2_l2 > 0,
        A_note=note,
        a_norm=a_norm,
        c_norm=c_norm,
        b_sup=norm_Linf(sw.b),
        h1_l2=h1_l2,
        h2_l2=h2_l2,
        a_sign_changing=_changes_sign(sw.a),
        b_sign_changing=_changes_sign(sw.b),
        c_sign_changing=_changes_sign(sw.c),
        positive_cell_count=n_pos,
    )
