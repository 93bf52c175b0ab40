"""Tensor grids with homogeneous Dirichlet boundary and discrete calculus.

A Grid is a rectangular box in 1, 2 or 3 dimensions with uniformly spaced
nodes per axis (boundary included).  Solution fields are plain numpy arrays
of shape grid.shape whose boundary entries are identically zero; assert_dirichlet
enforces that invariant after solver steps.

Differential operators use one-sided forward differences,
g_k(x) = (f(x + h_k e_k) - f(x)) / h_k, with the value 0 beyond the upper
face (the Dirichlet extension), and integrals use the rectangle rule with
cell volume h_1*...*h_N.  This makes every discrete energy an explicit
smooth function of the nodal values, so its exact gradient is available and
finite-difference checkable.  The quadratic form sum_k |g_k|^2 * vol agrees
with the standard (2N+1)-point Dirichlet Laplacian stencil on the interior,
which is assembled sparse for Riesz solves and eigenvalue work.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "Grid",
    "FieldPair",
    "assert_dirichlet",
    "zero_boundary",
    "interior_mask",
    "coordinate_arrays",
    "gradient_field",
    "grad_sq",
    "norm_W",
    "norm_pair_full",
    "norm_Lp",
    "norm_Linf",
    "inner_L2",
    "random_field",
    "laplacian_matrix",
    "riesz_solve",
    "laplacian_min_eig_closed_form",
]


@dataclass(frozen=True)
class Grid:
    """Axis-aligned box with nodes-per-axis counts (boundary included)."""

    lo: tuple
    hi: tuple
    shape: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        shape = tuple(int(v) for v in self.shape)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "shape", shape)
        if not (len(lo) == len(hi) == len(shape)):
            raise ValueError("lo, hi and shape must share one length")
        if len(shape) not in (1, 2, 3):
            raise ValueError("only 1, 2 or 3 dimensions are supported")
        if any(n < 3 for n in shape):
            raise ValueError("need at least 3 nodes per axis")
        if any(b <= a for a, b in zip(lo, hi)):
            raise ValueError("box must have positive extent on every axis")

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def h(self) -> tuple:
        return tuple((b - a) / (n - 1)
                     for a, b, n in zip(self.lo, self.hi, self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    def axis_coords(self, k: int) -> np.ndarray:
        return np.linspace(self.lo[k], self.hi[k], self.shape[k])


@dataclass
class FieldPair:
    """A pair (u, v) of nodal fields on one grid."""

    u: np.ndarray
    v: np.ndarray

    def copy(self) -> "FieldPair":
        return FieldPair(self.u.copy(), self.v.copy())


def coordinate_arrays(grid: Grid):
    """Coordinate arrays (x1, ..., xN), each of shape grid.shape."""
    axes = [grid.axis_coords(k) for k in range(grid.ndim)]
    return tuple(np.meshgrid(*axes, indexing="ij"))


def _boundary_slices(ndim):
    for k in range(ndim):
        for side in (0, -1):
            idx = [slice(None)] * ndim
            idx[k] = side
            yield tuple(idx)


def interior_mask(grid: Grid) -> np.ndarray:
    mask = np.ones(grid.shape, dtype=bool)
    for idx in _boundary_slices(grid.ndim):
        mask[idx] = False
    return mask


def zero_boundary(f: np.ndarray) -> np.ndarray:
    out = np.array(f, dtype=float, copy=True)
    for idx in _boundary_slices(out.ndim):
        out[idx] = 0.0
    return out


def assert_dirichlet(f: np.ndarray, what: str = "field") -> None:
    for idx in _boundary_slices(f.ndim):
        if np.any(f[idx] != 0.0):
            raise ValueError(f"{what} has nonzero boundary entries")


def gradient_field(grid: Grid, f: np.ndarray):
    """Per-axis forward differences; the upper face differences against 0."""
    grads = []
    for k, hk in enumerate(grid.h):
        g = np.empty_like(f, dtype=float)
        lead = [slice(None)] * f.ndim
        last = [slice(None)] * f.ndim
        lead[k] = slice(0, -1)
        last[k] = slice(-1, None)
        g[tuple(lead)] = np.diff(f, axis=k) / hk
        g[tuple(last)] = (0.0 - f[tuple(last)]) / hk
        grads.append(g)
    return grads


def grad_sq(grid: Grid, f: np.ndarray) -> np.ndarray:
    out = np.zeros_like(f, dtype=float)
    for g in gradient_field(grid, f):
        out += g * g
    return out


def norm_W(grid: Grid, z: FieldPair) -> float:
    """Gradient-only pair norm: sqrt(sum(|grad u|^2 + |grad v|^2) * vol)."""
    total = np.sum(grad_sq(grid, z.u)) + np.sum(grad_sq(grid, z.v))
    return float(np.sqrt(total * grid.cell_volume))


def norm_pair_full(grid: Grid, z: FieldPair) -> float:
    """Full pair norm including the zeroth-order terms u^2, v^2."""
    total = (np.sum(z.u ** 2 + grad_sq(grid, z.u))
             + np.sum(z.v ** 2 + grad_sq(grid, z.v)))
    return float(np.sqrt(total * grid.cell_volume))


def norm_Lp(grid: Grid, f: np.ndarray, p: float) -> float:
    if p == np.inf:
        return norm_Linf(f)
    if p < 1:
        raise ValueError("p must be >= 1")
    return float((np.sum(np.abs(f) ** p) * grid.cell_volume) ** (1.0 / p))


def norm_Linf(f: np.ndarray) -> float:
    return float(np.max(np.abs(f)))


def inner_L2(grid: Grid, f: np.ndarray, g: np.ndarray) -> float:
    return float(np.sum(f * g) * grid.cell_volume)


def random_field(grid: Grid, seed: int, amplitude: float) -> np.ndarray:
    """Deterministic uniform values in [-amplitude, amplitude] on the interior."""
    if amplitude < 0:
        raise ValueError("amplitude must be nonnegative")
    rng = np.random.default_rng(seed)
    f = rng.uniform(-amplitude, amplitude, size=grid.shape)
    return zero_boundary(f)


# ------------------------------------------------- sparse interior operators


@lru_cache(maxsize=32)
def _interior_ops(grid: Grid):
    mask = interior_mask(grid)
    index = -np.ones(grid.shape, dtype=np.int64)
    n_int = int(mask.sum())
    index[mask] = np.arange(n_int)
    L = _assemble_laplacian(grid, mask, index, n_int)
    lu = spla.splu(L.tocsc())
    return {"mask": mask, "index": index, "n": n_int, "L": L, "lu": lu}


def _assemble_laplacian(grid, mask, index, n_int):
    rows, cols, vals = [], [], []
    own = index[mask]
    diag = np.zeros(n_int)
    for k, hk in enumerate(grid.h):
        diag += 2.0 / hk ** 2
        for shift in (+1, -1):
            nb = np.roll(index, -shift, axis=k)
            edge = [slice(None)] * grid.ndim
            edge[k] = -1 if shift == 1 else 0
            nb = nb.copy()
            nb[tuple(edge)] = -1  # no neighbour beyond the face
            nb_int = nb[mask]
            has = nb_int >= 0
            rows.append(own[has])
            cols.append(nb_int[has])
            vals.append(np.full(has.sum(), -1.0 / hk ** 2))
    rows.append(own)
    cols.append(own)
    vals.append(diag)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_int, n_int),
    )


def laplacian_matrix(grid: Grid) -> sp.csr_matrix:
    """Interior Dirichlet Laplacian stencil sum_k (2f - f_+k - f_-k)/h_k^2."""
    return _interior_ops(grid)["L"]


def laplacian_solver(grid: Grid):
    """Cached sparse LU factorization of the interior Laplacian."""
    return _interior_ops(grid)["lu"]


def riesz_solve(grid: Grid, g: np.ndarray) -> np.ndarray:
    """Solve the Dirichlet-Laplacian system L d = g/vol on the interior.

    g holds nodal partial derivatives of a functional (already carrying a
    factor of the cell volume); the result d is the gradient-metric (H^1_0)
    representative, returned as a full field with zero boundary.
    """
    ops = _interior_ops(grid)
    rhs = g[ops["mask"]] / grid.cell_volume
    sol = ops["lu"].solve(rhs)
    out = np.zeros(grid.shape)
    out[ops["mask"]] = sol
    return out


def laplacian_min_eig_closed_form(grid: Grid) -> float:
    """Smallest stencil eigenvalue: sum over axes of (4/h^2) sin^2(pi*h/(2*L))."""
    total = 0.0
    for a, b, h in zip(grid.lo, grid.hi, grid.h):
        L = b - a
        total += (2.0 / h) ** 2 * np.sin(np.pi * h / (2.0 * L)) ** 2
    return float(total)
