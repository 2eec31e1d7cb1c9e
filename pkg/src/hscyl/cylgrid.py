"""Finite-difference machinery on the cylindrically reduced quadrant.

Functions of (|x|, |y|) live on a tensor grid in (rho, r) with strictly
positive nodes; the axes themselves are never grid nodes.  Ghost values at
the axes come from even reflection (the cylindrically symmetric fields we
difference are even there), outer boundaries use one-sided second-order
stencils, and all stencil weights are generated for the actual node
positions, so graded grids cost no accuracy.

The reduced Laplacian is

    L U = U_rho_rho + (a/rho) U_rho + U_rr + (b/r) U_r,
    a = k - 1,  b = n - k - 1,

acting on U(rho, r); for k = n the r direction is absent and grids are
one-dimensional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .errors import GridError, ParameterDomainError
from .exponents import hs_conjugate
from .specfn import sphere_measure

__all__ = [
    "CylGrid",
    "GridSpec",
    "build_grid",
    "window_grid",
    "cyl_laplacian",
    "gradient_energy",
    "el_residual",
    "shifted_quadratic_residual",
    "dump_grid",
    "load_grid",
    "axis_derivative_operators",
    "cell_volumes",
]


def _require_int(value, name):
    if isinstance(value, bool) or value != int(value):
        raise ParameterDomainError(f"{name} must be an integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class CylGrid:
    """Immutable tensor grid with function values.

    values has shape (len(rho_nodes), len(r_nodes)), or (len(rho_nodes),)
    when k = n and the r direction is absent.  ``axis_ghost`` records
    whether the innermost nodes sit next to the axes (even-reflection
    ghosts apply there); window grids cut out of the open quadrant set it
    False and get one-sided stencils at both edges instead.
    """

    n: int
    k: int
    rho_nodes: np.ndarray
    r_nodes: np.ndarray
    values: np.ndarray
    grading: float = 1.0
    axis_ghost: bool = True

    def __post_init__(self):
        n = _require_int(self.n, "n")
        k = _require_int(self.k, "k")
        if n < 3 or not (2 <= k <= n):
            raise ParameterDomainError(f"need n >= 3 and 2 <= k <= n, got n={n}, k={k}")
        rho = np.array(self.rho_nodes, dtype=float)
        r = np.array(self.r_nodes, dtype=float)
        vals = np.array(self.values, dtype=float)
        for name, nodes in (("rho_nodes", rho), ("r_nodes", r)):
            if nodes.size and (np.any(nodes <= 0.0) or np.any(np.diff(nodes) <= 0.0)):
                raise GridError(f"{name} must be strictly increasing and positive")
        if k == n:
            if r.size:
                raise GridError("k = n grids carry no r nodes")
            if vals.shape != rho.shape:
                raise GridError(f"values shape {vals.shape} does not match 1-D grid")
        else:
            if vals.shape != (rho.size, r.size):
                raise GridError(
                    f"values shape {vals.shape} does not match grid "
                    f"({rho.size}, {r.size})"
                )
        if not np.all(np.isfinite(vals)):
            raise GridError("grid values must be finite")
        for arr in (rho, r, vals):
            arr.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "rho_nodes", rho)
        object.__setattr__(self, "r_nodes", r)
        object.__setattr__(self, "values", vals)

    @property
    def a(self) -> int:
        return self.k - 1

    @property
    def b(self) -> int:
        return self.n - self.k - 1

    def with_values(self, values) -> "CylGrid":
        return replace(self, values=np.array(values, dtype=float))

    def sampled(self, profile) -> "CylGrid":
        """New grid with values = profile(rho, r) (profile(rho, 0) if k = n)."""
        if self.k == self.n:
            return self.with_values(profile(self.rho_nodes, 0.0))
        P, R = np.meshgrid(self.rho_nodes, self.r_nodes, indexing="ij")
        return self.with_values(profile(P, R))


@dataclass(frozen=True)
class GridSpec:
    """Build parameters for a grid (see :func:`build_grid`)."""

    rho_max: float
    r_max: float
    n_rho: int
    n_r: int
    grading: float = 2.0


def build_grid(n: int, k: int, rho_max: float, r_max: float,
               n_rho: int, n_r: int, grading: float = 2.0) -> CylGrid:
    """Graded tensor grid with nodes rho_i = rho_max (i/n_rho)^grading,
    i = 1..n_rho (never 0), and likewise in r.  Values start at zero."""
    n = _require_int(n, "n")
    k = _require_int(k, "k")
    n_rho = _require_int(n_rho, "n_rho")
    n_r = _require_int(n_r, "n_r")
    if n_rho < 8 or (k < n and n_r < 8):
        raise ParameterDomainError("need at least 8 nodes per active dimension")
    if not grading >= 1.0:
        raise ParameterDomainError(f"grading must be >= 1, got {grading}")
    if not rho_max > 0.0 or (k < n and not r_max > 0.0):
        raise ParameterDomainError("domain extents must be positive")
    rho = rho_max * (np.arange(1, n_rho + 1) / n_rho) ** grading
    if k == n:
        return CylGrid(n, k, rho, np.empty(0), np.zeros(n_rho), grading)
    r = r_max * (np.arange(1, n_r + 1) / n_r) ** grading
    return CylGrid(n, k, rho, r, np.zeros((n_rho, n_r)), grading)


def window_grid(n: int, k: int, rho_lo: float, rho_hi: float,
                r_lo: float, r_hi: float, n_rho: int, n_r: int) -> CylGrid:
    """Uniform grid on a window of the open quadrant, away from the axes.

    Both edges get one-sided stencils (axis reflection would be wrong for
    a grid that does not touch the axis).  Used for residual checks of
    explicit solutions on a fixed box.
    """
    n = _require_int(n, "n")
    k = _require_int(k, "k")
    n_rho = _require_int(n_rho, "n_rho")
    n_r = _require_int(n_r, "n_r")
    if not (0.0 < rho_lo < rho_hi) or (k < n and not (0.0 < r_lo < r_hi)):
        raise ParameterDomainError("window bounds must satisfy 0 < lo < hi")
    if n_rho < 8 or (k < n and n_r < 8):
        raise ParameterDomainError("need at least 8 nodes per active dimension")
    rho = np.linspace(rho_lo, rho_hi, n_rho)
    if k == n:
        return CylGrid(n, k, rho, np.empty(0), np.zeros(n_rho), 1.0, axis_ghost=False)
    r = np.linspace(r_lo, r_hi, n_r)
    return CylGrid(n, k, rho, r, np.zeros((n_rho, n_r)), 1.0, axis_ghost=False)


# ---------------------------------------------------------------------------
# Stencils
# ---------------------------------------------------------------------------

def _fd_weights(x0: float, xs: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference weights for d^order/dx^order at x0 on nodes xs
    (exact for polynomials up to degree len(xs)-1)."""
    m = len(xs)
    A = np.vander(xs - x0, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(A, rhs)


def axis_derivative_operators(nodes: np.ndarray,
                              axis_ghost: bool = True) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """(D1, D2) for one radial direction: centred 3-point stencils inside,
    one-sided 4-point at the outer edge, and at the inner edge either an
    even-reflection ghost (axis-adjacent grids) or another one-sided
    stencil (window grids)."""
    x = np.asarray(nodes, dtype=float)
    m = x.size
    if m < 3:
        raise GridError("need at least 3 nodes per active dimension")
    d1 = sp.lil_matrix((m, m))
    d2 = sp.lil_matrix((m, m))
    if axis_ghost:
        # ghost at -x0 carries the value at x0
        stencil = np.array([-x[0], x[0], x[1]])
        w1 = _fd_weights(x[0], stencil, 1)
        w2 = _fd_weights(x[0], stencil, 2)
        d1[0, 0], d1[0, 1] = w1[0] + w1[1], w1[2]
        d2[0, 0], d2[0, 1] = w2[0] + w2[1], w2[2]
    else:
        head = x[:4] if m >= 4 else x
        d1[0, :len(head)] = _fd_weights(x[0], head, 1)
        d2[0, :len(head)] = _fd_weights(x[0], head, 2)
    for i in range(1, m - 1):
        stencil = x[i - 1:i + 2]
        d1[i, i - 1:i + 2] = _fd_weights(x[i], stencil, 1)
        d2[i, i - 1:i + 2] = _fd_weights(x[i], stencil, 2)
    tail = x[m - 4:] if m >= 4 else x
    lo = m - len(tail)
    d1[m - 1, lo:] = _fd_weights(x[m - 1], tail, 1)
    d2[m - 1, lo:] = _fd_weights(x[m - 1], tail, 2)
    return d1.tocsr(), d2.tocsr()


def _apply_reduced_laplacian(grid: CylGrid) -> np.ndarray:
    u = grid.values
    d1r, d2r = axis_derivative_operators(grid.rho_nodes, grid.axis_ghost)
    drift_rho = grid.a / grid.rho_nodes
    if grid.k == grid.n:
        return d2r @ u + drift_rho * (d1r @ u)
    out = d2r @ u + drift_rho[:, None] * (d1r @ u)
    d1t, d2t = axis_derivative_operators(grid.r_nodes, grid.axis_ghost)
    out += (d2t @ u.T).T
    if grid.b:
        out += (grid.b / grid.r_nodes)[None, :] * (d1t @ u.T).T
    return out


def cyl_laplacian(grid: CylGrid) -> CylGrid:
    """Apply L = d_rho_rho + (a/rho) d_rho + d_rr + (b/r) d_r to the grid."""
    if grid.rho_nodes.size < 3 or (grid.k < grid.n and grid.r_nodes.size < 3):
        raise GridError("need at least 3 nodes per active dimension")
    return grid.with_values(_apply_reduced_laplacian(grid))


def _gradient(grid: CylGrid) -> tuple[np.ndarray, np.ndarray]:
    d1r, _ = axis_derivative_operators(grid.rho_nodes, grid.axis_ghost)
    if grid.k == grid.n:
        return d1r @ grid.values, np.zeros_like(grid.values)
    d1t, _ = axis_derivative_operators(grid.r_nodes, grid.axis_ghost)
    return d1r @ grid.values, (d1t @ grid.values.T).T


def _trapezoid_weights(nodes: np.ndarray, vanishes_at_axis: bool,
                       axis_cell: bool = True) -> np.ndarray:
    """Trapezoid weights on [0, nodes[-1]] for integrands known at the
    nodes.  The axis cell [0, nodes[0]] uses integrand 0 at the axis when
    the measure factor vanishes there, and the even-symmetry value
    (integrand(0) ~ integrand(nodes[0])) otherwise; window grids that do
    not touch the axis drop that cell."""
    x = nodes
    w = np.zeros_like(x)
    w[1:-1] = 0.5 * (x[2:] - x[:-2])
    w[0] = 0.5 * (x[1] - x[0])
    w[-1] = 0.5 * (x[-1] - x[-2])
    if axis_cell:
        w[0] += 0.5 * x[0] if vanishes_at_axis else x[0]
    return w


def cell_volumes(nodes: np.ndarray, weight_pow: float,
                 xmax: float | None = None) -> np.ndarray:
    """Exact moments of x^weight_pow over the cells of a node-centred
    partition of [0, xmax] (faces at 0, the midpoints, and xmax)."""
    x = np.asarray(nodes, dtype=float)
    top = x[-1] if xmax is None else float(xmax)
    faces = np.concatenate(([0.0], 0.5 * (x[1:] + x[:-1]), [top]))
    p = weight_pow + 1.0
    return (faces[1:] ** p - faces[:-1] ** p) / p


def gradient_energy(grid: CylGrid, p_exp: float = 2.0) -> float:
    """Weighted Dirichlet energy

        sigma_k sigma_(n-k) * double sum of |grad U|^p rho^(k-1) r^(n-k-1)

    with trapezoidal weights; |grad U|^2 = U_rho^2 + U_r^2.
    """
    if not p_exp >= 1.0:
        raise ParameterDomainError(f"need p_exp >= 1, got {p_exp}")
    ux, ur = _gradient(grid)
    mag = (ux**2 + ur**2) ** (0.5 * p_exp)
    wr = _trapezoid_weights(grid.rho_nodes, vanishes_at_axis=grid.a > 0,
                            axis_cell=grid.axis_ghost)
    wr = wr * grid.rho_nodes ** (grid.k - 1.0)
    if grid.k == grid.n:
        return float(sphere_measure(grid.k) * np.sum(mag * wr))
    wt = _trapezoid_weights(grid.r_nodes, vanishes_at_axis=grid.b > 0,
                            axis_cell=grid.axis_ghost)
    wt = wt * grid.r_nodes ** (grid.n - grid.k - 1.0)
    sigma = sphere_measure(grid.k) * sphere_measure(grid.n - grid.k)
    return float(sigma * np.sum(mag * wr[:, None] * wt[None, :]))


def el_residual(grid: CylGrid, Lambda: float, s: float) -> CylGrid:
    """Residual of the constrained-minimiser equation at the grid values:

        L U + Lambda rho^(-s) U^(q-1),   q = 2(n-s)/(n-2).

    Vanishes (to truncation error) exactly when U solves
    Delta U = -Lambda |x|^(-s) U^(q-1).
    """
    if np.any(grid.values <= 0.0):
        raise ParameterDomainError("el_residual requires strictly positive values")
    q = hs_conjugate(2.0, s, grid.n)
    lap = _apply_reduced_laplacian(grid)
    weight = grid.rho_nodes ** (-s)
    if grid.k < grid.n:
        weight = weight[:, None]
    return grid.with_values(lap + Lambda * weight * grid.values ** (q - 1.0))


def shifted_quadratic_residual(phi_grid: CylGrid, params) -> CylGrid:
    """Residual of the quadratic-solution equation at the grid values:

        L phi - (n/2) |grad phi|^2 / phi
              - 2 a lam^2 alpha / rho - 2 b lam^2 beta / r,

    where L carries the drift coefficients a, b of ``params`` (the grid's
    split must agree with them) and n = a + b + 2.
    """
    if np.any(phi_grid.values <= 0.0):
        raise ParameterDomainError("shifted_quadratic_residual requires strictly positive values")
    if (phi_grid.a, phi_grid.b) != (params.a, params.b):
        raise ParameterDomainError(
            f"grid split (a={phi_grid.a}, b={phi_grid.b}) does not match "
            f"params (a={params.a}, b={params.b})"
        )
    n = params.n
    lap = _apply_reduced_laplacian(phi_grid)
    ux, ur = _gradient(phi_grid)
    res = lap - 0.5 * n * (ux**2 + ur**2) / phi_grid.values
    drive_rho = 2.0 * params.a * params.lam**2 * params.alpha / phi_grid.rho_nodes
    if phi_grid.k == phi_grid.n:
        res = res - drive_rho
    else:
        res = res - drive_rho[:, None]
        res = res - (2.0 * params.b * params.lam**2 * params.beta / phi_grid.r_nodes)[None, :]
    return phi_grid.with_values(res)


# ---------------------------------------------------------------------------
# Grid dumps
# ---------------------------------------------------------------------------

def dump_grid(grid: CylGrid, path) -> None:
    """Write the grid as a comma-separated table with header rho,r,value.

    Floats are printed with 17 significant digits so a reload is
    bit-exact; a leading comment line carries (n, k, grading).
    """
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# hscyl-grid n={grid.n} k={grid.k} grading={grid.grading:.17g} "
                 f"axis_ghost={int(grid.axis_ghost)}\n")
        fh.write("rho,r,value\n")
        if grid.k == grid.n:
            for rho, val in zip(grid.rho_nodes, grid.values):
                fh.write(f"{rho:.17g},0,{val:.17g}\n")
            return
        for i, rho in enumerate(grid.rho_nodes):
            for j, r in enumerate(grid.r_nodes):
                fh.write(f"{rho:.17g},{r:.17g},{grid.values[i, j]:.17g}\n")


def load_grid(path) -> CylGrid:
    """Read a grid written by :func:`dump_grid` (bit-exact round trip)."""
    meta = {}
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if "=" in token:
                        key, val = token.split("=", 1)
                        meta[key] = val
                continue
            if line == "rho,r,value":
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise GridError(f"malformed grid row: {line!r}")
            rows.append((float(parts[0]), float(parts[1]), float(parts[2])))
    if "n" not in meta or "k" not in meta:
        raise GridError("grid dump is missing its n/k metadata line")
    n, k = int(meta["n"]), int(meta["k"])
    grading = float(meta.get("grading", 1.0))
    ghost = bool(int(meta.get("axis_ghost", 1)))
    rho = np.unique([row[0] for row in rows])
    if k == n:
        if len(rows) != rho.size:
            raise GridError("grid dump is not a full 1-D table")
        vals = np.empty(rho.size)
        index = {v: i for i, v in enumerate(rho)}
        for rr, _, vv in rows:
            vals[index[rr]] = vv
        return CylGrid(n, k, rho, np.empty(0), vals, grading, ghost)
    r = np.unique([row[1] for row in rows])
    if len(rows) != rho.size * r.size:
        raise GridError("grid dump is not a full tensor table")
    vals = np.empty((rho.size, r.size))
    ri = {v: i for i, v in enumerate(rho)}
    ti = {v: i for i, v in enumerate(r)}
    for rr, tt, vv in rows:
        vals[ri[rr], ti[tt]] = vv
    return CylGrid(n, k, rho, r, vals, grading, ghost)
