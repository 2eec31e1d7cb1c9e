"""Rayleigh-quotient minimisation on the cylindrical grid.

We minimise the Dirichlet energy E(u) subject to the weighted-norm
constraint N(u) = integral of u^q / rho^s = 1, q = 2(n-s)/(n-2), by a
normalized gradient flow: descend along

    d = L u + E(u) rho^(-s) u^(q-1)

(the constrained-gradient direction; L is the reduced Laplacian) and
project back onto N = 1 by rescaling.  At a stationary point the pairing
<d, u> = 0 forces L u = -E rho^(-s) u^(q-1), so the flow's fixed points
are exactly the constrained critical points and the converged energy is
the Euler-Lagrange multiplier.

Discretisation: a finite-volume form of L (exact cell moments of the
rho^a r^b measure, zero-flux axis faces, homogeneous Dirichlet at the
outer boundary).  This makes mass * L exactly symmetric negative
semidefinite, so the discrete energy -<u, L u> is a true quadratic form
and d is its constrained gradient in the mass-weighted inner product.

Time stepping is semi-implicit by default, (1 - step L) u+ = u + step E
rho^(-s) u^(q-1): unconditionally stable, so the pseudo-time step can be
O(1) even on graded grids whose smallest cells would force an explicit
step below 1e-6.  An explicit stepper is available for small grids and
keeps the documented step * lambda_max < 2 safeguard.

Caution on grading: the continuum problem is dilation invariant, and on
strongly graded grids (grading around 2 and above) the discretisation
error tilts that neutral direction downhill — the profile slides toward
the axis and the discrete energy dips below the continuum minimum.
Grading 1.5 is the validated default here; the result carries a core-
resolution diagnostic and a warning fires if the profile collapses.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cylgrid import CylGrid, GridSpec, build_grid, cell_volumes
from .errors import (
    ConvergenceError,
    InternalConsistencyError,
    ParameterDomainError,
)
from .exponents import ExponentContext, admissible, hs_conjugate
from .specfn import beta as beta_fn
from .specfn import sphere_measure

__all__ = [
    "MinimizeOptions",
    "MinimizeResult",
    "DiscreteRayleigh",
    "minimize_rayleigh",
    "recover_constant",
]

INIT_MODES = ("positive-bump", "analytic-extremal", "user-grid")
DEFAULT_MINIMIZE_GRADING = 1.5


@dataclass
class MinimizeOptions:
    """Knobs for the flow; defaults are the calibrated s = 1 settings."""

    step: float = 2.0
    max_iters: int = 4000
    tol: float = 1e-10
    init: str = "positive-bump"
    init_grid: CylGrid | None = None
    init_scale: float | None = None  # core scale of the analytic-extremal seed
    stepper: str = "semi-implicit"   # or "explicit"

    def __post_init__(self):
        if self.init not in INIT_MODES:
            raise ParameterDomainError(f"init must be one of {INIT_MODES}, got {self.init!r}")
        if self.stepper not in ("semi-implicit", "explicit"):
            raise ParameterDomainError(f"unknown stepper {self.stepper!r}")
        if not self.step > 0.0:
            raise ParameterDomainError(f"step must be positive, got {self.step}")
        if self.max_iters < 1:
            raise ParameterDomainError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol > 0.0:
            raise ParameterDomainError(f"tol must be positive, got {self.tol}")


@dataclass(frozen=True)
class MinimizeResult:
    """Converged minimum, the recovered constant estimate, the minimiser
    itself, the accepted-step history, and boundary-truncation diagnostics.

    history rows are (iteration, energy, constraint_defect); energies are
    non-increasing and every defect is at (rescaling) rounding level.
    """

    E_min: float
    K_est: float
    grid: CylGrid
    history: tuple
    iterations: int
    truncation_estimate: float
    core_scale: float


class DiscreteRayleigh:
    """Discrete energy/constraint pair and the flow direction.

    Exposes exactly the objects the flow uses so that the descent
    direction can be validated against a finite-difference gradient of
    rayleigh() (in the mass-weighted metric the direction is
    -(1/2) grad of E/N^(2/q) on N = 1).
    """

    def __init__(self, n: int, k: int, s: float, grid: CylGrid):
        if (grid.n, grid.k) != (n, k):
            raise ParameterDomainError("grid does not match the requested (n, k)")
        if not grid.axis_ghost:
            raise ParameterDomainError("the flow needs an axis-adjacent grid, "
                                       "not a window grid")
        self.n, self.k, self.s = n, k, float(s)
        self.q = hs_conjugate(2.0, s, n)
        self.grid = grid
        rho, r = grid.rho_nodes, grid.r_nodes
        sigma = sphere_measure(k) * (sphere_measure(n - k) if k < n else 1.0)
        vol_rho = cell_volumes(rho, grid.a)
        a_rho = self._axis_matrix(rho, grid.a, vol_rho)
        if k == n:
            self.shape = (rho.size,)
            self.mass = sigma * vol_rho
            self.op = a_rho.tocsr()
            self.weight_s = rho ** (-self.s)
            self.interior = np.ones(self.shape, dtype=bool)
            self.interior[-1] = False
        else:
            vol_r = cell_volumes(r, grid.b)
            a_r = self._axis_matrix(r, grid.b, vol_r)
            self.shape = (rho.size, r.size)
            self.mass = sigma * np.outer(vol_rho, vol_r)
            self.op = (sp.kron(a_rho, sp.identity(r.size), format="csr")
                       + sp.kron(sp.identity(rho.size), a_r, format="csr"))
            self.weight_s = np.broadcast_to((rho ** (-self.s))[:, None], self.shape)
            self.interior = np.ones(self.shape, dtype=bool)
            self.interior[-1, :] = False
            self.interior[:, -1] = False

    @staticmethod
    def _axis_matrix(nodes, weight_pow, vol):
        """Finite-volume 1-D operator: flux faces at midpoints, zero flux
        at the axis, Dirichlet pin at the outer node (row zeroed)."""
        x = np.asarray(nodes, dtype=float)
        m = x.size
        faces = 0.5 * (x[1:] + x[:-1])
        wf = faces**weight_pow / np.diff(x)
        main = np.zeros(m)
        lower = np.zeros(m - 1)
        upper = np.zeros(m - 1)
        main[:-1] -= wf / vol[:-1]
        upper[:] = wf / vol[:-1]
        main[1:] -= wf / vol[1:]
        lower[:] = wf / vol[1:]
        mat = sp.diags([lower, main, upper], [-1, 0, 1], format="lil")
        mat[m - 1, :] = 0.0
        return mat

    def apply_op(self, u: np.ndarray) -> np.ndarray:
        return (self.op @ u.ravel()).reshape(self.shape)

    def energy(self, u: np.ndarray) -> float:
        return float(-np.sum(self.mass * u * self.apply_op(u)))

    def constraint(self, u: np.ndarray) -> float:
        return float(np.sum(self.mass * self.weight_s * np.abs(u) ** self.q))

    def project(self, u: np.ndarray) -> np.ndarray:
        nval = self.constraint(u)
        if not nval > 0.0:
            raise ConvergenceError("flow state has vanished (zero constraint norm)")
        return u / nval ** (1.0 / self.q)

    def direction(self, u: np.ndarray) -> np.ndarray:
        """Flow direction L u + E(u) rho^(-s) u^(q-1), zero on the pinned
        boundary."""
        d = self.apply_op(u) + self.energy(u) * self.weight_s * np.abs(u) ** (self.q - 1.0)
        return np.where(self.interior, d, 0.0)

    def rayleigh(self, u: np.ndarray) -> float:
        return self.energy(u) / self.constraint(u) ** (2.0 / self.q)

    def max_eigenvalue_estimate(self, iters: int = 30, seed: int = 0) -> float:
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(self.op.shape[0])
        v /= np.linalg.norm(v)
        lam = 1.0
        for _ in range(iters):
            w = self.op @ v
            lam = np.linalg.norm(w)
            if lam == 0.0:
                return 0.0
            v = w / lam
        return float(lam)


def _initial_values(problem: DiscreteRayleigh, spec: GridSpec, opts: MinimizeOptions):
    grid = problem.grid
    if opts.init == "user-grid":
        if opts.init_grid is None:
            raise ParameterDomainError("init='user-grid' requires init_grid")
        if opts.init_grid.values.shape != problem.shape:
            raise ParameterDomainError("init_grid shape does not match the grid")
        u = np.array(opts.init_grid.values, dtype=float)
        if np.any(u < 0.0):
            raise ParameterDomainError("user initial grid must be non-negative")
    elif opts.init == "analytic-extremal":
        if problem.s != 1.0:
            raise ParameterDomainError("analytic-extremal seeding is calibrated "
                                       "for s = 1 only")
        core = opts.init_scale if opts.init_scale is not None else spec.rho_max / 200.0
        if grid.k == grid.n:
            u = (grid.rho_nodes + core) ** (-(grid.n - 2.0))
        else:
            P, R = np.meshgrid(grid.rho_nodes, grid.r_nodes, indexing="ij")
            u = ((P + core) ** 2 + R**2) ** (-0.5 * (grid.n - 2))
    else:  # positive-bump
        width = spec.rho_max / 10.0
        if grid.k == grid.n:
            u = np.exp(-(grid.rho_nodes**2) / width**2)
        else:
            P, R = np.meshgrid(grid.rho_nodes, grid.r_nodes, indexing="ij")
            u = np.exp(-(P**2 + R**2) / width**2)
    u = np.where(problem.interior, u, 0.0)
    return problem.project(u)


def _truncation_estimate(problem: DiscreteRayleigh, u: np.ndarray) -> float:
    """Tail energy beyond the box, assuming fundamental-solution decay.

    The amplitude is read off the profile at 45% of the box radius and
    corrected for the first-order Dirichlet image term (the truncated
    profile runs like A (zeta^(2-n) - R^(2-n)), so the raw ring amplitude
    underestimates A by 1 - f^(n-2) at ring fraction f); the closed form
    then integrates |grad(A zeta^(2-n))|^2 over zeta > R with the
    cylindrical measure.
    """
    n, k = problem.n, problem.k
    grid = problem.grid
    box = grid.rho_nodes[-1]
    fraction = 0.45
    ring = fraction * box
    if grid.k == grid.n:
        idx = int(np.searchsorted(grid.rho_nodes, ring))
        amp = float(u[idx]) * grid.rho_nodes[idx] ** (n - 2.0)
    else:
        zc = ring / math.sqrt(2.0)
        i = int(np.searchsorted(grid.rho_nodes, zc))
        j = int(np.searchsorted(grid.r_nodes, zc))
        amp = float(u[i, j]) * (grid.rho_nodes[i] ** 2 + grid.r_nodes[j] ** 2) ** (0.5 * (n - 2))
    amp /= 1.0 - fraction ** (n - 2.0)
    angular = 1.0
    sigma = sphere_measure(k)
    if k < n:
        angular = 0.5 * beta_fn(0.5 * k, 0.5 * (n - k))
        sigma *= sphere_measure(n - k)
    return sigma * angular * (n - 2.0) * amp**2 * box ** (2.0 - n)


def _core_scale(problem: DiscreteRayleigh, u: np.ndarray) -> float:
    """Radius at which the near-axis profile halves from its peak."""
    profile = u if problem.k == problem.n else u[:, 0]
    peak = float(profile[0])
    if peak <= 0.0:
        return float("nan")
    below = np.nonzero(profile <= 0.5 * peak)[0]
    if below.size == 0:
        return float(problem.grid.rho_nodes[-1])
    return float(problem.grid.rho_nodes[below[0]])


def minimize_rayleigh(n: int, k: int, s: float, grid_spec: GridSpec,
                      opts: MinimizeOptions | None = None) -> MinimizeResult:
    """Run the normalized gradient flow and return the converged minimum.

    Raises ConvergenceError (with the partial result attached) when
    max_iters is exhausted before the relative energy change drops below
    opts.tol.
    """
    opts = opts or MinimizeOptions()
    ctx = ExponentContext(n=n, k=k, p=2.0, s=s)
    if not admissible(ctx):
        raise ParameterDomainError(f"(n={n}, k={k}, p=2, s={s}) is not admissible")
    grid = build_grid(n, k, grid_spec.rho_max, grid_spec.r_max,
                      grid_spec.n_rho, grid_spec.n_r, grid_spec.grading)
    problem = DiscreteRayleigh(n, k, s, grid)
    u = _initial_values(problem, grid_spec, opts)

    step = float(opts.step)
    explicit = opts.stepper == "explicit"
    if explicit:
        lam_max = problem.max_eigenvalue_estimate()
        while step * lam_max >= 2.0:
            step *= 0.5
    solver = None

    def factor(tau):
        mat = (sp.identity(problem.op.shape[0], format="csr") - tau * problem.op).tocsc()
        return spla.splu(mat)

    if not explicit:
        solver = factor(step)

    energy = problem.energy(u)
    history = [(0, energy, abs(problem.constraint(u) - 1.0))]

    def partial_result(it):
        return _package(problem, u, energy, history, it)

    it = 0
    while it < opts.max_iters:
        it += 1
        if explicit:
            candidate = u + step * problem.direction(u)
        else:
            rhs = u + step * energy * problem.weight_s * np.abs(u) ** (problem.q - 1.0)
            rhs = np.where(problem.interior, rhs, 0.0)
            candidate = solver.solve(rhs.ravel()).reshape(problem.shape)
        candidate = np.clip(candidate, 0.0, None)
        candidate = problem.project(candidate)
        new_energy = problem.energy(candidate)
        if not math.isfinite(new_energy) or new_energy > energy + 1e-14 * abs(energy):
            step *= 0.5
            if step < 1e-12 * opts.step:
                raise ConvergenceError(
                    "flow step collapsed without reaching tolerance",
                    partial=partial_result(it),
                )
            if not explicit:
                solver = factor(step)
            continue
        rel_change = abs(energy - new_energy) / max(abs(new_energy), 1e-300)
        u, energy = candidate, new_energy
        history.append((it, energy, abs(problem.constraint(u) - 1.0)))
        if rel_change <= opts.tol:
            result = _package(problem, u, energy, history, it)
            interior_min = float(np.min(u[problem.interior]))
            if interior_min <= 0.0:
                raise ConvergenceError(
                    "flow converged to a profile that is not strictly positive",
                    partial=result,
                )
            return result
    raise ConvergenceError(
        f"no convergence within max_iters = {opts.max_iters}",
        partial=partial_result(it),
    )


def _package(problem, u, energy, history, iterations) -> MinimizeResult:
    grid = problem.grid.with_values(u)
    core = _core_scale(problem, u)
    first_node = float(problem.grid.rho_nodes[0])
    if math.isfinite(core) and core < 8.0 * first_node:
        warnings.warn(
            "minimiser core collapsed near the axis "
            f"(core scale {core:.3g} vs first node {first_node:.3g}); "
            "reduce grading or refine the grid",
            RuntimeWarning,
            stacklevel=3,
        )
    return MinimizeResult(
        E_min=energy,
        K_est=energy ** -0.5 if energy > 0 else float("nan"),
        grid=grid,
        history=tuple(history),
        iterations=iterations,
        truncation_estimate=_truncation_estimate(problem, u),
        core_scale=core,
    )


def recover_constant(result: MinimizeResult) -> float:
    """Constant estimate E_min^(-1/2): with N(u) = 1 the inequality forces
    the gradient norm to be at least the reciprocal constant, with
    equality exactly at extremals."""
    if not result.E_min > 0.0:
        raise InternalConsistencyError(
            f"converged energy must be positive, got {result.E_min}"
        )
    return result.E_min ** -0.5
