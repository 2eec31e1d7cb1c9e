"""Closed-form objects: Beta-function integral identities, the extremal
family and its sharp constant, the explicit two/three-subspace solutions,
the fundamental solution and the Kelvin transform.

The sharp constant deserves a warning.  The published display for K
contains typos (a stray power of the shift and a wrong Beta argument), and
its 'simplified' second line disagrees with its own first line.  We
therefore solve the normalisation identity

    K^(2(n-1)^2/(n-2)) = ((n-2)/2)^(2(n-1)) * J,
    J = integral of |x|^(-1) [ (|x| + shift)^2 + |y|^2 ]^(-(n-1)),

with J obtained from adaptive quadrature (and cross-checked against the
correct Beta composition), and we keep the literal published formula as a
diagnostic value with its discrepancy reported, never averaged in.

In this normalisation the constrained minimum of the Dirichlet energy is
Lambda = K^(2(n-1)/(n-2)) (the Euler-Lagrange multiplier); the best ratio
of the weighted norm to the gradient norm is Lambda^(-1/2), not K itself.
See SharpConstant.attained_ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceDomainError,
    InternalConsistencyError,
    ParameterDomainError,
    SingularityError,
)
from .quadrature import DEFAULT_TOL, integrate_cylindrical
from .specfn import ball_volume, beta, sphere_measure

__all__ = [
    "SharpConstant",
    "ExtremalParams",
    "ShiftedQuadraticParams",
    "beta_integral_full",
    "beta_integral_radial",
    "sharp_constant_K",
    "extremal_v",
    "extremal_profile",
    "shifted_power_solution",
    "shifted_power_profile",
    "multi_subspace_solution",
    "multi_subspace_coefficients",
    "fundamental_solution",
    "kelvin_transform",
]

_REL_TOL = 1e-12


def _require_int(value, name):
    if isinstance(value, bool) or value != int(value):
        raise ParameterDomainError(f"{name} must be an integer, got {value!r}")
    return int(value)


# ---------------------------------------------------------------------------
# Beta-function integral identities
# ---------------------------------------------------------------------------

def beta_integral_full(n: int, k: int, m: float, s: float) -> float:
    """Closed form of the split-weight integral over R^k x R^(n-k):

        integral of (1 + |x|^2 + |y|^2)^(-m) |x|^(-s) dy dx
          = (sigma_(n-k)/2)(sigma_k/2)
            * B((n-k)/2, m - (n-k)/2) * B((k-s)/2, m - (n-s)/2).

    Requires 0 <= s < k < n and m > (n-s)/2 for convergence.
    """
    n = _require_int(n, "n")
    k = _require_int(k, "k")
    if not (0.0 <= s < k < n):
        raise ParameterDomainError(f"need 0 <= s < k < n, got s={s}, k={k}, n={n}")
    if not m > 0.5 * (n - k):
        raise ConvergenceDomainError(
            f"first Beta factor diverges: need m > (n-k)/2 = {0.5 * (n - k)}, got m={m}"
        )
    if not m > 0.5 * (n - s):
        raise ConvergenceDomainError(
            f"second Beta factor diverges: need m > (n-s)/2 = {0.5 * (n - s)}, got m={m}"
        )
    return (
        0.5 * sphere_measure(n - k)
        * 0.5 * sphere_measure(k)
        * beta(0.5 * (n - k), m - 0.5 * (n - k))
        * beta(0.5 * (k - s), m - 0.5 * (n - s))
    )


def beta_integral_radial(k: int, a: float, s: float) -> float:
    """Closed form of the one-factor weighted integral over R^k:

        integral of (1 + |x|^2)^(-a) |x|^(-s) dx
          = (sigma_k/2) * B((k-s)/2, a - (k-s)/2),

    valid for k > s >= 0 and a > (k-s)/2.
    """
    k = _require_int(k, "k")
    if not (k > s >= 0.0):
        raise ParameterDomainError(f"need k > s >= 0, got k={k}, s={s}")
    if not a > 0.5 * (k - s):
        raise ConvergenceDomainError(
            f"Beta factor diverges: need a > (k-s)/2 = {0.5 * (k - s)}, got a={a}"
        )
    return 0.5 * sphere_measure(k) * beta(0.5 * (k - s), a - 0.5 * (k - s))


# ---------------------------------------------------------------------------
# Sharp constant
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SharpConstant:
    """Constant K for the s = 1, p = 2 inequality on R^k x R^(n-k), with its
    companions Lambda = K^(2(n-1)/(n-2)) and mu = 4 Lambda/(n-2)^2.

    ``K_printed`` is the literal published formula, retained as a diagnostic
    together with its relative discrepancy from the quadrature-backed K.
    """

    n: int
    k: int
    K: float
    Lambda: float
    mu: float
    K_printed: float = float("nan")
    printed_discrepancy: float = float("nan")
    normalization_integral: float = float("nan")

    def __post_init__(self):
        if not self.K > 0.0:
            raise ParameterDomainError(f"K must be positive, got {self.K}")
        n = self.n
        lam = self.K ** (2.0 * (n - 1) / (n - 2))
        if abs(lam - self.Lambda) > _REL_TOL * abs(lam):
            raise InternalConsistencyError(
                f"Lambda={self.Lambda} violates Lambda = K^(2(n-1)/(n-2)) = {lam}"
            )
        mu = 4.0 * self.Lambda / (n - 2) ** 2
        if abs(mu - self.mu) > _REL_TOL * abs(mu):
            raise InternalConsistencyError(
                f"mu={self.mu} violates mu = 4 Lambda/(n-2)^2 = {mu}"
            )

    @property
    def attained_ratio(self) -> float:
        """Best value of the weighted norm over the gradient norm, i.e. the
        constant that multiplies the right-hand side of the inequality.
        Equals Lambda^(-1/2) = K^(-(n-1)/(n-2))."""
        return self.Lambda ** -0.5

    @property
    def shift(self) -> float:
        """Axis shift (n-2)/(4a), a = k-1, of the unit-dilation extremal."""
        return (self.n - 2) / (4.0 * (self.k - 1))


def _normalization_integral_closed(n: int, k: int, shift: float) -> float:
    """Beta composition of the two nested radial integrals behind J.

    The |y| factor gives (sigma_(n-k)/2) B((n-k)/2, (n+k)/2 - 1) and the
    remaining |x| factor gives sigma_k shift^(1-n) B(k-1, n-1); for k = n
    the first factor degenerates to 1.
    """
    y_factor = 1.0
    if k < n:
        y_factor = (0.5 * sphere_measure(n - k)
                    * beta(0.5 * (n - k), 0.5 * (n + k) - 1.0))
    return y_factor * sphere_measure(k) * shift ** (1.0 - n) * beta(k - 1.0, n - 1.0)


def _k_printed(n: int, k: int, shift: float) -> float:
    """Literal published formula for K (first line of its display)."""
    y_factor = 1.0
    if k < n:
        y_factor = (0.5 * sphere_measure(n - k)
                    * beta(0.5 * (n - k), 0.5 * (n + k) - 1.0))
    rhs = ((0.5 * (n - 2)) ** (2 * (n - 1))
           * y_factor
           * sphere_measure(k) / shift ** (n + k + 1)
           * beta(k - 1.0, n + k - 1.0))
    return rhs ** ((n - 2) / (2.0 * (n - 1) ** 2))


def sharp_constant_K(n: int, k: int, tol: float = DEFAULT_TOL) -> SharpConstant:
    """Compute K for the s = 1 extremal family on R^k x R^(n-k).

    The normalisation integral J (with unit dilation and shift (n-2)/(4a))
    is evaluated by adaptive cylindrical quadrature, cross-checked against
    its Beta composition, and K solves

        K^(2(n-1)^2/(n-2)) = ((n-2)/2)^(2(n-1)) * J.

    The literal published formula is evaluated alongside and its relative
    discrepancy recorded.
    """
    n = _require_int(n, "n")
    k = _require_int(k, "k")
    if n < 3:
        raise ParameterDomainError(f"need n >= 3, got n={n}")
    if not (2 <= k <= n):
        raise ParameterDomainError(f"need 2 <= k <= n, got k={k}")
    shift = (n - 2) / (4.0 * (k - 1))

    def integrand(rho, r):
        return ((rho + shift) ** 2 + r**2) ** (-(n - 1.0))

    j_quad = integrate_cylindrical(integrand, n, k, s=1.0, tol=tol)
    j_closed = _normalization_integral_closed(n, k, shift)
    if abs(j_quad.value - j_closed) > 1e-7 * abs(j_closed):
        raise InternalConsistencyError(
            f"normalization integral mismatch: quadrature {j_quad.value!r} vs "
            f"Beta composition {j_closed!r}"
        )
    exponent = (n - 2) / (2.0 * (n - 1) ** 2)
    K = ((0.5 * (n - 2)) ** (2 * (n - 1)) * j_quad.value) ** exponent
    lam = K ** (2.0 * (n - 1) / (n - 2))
    k_printed = _k_printed(n, k, shift)
    return SharpConstant(
        n=n, k=k, K=K, Lambda=lam, mu=4.0 * lam / (n - 2) ** 2,
        K_printed=k_printed,
        printed_discrepancy=abs(k_printed - K) / K,
        normalization_integral=j_quad.value,
    )


# ---------------------------------------------------------------------------
# Extremal family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExtremalParams:
    """Dilation lambda and translation y0 selecting one extremal."""

    n: int
    k: int
    lam: float = 1.0
    y0: np.ndarray = field(default=None)

    def __post_init__(self):
        n = _require_int(self.n, "n")
        k = _require_int(self.k, "k")
        if n < 3 or not (2 <= k <= n):
            raise ParameterDomainError(f"need n >= 3 and 2 <= k <= n, got n={n}, k={k}")
        if not self.lam > 0.0:
            raise ParameterDomainError(f"lam must be positive, got {self.lam}")
        y0 = np.zeros(n - k) if self.y0 is None else np.asarray(self.y0, dtype=float)
        if y0.shape != (n - k,):
            raise ParameterDomainError(
                f"y0 must be a point in R^{n - k}, got shape {y0.shape}"
            )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "y0", y0)

    @property
    def a(self) -> int:
        return self.k - 1


def extremal_profile(params: ExtremalParams, constant: SharpConstant):
    """Cylindrical profile (rho, r) -> v of the extremal, r = |y - y0|.

    The prefactor appears in two printed shapes,
    lam^-(n-2) (4/(n-2)^2)^(-(n-2)/2) K^-(n-1) and
    lam^-(n-2) ((n-2)/2)^(n-2) K^-(n-1); their equality (and the equivalent
    Lambda^(-(n-2)/2) form) is asserted here, once, before any evaluation.
    """
    if (params.n, params.k) != (constant.n, constant.k):
        raise ParameterDomainError(
            f"extremal params (n={params.n}, k={params.k}) do not match "
            f"constant (n={constant.n}, k={constant.k})"
        )
    n, lam = params.n, params.lam
    scale = lam ** -(n - 2.0)
    pref_a = scale * (4.0 / (n - 2) ** 2) ** (-0.5 * (n - 2)) * constant.K ** -(n - 1.0)
    pref_b = scale * (0.5 * (n - 2)) ** (n - 2.0) * constant.K ** -(n - 1.0)
    pref_c = scale * (4.0 / (n - 2) ** 2) ** (-0.5 * (n - 2)) * constant.Lambda ** (-0.5 * (n - 2))
    if not (math.isclose(pref_a, pref_b, rel_tol=_REL_TOL)
            and math.isclose(pref_a, pref_c, rel_tol=_REL_TOL)):
        raise InternalConsistencyError(
            f"extremal prefactor forms disagree: {pref_a!r}, {pref_b!r}, {pref_c!r}"
        )
    shift = (n - 2) / (4.0 * params.a * lam**2)

    def profile(rho, r):
        return pref_b * ((rho + shift) ** 2 + np.asarray(r) ** 2) ** (-0.5 * (n - 2))

    return profile


def extremal_v(params: ExtremalParams, constant: SharpConstant, x_norm: float, y) -> float:
    """Evaluate the extremal at (|x|, y); y lives in the R^(n-k) factor."""
    if x_norm < 0.0:
        raise ParameterDomainError(f"x_norm must be >= 0, got {x_norm}")
    if params.n == params.k:
        r = 0.0
    else:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if y.shape != (params.n - params.k,):
            raise ParameterDomainError(
                f"y must lie in R^{params.n - params.k}, got shape {y.shape}"
            )
        r = float(np.linalg.norm(y - params.y0))
    return float(extremal_profile(params, constant)(x_norm, r))


# ---------------------------------------------------------------------------
# Explicit solutions on split factors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShiftedQuadraticParams:
    """Three-parameter family on R^(a+1) x R^(b+1), n = a + b + 2.

    p_coef and q_coef are the source coefficients of the equation the
    solution satisfies; they are derived, never set independently.
    """

    a: int
    b: int
    lam: float = 1.0
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        a = _require_int(self.a, "a")
        b = _require_int(self.b, "b")
        if a < 1 or b < 1:
            raise ParameterDomainError(f"a, b must be positive integers, got {a}, {b}")
        if not self.lam > 0.0:
            raise ParameterDomainError(f"lam must be positive, got {self.lam}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def n(self) -> int:
        return self.a + self.b + 2

    @property
    def p_coef(self) -> float:
        return self.alpha * (self.n - 2) * self.lam**2 * self.a

    @property
    def q_coef(self) -> float:
        return self.beta * (self.n - 2) * self.lam**2 * self.b


def shifted_power_profile(params: ShiftedQuadraticParams):
    """Cylindrical profile (rho, r) -> lam^(2-n) ((rho+alpha)^2+(r+beta)^2)^((2-n)/2)."""
    n, lam, al, be = params.n, params.lam, params.alpha, params.beta

    def profile(rho, r):
        base = (np.asarray(rho) + al) ** 2 + (np.asarray(r) + be) ** 2
        if np.any(base == 0.0):
            raise SingularityError("explicit solution has a pole where "
                                   "|x| + alpha = |y| + beta = 0")
        return lam ** (2.0 - n) * base ** (0.5 * (2.0 - n))

    return profile


def shifted_power_solution(params: ShiftedQuadraticParams, x, y) -> float:
    """Evaluate the explicit solution at x in R^(a+1), y in R^(b+1)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != (params.a + 1,) or y.shape != (params.b + 1,):
        raise ParameterDomainError(
            f"expected x in R^{params.a + 1} and y in R^{params.b + 1}, "
            f"got shapes {x.shape}, {y.shape}"
        )
    return float(shifted_power_profile(params)(np.linalg.norm(x), np.linalg.norm(y)))


def multi_subspace_coefficients(dims, lam: float, offsets) -> tuple[float, ...]:
    """Source coefficients alpha_i (n-2) lam^2 a_i for a multi-factor split."""
    dims = tuple(_require_int(d, "subspace dimension") for d in dims)
    if any(d < 1 for d in dims):
        raise ParameterDomainError(f"subspace dimensions must be >= 1, got {dims}")
    if len(offsets) != len(dims):
        raise ParameterDomainError("one offset per subspace is required")
    n = sum(dims)
    return tuple(float(off) * (n - 2) * lam**2 * (d - 1) for off, d in zip(offsets, dims))


def multi_subspace_solution(dims, lam: float, offsets, radii) -> float:
    """Explicit solution for a split of R^n into several radial factors:

        v = lam^(2-n) ( sum_i (rho_i + offset_i)^2 )^((2-n)/2),

    with n = sum of the factor dimensions.  Satisfies
    Delta v = -v^(n/(n-2)) sum_i coef_i / rho_i with the coefficients from
    :func:`multi_subspace_coefficients`.
    """
    dims = tuple(_require_int(d, "subspace dimension") for d in dims)
    if not lam > 0.0:
        raise ParameterDomainError(f"lam must be positive, got {lam}")
    if not (len(offsets) == len(radii) == len(dims)):
        raise ParameterDomainError("dims, offsets and radii must align")
    n = sum(dims)
    if n < 3:
        raise ParameterDomainError(f"total dimension must exceed 2, got {n}")
    base = sum((float(r) + float(off)) ** 2 for r, off in zip(radii, offsets))
    if base == 0.0:
        raise SingularityError("explicit solution has a pole at this point")
    return lam ** (2.0 - n) * base ** (0.5 * (2.0 - n))


# ---------------------------------------------------------------------------
# Fundamental solution and Kelvin transform
# ---------------------------------------------------------------------------

def fundamental_solution(n: int, z_norm: float) -> float:
    """Positive fundamental solution of the Laplacian,
    (n(n-2) omega_n)^(-1) |z|^(2-n), omega_n the unit-ball volume."""
    n = _require_int(n, "n")
    if n <= 2:
        raise ParameterDomainError(f"need n > 2, got n={n}")
    if z_norm == 0.0:
        raise SingularityError("fundamental solution is singular at z = 0")
    if z_norm < 0.0:
        raise ParameterDomainError(f"z_norm must be >= 0, got {z_norm}")
    return z_norm ** (2.0 - n) / (n * (n - 2) * ball_volume(n))


def kelvin_transform(u, n: int):
    """Inversion (Ku)(z) = |z|^(2-n) u(z / |z|^2) as a function on points.

    An involution, and an isometry of the Dirichlet energy for functions
    supported away from the puncture; evaluation at z = 0 is refused.
    """
    n = _require_int(n, "n")
    if n <= 2:
        raise ParameterDomainError(f"need n > 2, got n={n}")

    def transformed(z):
        z = np.asarray(z, dtype=float)
        norm_sq = float(np.dot(z, z))
        if norm_sq == 0.0:
            raise SingularityError("Kelvin transform is singular at z = 0")
        return norm_sq ** (0.5 * (2.0 - n)) * u(z / norm_sq)

    return transformed
