"""Exponent calculus for the weighted Sobolev embedding.

The ambient space is R^n = R^k x R^(n-k) and the weight |x|^(-s) measures
distance to the (n-k)-dimensional subspace {x = 0}.  This module holds all
the derived exponents (the weighted critical exponent, Hoelder conjugates,
the r/r' pair, the decay bound) plus the admissibility predicate that every
other module consults before computing anything.

All functions are pure and stateless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .errors import ParameterDomainError

__all__ = [
    "ExponentContext",
    "ExponentReport",
    "hs_conjugate",
    "critical_pair",
    "admissible",
    "aux_exponents",
    "galaxy_mass_window",
    "galaxy_mass_inside",
]


def _as_int(value, name: str) -> int:
    if isinstance(value, bool) or value != int(value):
        raise ParameterDomainError(f"{name} must be an integer, got {value!r}")
    return int(value)


def _check_ps(p: float, s: float, n: int) -> None:
    if not (1.0 < p < n):
        raise ParameterDomainError(f"need 1 < p < n, got p={p}, n={n}")
    if not (0.0 <= s <= p):
        raise ParameterDomainError(f"need 0 <= s <= p, got s={s}, p={p}")


@dataclass(frozen=True)
class ExponentContext:
    """Parameter quadruple (n, k, p, s).

    The constructor enforces the hard ranges (integer n >= 3, integer
    2 <= k <= n, 1 < p < n, 0 <= s <= p).  The remaining conditions s < k
    and s(n-k) < k(n-p) are what :func:`admissible` reports, so that
    out-of-window contexts can be *represented* and classified rather than
    being unconstructible.
    """

    n: int
    k: int
    p: float
    s: float

    def __post_init__(self):
        n = _as_int(self.n, "n")
        k = _as_int(self.k, "k")
        if n < 3:
            raise ParameterDomainError(f"need n >= 3, got n={n}")
        if not (2 <= k <= n):
            raise ParameterDomainError(f"need 2 <= k <= n, got k={k}, n={n}")
        _check_ps(self.p, self.s, n)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "s", float(self.s))


@dataclass(frozen=True)
class ExponentReport:
    """Every derived exponent of an admissible context in one bundle."""

    p_star_s: float
    p_prime: float
    r: float
    r_prime: float  # math.inf at the endpoint s = p
    sigma: float
    p_sigma: float
    decay_bound: float
    kappa: Callable[[float], float] = field(repr=False)


def hs_conjugate(p: float, s: float, n: int) -> float:
    """Weighted critical exponent p(n-s)/(n-p).

    Interpolates between the Sobolev conjugate np/(n-p) at s = 0 and p
    itself at s = p.
    """
    n = _as_int(n, "n")
    _check_ps(p, s, n)
    return p * (n - s) / (n - p)


def critical_pair(p: float, s: float, n: int) -> tuple[float, float]:
    """The pair (r, r') with r = n/(n-p+s) and r' its Hoelder conjugate.

    r' equals p*/(p*(s) - p), which simplifies to n/(p-s); at the endpoint
    s = p it is reported as an explicit math.inf, never as an overflow.
    """
    n = _as_int(n, "n")
    _check_ps(p, s, n)
    r = n / (n - p + s)
    if s == p:
        return r, math.inf
    return r, n / (p - s)


def admissible(ctx: ExponentContext) -> bool:
    """True iff 1<p<n, 0<=s<=p, s<k and s(n-k) < k(n-p) all hold.

    The last condition guarantees r*s < k, so the weighted embedding with
    exponent r*s is still available during iteration arguments.
    """
    n, k, p, s = ctx.n, ctx.k, ctx.p, ctx.s
    if not (1.0 < p < n and 0.0 <= s <= p):
        return False
    if not s < k:
        return False
    return s * (n - k) < k * (n - p)


def aux_exponents(ctx: ExponentContext) -> ExponentReport:
    """Fill an :class:`ExponentReport` for an admissible context.

    sigma is s(n-p)/(2p(n-s)) and p_sigma is the critical exponent that
    appears when the inequality is rewritten with the weight split off as
    |x|^(-sigma * p_sigma); decay_bound (n-p)/(p-1) is the supremum of the
    guaranteed decay rates of finite-energy solutions.
    """
    if not admissible(ctx):
        raise ParameterDomainError(f"context {ctx} is not admissible")
    n, k, p, s = ctx.n, ctx.k, ctx.p, ctx.s
    r, r_prime = critical_pair(p, s, n)
    t_sup = min(p, s)

    def kappa(t: float) -> float:
        if not (0.0 <= t < t_sup):
            raise ParameterDomainError(
                f"kappa defined for 0 <= t < min(p, s) = {t_sup}, got t={t}"
            )
        return hs_conjugate(p, t, n) / p

    return ExponentReport(
        p_star_s=hs_conjugate(p, s, n),
        p_prime=p / (p - 1.0),
        r=r,
        r_prime=r_prime,
        sigma=s * (n - p) / (2.0 * p * (n - s)),
        p_sigma=hs_conjugate(p, s, n),
        decay_bound=(n - p) / (p - 1.0),
        kappa=kappa,
    )


def galaxy_mass_window(gamma: float) -> tuple[float, float]:
    """Exponent window (2*(gamma), 6) for the n = 3 stellar-dynamics model.

    For a potential with weight decay exponent gamma in (0, 2), solutions
    with nonlinearity exponent q strictly inside the window have finite
    mass.  2*(gamma) = 2(3-gamma)/(3-2).
    """
    if not (0.0 < gamma < 2.0):
        raise ParameterDomainError(f"need 0 < gamma < 2, got {gamma}")
    return 2.0 * (3.0 - gamma), 6.0


def galaxy_mass_inside(q: float, gamma: float) -> bool:
    """True iff q lies strictly inside the finite-mass window."""
    low, high = galaxy_mass_window(gamma)
    return low < q < high
