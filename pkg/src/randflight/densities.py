"""Closed-form densities of conditional and standard random flights.

Conditional laws share the isotropic form

    h(z) = alpha * t**(-gamma) * (c^2 t^2 - |z|^2)**beta,   |z| < c t,

with model-dependent ``alpha``, ``beta`` and ``gamma`` (see
:class:`IsotropicDensity`).  Standard flights in d = 2 and d = 4 have an
absolutely continuous part on the open ball plus an atom of mass
``exp(-lam t)`` spread on the sphere of radius ``c t``; only the former is
a density here, the atom is carried as its scalar weight.

Radial integrals use the substitution ``rho = c t sin(theta)`` followed by
Gauss-Legendre, which removes the integrable boundary singularity that
appears when ``beta < 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, InvalidParameterError
from .sampling import dirichlet_shape

LOG_PI = math.log(math.pi)
QUAD_NODES = 256


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


@dataclass(frozen=True)
class IsotropicDensity:
    """Density of a conditional flight endpoint given ``n`` direction changes.

    ``alpha``, ``beta`` and ``gamma_exp`` are derived from ``(model, d, n, c)``;
    ``alpha`` is kept in log form internally because the Gamma ratios overflow
    quickly in ``n * d``.
    """

    model: str
    d: int
    n: int
    c: float = 1.0
    t: float = 1.0
    log_alpha: float = field(init=False, repr=False)
    beta: float = field(init=False)
    gamma_exp: float = field(init=False)

    def __post_init__(self):
        dirichlet_shape(self.model, self.d)
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameterError(f"change count n must be an integer >= 1, got {self.n}")
        if not (self.c > 0 and self.t > 0):
            raise InvalidParameterError("c and t must be positive")
        n, d = int(self.n), int(self.d)
        if self.model == "X":
            gamma_exp = (n + 1) * (d - 1) - 1
            beta = n * (d - 1) / 2 - 1
            log_num = gammaln((n + 1) * (d - 1) / 2 + 0.5)
            log_den = gammaln(n * (d - 1) / 2)
        else:
            gamma_exp = 2 * (n + 1) * (d / 2 - 1)
            beta = n * (d / 2 - 1) - 1
            log_num = gammaln((n + 1) * (d / 2 - 1) + 1)
            log_den = gammaln(n * (d / 2 - 1))
        log_alpha = log_num - log_den - (d / 2) * LOG_PI - gamma_exp * math.log(self.c)
        object.__setattr__(self, "log_alpha", float(log_alpha))
        object.__setattr__(self, "beta", float(beta))
        object.__setattr__(self, "gamma_exp", float(gamma_exp))

    @property
    def alpha(self) -> float:
        return math.exp(self.log_alpha)

    @property
    def radius(self) -> float:
        return self.c * self.t

    def log_h(self, gap):
        """log density as a function of ``gap = (c t)^2 - |z|^2 > 0``."""
        return self.log_alpha - self.gamma_exp * math.log(self.t) + self.beta * np.log(gap)


def _norm(z):
    z = np.asarray(z, dtype=float)
    return np.sqrt(np.einsum("...i,...i->...", z, z))


def _gap(R, rho):
    return (R - rho) * (R + rho)


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def conditional_density(params: IsotropicDensity, z):
    """``h(z)`` at a point (shape ``(d,)``) or at a stack of points (``(..., d)``).

    Zero on and outside the sphere of radius ``c t``.
    """
    r = _norm(z)
    R = params.radius
    inside = r < R
    gap = np.where(inside, _gap(R, r), 1.0)
    out = np.where(inside, np.exp(params.log_h(gap)), 0.0)
    return _scalar_or_array(out)


def _radial_conditional(params: IsotropicDensity, rho, gap):
    d = params.d
    with np.errstate(divide="ignore"):
        log_rho = np.log(rho)
    return np.exp(params.log_h(gap) + math.log(sphere_area(d)) + (d - 1) * log_rho)


def radial_marginal(params: IsotropicDensity, rho):
    """Density of ``|endpoint|`` at ``rho`` in ``[0, c t)``."""
    rho_arr = np.asarray(rho, dtype=float)
    R = params.radius
    if np.any(rho_arr < 0) or np.any(rho_arr >= R):
        raise DomainError(f"rho must lie in [0, {R}), got {rho}")
    return _scalar_or_array(_radial_conditional(params, rho_arr, _gap(R, rho_arr)))


@lru_cache(maxsize=8)
def _gauss_legendre(nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def radial_integral(f, R: float, lo: float = 0.0, hi: float | None = None, nodes: int = QUAD_NODES) -> float:
    """Integrate ``f(rho, gap)`` over ``[lo, hi]`` within ``[0, R]``, with ``gap = R^2 - rho^2``.

    Uses ``rho = R sin(theta)``; the Jacobian ``R cos(theta)`` cancels an
    inverse square-root singularity at ``rho = R``.  ``gap`` is passed as
    ``(R cos(theta))^2`` to avoid cancellation near the boundary.
    """
    hi = R if hi is None else hi
    if not 0 <= lo <= hi <= R:
        raise DomainError(f"need 0 <= lo <= hi <= R, got lo={lo}, hi={hi}, R={R}")
    if hi == lo:
        return 0.0
    a = math.asin(lo / R)
    b = math.pi / 2 if hi == R else math.asin(hi / R)
    x, w = _gauss_legendre(nodes)
    theta = 0.5 * (b - a) * x + 0.5 * (b + a)
    cos = np.cos(theta)
    rho = R * np.sin(theta)
    vals = f(rho, (R * cos) ** 2) * R * cos
    return float(0.5 * (b - a) * np.dot(w, vals))


def conditional_mass(params: IsotropicDensity, lo: float = 0.0, hi: float | None = None) -> float:
    """Probability that ``|endpoint|`` falls in ``[lo, hi]``."""
    R = params.radius
    hi = R if hi is None else min(hi, R)
    lo = min(max(lo, 0.0), R)
    return radial_integral(lambda rho, gap: _radial_conditional(params, rho, gap), R, lo, max(lo, hi))


def _check_standard(d, lam, c, t):
    if d not in (2, 4):
        raise InvalidParameterError(f"standard densities exist for d in {{2, 4}}, got {d}")
    if not (lam > 0 and c > 0 and t > 0):
        raise InvalidParameterError("lam, c and t must be positive")


def _ac2_from_gap(lam, c, t, gap):
    s = np.sqrt(gap)
    return lam / (2 * math.pi * c) * np.exp(-lam * t + lam / c * s) / s


def _ac4_from_r2(lam, c, t, r2, gap):
    k = lam / (c * c * t)
    return lam / (c**4 * t**3 * math.pi**2) * np.exp(-k * r2) * (2.0 + k * gap)


def standard_ac_density_2d(lam: float, c: float, t: float, z):
    """Absolutely continuous part of the planar standard flight law at ``z``."""
    _check_standard(2, lam, c, t)
    r = _norm(z)
    R = c * t
    inside = r < R
    gap = np.where(inside, _gap(R, r), 1.0)
    return _scalar_or_array(np.where(inside, _ac2_from_gap(lam, c, t, gap), 0.0))


def standard_ac_density_4d(lam: float, c: float, t: float, z):
    """Absolutely continuous part of the four-dimensional standard flight law at ``z``."""
    _check_standard(4, lam, c, t)
    r = _norm(z)
    R = c * t
    inside = r < R
    return _scalar_or_array(np.where(inside, _ac4_from_r2(lam, c, t, r * r, _gap(R, r)), 0.0))


def standard_ac_density(d: int, lam: float, c: float, t: float, z):
    if d == 2:
        return standard_ac_density_2d(lam, c, t, z)
    if d == 4:
        return standard_ac_density_4d(lam, c, t, z)
    _check_standard(d, lam, c, t)


def _radial_standard(d, lam, c, t, rho, gap):
    if d == 2:
        return 2 * math.pi * rho * _ac2_from_gap(lam, c, t, gap)
    return 2 * math.pi**2 * rho**3 * _ac4_from_r2(lam, c, t, rho * rho, gap)


def standard_radial_density(d: int, lam: float, c: float, t: float, rho):
    """Radial density of the absolutely continuous part, ``rho`` in ``[0, c t)``."""
    _check_standard(d, lam, c, t)
    rho_arr = np.asarray(rho, dtype=float)
    R = c * t
    if np.any(rho_arr < 0) or np.any(rho_arr >= R):
        raise DomainError(f"rho must lie in [0, {R}), got {rho}")
    return _scalar_or_array(_radial_standard(d, lam, c, t, rho_arr, _gap(R, rho_arr)))


def standard_ac_mass(d: int, lam: float, c: float, t: float, lo: float = 0.0, hi: float | None = None) -> float:
    """Absolutely continuous mass of ``{lo <= |z| <= hi}``; the full ball gives ``1 - exp(-lam t)``."""
    _check_standard(d, lam, c, t)
    R = c * t
    hi = R if hi is None else min(hi, R)
    lo = min(max(lo, 0.0), R)
    return radial_integral(lambda rho, gap: _radial_standard(d, lam, c, t, rho, gap), R, lo, max(lo, hi))


def singular_weight(lam: float, t: float) -> float:
    """Mass of the no-change atom on the sphere of radius ``c t``."""
    return math.exp(-lam * t)


def standard_tail_probability(d: int, lam: float, c: float, t: float, radius: float) -> float:
    """``P(|Z_d(t)| > radius)`` including the atom, by radial quadrature."""
    R = c * t
    if radius >= R:
        return 0.0
    return standard_ac_mass(d, lam, c, t, max(radius, 0.0), R) + singular_weight(lam, t)


def conditional_tail_probability(params: IsotropicDensity, radius: float) -> float:
    if radius >= params.radius:
        return 0.0
    return conditional_mass(params, max(radius, 0.0))


def _mixture_component(d, n, c, t):
    return IsotropicDensity("X" if d == 2 else "Y", d, n, c, t)


def poisson_mixture_density(d: int, lam: float, c: float, t: float, z, n_max: int = 80, tol: float = 1e-12):
    """Poisson(lam t) mixture of the conditional densities, ``n = 1 .. n_max``.

    Model X components are used for d = 2 and model Y for d = 4; for these
    the Dirichlet durations are uniform spacings, so the sum reproduces the
    absolutely continuous part of the standard law.  Summation stops early
    once the remaining terms are bounded by ``tol``: for ``beta >= 0`` each
    component is maximal at the origin, and the origin values times the
    Poisson weights have decreasing successive ratios, so a geometric tail
    bound applies.
    """
    _check_standard(d, lam, c, t)
    if n_max < 1:
        raise InvalidParameterError(f"n_max must be >= 1, got {n_max}")
    mu = lam * t
    r = _norm(z)
    R = c * t
    inside = r < R
    gap = np.where(inside, _gap(R, r), 1.0)
    total = np.zeros_like(r)

    def log_weight(n):
        return -mu + n * math.log(mu) - math.lgamma(n + 1)

    def origin_bound(n):
        comp = _mixture_component(d, n, c, t)
        return math.exp(log_weight(n) + float(comp.log_h(R * R)))

    for n in range(1, n_max + 1):
        comp = _mixture_component(d, n, c, t)
        total = total + np.exp(log_weight(n) + comp.log_h(gap))
        if n + 2 > n_max:
            continue
        if _mixture_component(d, n + 1, c, t).beta < 0:
            continue
        b1, b2 = origin_bound(n + 1), origin_bound(n + 2)
        q = b2 / b1
        if q < 1 and b1 / (1 - q) < tol:
            break
    return _scalar_or_array(np.where(inside, total, 0.0))
