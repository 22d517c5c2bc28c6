"""Large deviation rate functions of random flights, as functions of the radius.

All rates are radial, vanish at the origin and are nondecreasing on
``[0, c]``.  ``math.inf`` stands for an infinite rate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

KINDS = ("conditional_X", "conditional_Y", "standard_2d", "standard_4d", "brownian_limit")


def _positive(name, value):
    if not (value is not None and np.isfinite(value) and value > 0):
        raise InvalidParameterError(f"{name} must be a positive finite number, got {value}")


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def b_limit(model: str, d: int, w: float) -> float:
    """Limit of ``beta(t w_t) / t``; half the limit of ``gamma(t w_t) / t``."""
    _positive("w", w)
    if model == "X" and d >= 2:
        return w * (d - 1) / 2
    if model == "Y" and d >= 3:
        return w * (d / 2 - 1)
    raise InvalidParameterError(f"invalid model/dimension ({model!r}, {d})")


def _log_escape(c, r):
    # log(c / sqrt(c^2 - r^2)) for r < c
    return -0.5 * np.log1p(-(r / c) ** 2)


def conditional_rate(model: str, d: int, c: float, w: float, r):
    """``2 b(w) log(c / sqrt(c^2 - r^2))`` inside the open ball, infinite from ``r = c`` on."""
    _positive("c", c)
    b = b_limit(model, d, w)
    r = np.asarray(r, dtype=float)
    inside = r < c
    safe = np.where(inside, r, 0.0)
    return _out(np.where(inside, 2.0 * b * _log_escape(c, safe), math.inf))


def standard_rate_2d(lam: float, c: float, r):
    """``lam (1 - sqrt(1 - r^2/c^2))`` on ``[0, c]``, infinite beyond."""
    _positive("lam", lam)
    _positive("c", c)
    r = np.asarray(r, dtype=float)
    inside = r <= c
    x = np.where(inside, (r / c) ** 2, 0.0)
    # rationalised form keeps relative accuracy for small r
    val = lam * x / (1.0 + np.sqrt(1.0 - x))
    return _out(np.where(inside, val, math.inf))


def standard_rate_4d(lam: float, c: float, r):
    """``(lam / c^2) r^2`` on ``[0, c]``, infinite beyond."""
    _positive("lam", lam)
    _positive("c", c)
    r = np.asarray(r, dtype=float)
    return _out(np.where(r <= c, lam / (c * c) * r * r, math.inf))


def brownian_limit_rate(sigma2: float, r):
    _positive("sigma2", sigma2)
    r = np.asarray(r, dtype=float)
    return _out(r * r / (2.0 * sigma2))


@dataclass(frozen=True)
class RateFunction:
    """A radial rate function with its parameters.

    Use the classmethod constructors; calling the instance evaluates it at a
    radius or an array of radii.
    """

    kind: str
    c: float = 1.0
    d: int | None = None
    w: float | None = None
    lam: float | None = None
    sigma2: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "brownian_limit":
            _positive("sigma2", self.sigma2)
            return
        _positive("c", self.c)
        if self.kind.startswith("conditional"):
            b_limit(self.kind[-1], self.d, self.w)
        else:
            _positive("lam", self.lam)

    @classmethod
    def conditional(cls, model: str, d: int, c: float, w: float) -> "RateFunction":
        return cls(f"conditional_{model}", c=c, d=d, w=w)

    @classmethod
    def standard(cls, d: int, lam: float, c: float) -> "RateFunction":
        if d not in (2, 4):
            raise InvalidParameterError(f"standard rates exist for d in {{2, 4}}, got {d}")
        return cls(f"standard_{d}d", c=c, d=d, lam=lam)

    @classmethod
    def brownian(cls, sigma2: float, d: int | None = None) -> "RateFunction":
        return cls("brownian_limit", c=math.inf, d=d, sigma2=sigma2)

    @property
    def param(self) -> float:
        """The rate parameter: ``w`` for conditional kinds, ``lam`` for standard, ``sigma2`` otherwise."""
        if self.kind.startswith("conditional"):
            return self.w
        if self.kind == "brownian_limit":
            return self.sigma2
        return self.lam

    def __call__(self, r):
        if self.kind.startswith("conditional"):
            return conditional_rate(self.kind[-1], self.d, self.c, self.w, r)
        if self.kind == "standard_2d":
            return standard_rate_2d(self.lam, self.c, r)
        if self.kind == "standard_4d":
            return standard_rate_4d(self.lam, self.c, r)
        return brownian_limit_rate(self.sigma2, r)


def rate_inf_over_tail(rate: RateFunction, r):
    """Infimum of ``rate`` over ``{|z| >= r}``; by radial monotonicity this is ``rate(r)``."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise InvalidParameterError(f"threshold must be nonnegative, got {r}")
    return rate(r_arr)


def crossing_radius_4d(lam: float, c: float, w: float, tol: float = 1e-12):
    """Radius multiple where the conditional and standard d = 4 rates cross.

    For ``0 < w < lam`` solves ``-w log(1 - u) = lam u`` for ``u = gamma^2`` by
    bisection on ``(xi^2, 1 - 1e-12)``, where ``xi = sqrt(1 - w/lam)`` is the
    minimiser of the difference.  Returns ``(gamma, xi)``.
    """
    _positive("lam", lam)
    _positive("c", c)
    _positive("w", w)
    if w >= lam:
        raise InvalidParameterError(
            f"w={w} >= lam={lam}: the conditional rate dominates everywhere, there is no crossing"
        )
    xi = math.sqrt(1.0 - w / lam)

    def g(u):
        return -w * math.log1p(-u) - lam * u

    lo, hi = xi * xi, 1.0 - 1e-12
    g_lo, g_hi = g(lo), g(hi)
    assert g_lo < 0 < g_hi, "crossing bracket lost its sign change"
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    gamma = math.sqrt(0.5 * (lo + hi))
    return gamma, xi


@dataclass
class RateComparison:
    """Pointwise comparison of two rates on a grid of radii."""

    radii: np.ndarray
    values_a: np.ndarray
    values_b: np.ndarray
    sign: np.ndarray

    @property
    def a_dominates(self) -> np.ndarray:
        return self.sign > 0

    @property
    def b_dominates(self) -> np.ndarray:
        return self.sign < 0

    @property
    def equal(self) -> np.ndarray:
        return self.sign == 0

    def sign_changes(self) -> list[tuple[float, float]]:
        """Grid intervals ``(r_i, r_j)`` across which the strict ordering flips."""
        nz = np.flatnonzero(self.sign != 0)
        return [
            (float(self.radii[i]), float(self.radii[j]))
            for i, j in zip(nz[:-1], nz[1:])
            if self.sign[i] != self.sign[j]
        ]

    def rows(self):
        for r, a, b, s in zip(self.radii, self.values_a, self.values_b, self.sign):
            yield float(r), float(a), float(b), int(s)


def compare_rates(rate_a: RateFunction, rate_b: RateFunction, grid) -> RateComparison:
    """Tabulate both rates and the sign of ``a - b``; equal infinities count as ties."""
    radii = np.asarray(grid, dtype=float)
    a = np.asarray(rate_a(radii), dtype=float)
    b = np.asarray(rate_b(radii), dtype=float)
    both_inf = np.isinf(a) & np.isinf(b)
    with np.errstate(invalid="ignore"):
        sign = np.where(both_inf, 0, np.sign(a - b)).astype(int)
    return RateComparison(radii, a, b, sign)


def analytic_rate(model: str, d: int, c: float, r: float, lam: float | None = None, w: float | None = None) -> float:
    """Rate at threshold ``r`` for the flight family with the given parameters."""
    if model == "Z":
        return float(rate_inf_over_tail(RateFunction.standard(d, lam, c), r))
    return float(rate_inf_over_tail(RateFunction.conditional(model, d, c, w), r))
