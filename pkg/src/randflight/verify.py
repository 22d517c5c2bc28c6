"""Monte Carlo checks of the large deviation behaviour of random flights.

Samples are drawn in fixed chunks of :data:`CHUNK_SIZE`; chunk ``i`` always
uses ``rng.substream(i)``, so estimates do not depend on the number of
worker threads.  Only event counts are aggregated.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import InfeasibleExperimentError, InsufficientSamplesError, InvalidParameterError
from .flights import FlightSpec, sample_batch
from .rates import analytic_rate
from .sampling import RngStream

CHUNK_SIZE = 16384
CONFIDENCE = 0.99
MIN_EVENTS = 50
MIN_SAMPLES = 1000


def wilson_interval(k: int, n: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise InvalidParameterError("need at least one trial")
    z = stats.norm.ppf(0.5 + confidence / 2)
    p = k / n
    z2n = z * z / n
    centre = (p + z2n / 2) / (1 + z2n)
    half = z / (1 + z2n) * math.sqrt(p * (1 - p) / n + z2n / (4 * n))
    return max(0.0, min(p, centre - half)), min(1.0, max(p, centre + half))


def _rate(p: float, t: float) -> float:
    return math.inf if p <= 0 else max(0.0, -math.log(p) / t)


@dataclass(frozen=True)
class TailEstimate:
    """Estimate of ``P(|X(t)| / t > r)`` with a 99% Wilson interval."""

    t: float
    r: float
    count: int
    n_samples: int
    p_hat: float
    ci_low: float
    ci_high: float

    @classmethod
    def from_count(cls, t, r, count, n_samples):
        lo, hi = wilson_interval(count, n_samples)
        return cls(float(t), float(r), int(count), int(n_samples), count / n_samples, lo, hi)

    @property
    def empirical_rate(self) -> float:
        return _rate(self.p_hat, self.t)

    @property
    def rate_ci(self) -> tuple[float, float]:
        """Rate interval implied by the probability interval (low rate first)."""
        return _rate(self.ci_high, self.t), _rate(self.ci_low, self.t)

    @property
    def rate_halfwidth(self) -> float:
        lo, hi = self.rate_ci
        return 0.5 * (hi - lo)


def _run_chunks(n_samples: int, rng: RngStream, work, threads: int = 1):
    n_chunks = -(-int(n_samples) // CHUNK_SIZE)
    sizes = [min(CHUNK_SIZE, n_samples - i * CHUNK_SIZE) for i in range(n_chunks)]

    def job(i):
        return work(rng.substream(i), sizes[i])

    if threads <= 1:
        results = [job(i) for i in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, range(n_chunks)))
    return np.sum(np.asarray(results, dtype=np.int64), axis=0)


def _check_tail_args(r, n_samples):
    if not (np.isfinite(r) and r >= 0):
        raise InvalidParameterError(f"threshold r must be a nonnegative number, got {r}")
    if n_samples < MIN_SAMPLES:
        raise InvalidParameterError(f"n_samples must be >= {MIN_SAMPLES}, got {n_samples}")


def estimate_tail(spec: FlightSpec, r: float, n_samples: int, rng: RngStream, threads: int = 1) -> TailEstimate:
    """Fraction of simulated endpoints with ``|X(t)| / t > r``.

    ``r`` is a speed; thresholds at or beyond ``c`` are allowed and give a
    zero estimate for conditional flights (the endpoint is strictly inside
    the ball) and at most the no-change atom for standard ones.
    """
    _check_tail_args(r, n_samples)
    threshold = r * spec.t

    def work(stream, size):
        batch = sample_batch(spec, stream, size)
        return (int(np.count_nonzero(batch.norms > threshold)),)

    (count,) = _run_chunks(n_samples, rng, work, threads)
    return TailEstimate.from_count(spec.t, r, count, n_samples)


def spec_rate(spec: FlightSpec, r: float) -> float:
    """Analytic rate targeted by tail estimates of ``spec`` at threshold ``r``."""
    if spec.conditional and spec.w is None:
        raise InvalidParameterError("a fixed change count has no decay rate; give the change rate w instead")
    return analytic_rate(spec.model, spec.d, spec.c, r, lam=spec.lam, w=spec.w)


def max_feasible_t(rate: float, n_samples: int) -> float:
    """Largest horizon at which ``exp(-t rate)`` still yields ``MIN_EVENTS`` expected events."""
    if rate <= 0:
        return math.inf
    return math.log(n_samples / MIN_EVENTS) / rate


def check_feasibility(spec: FlightSpec, r: float, n_samples: int) -> float:
    """Refuse experiments whose predicted probability ``exp(-t * rate)`` is below ``MIN_EVENTS / n_samples``.

    Returns the predicted probability otherwise.
    """
    rate = spec_rate(spec, r)
    predicted = math.exp(-spec.t * rate) if math.isfinite(rate) else 0.0
    if predicted * n_samples < MIN_EVENTS:
        t_max = max_feasible_t(rate, n_samples) if math.isfinite(rate) else 0.0
        raise InfeasibleExperimentError(
            f"predicted probability exp(-{spec.t:g}*{rate:.6g}) = {predicted:.3g} is below "
            f"{MIN_EVENTS}/{n_samples}; use t <= {t_max:.4g} or more samples",
            suggested_t_max=t_max,
        )
    return predicted


@dataclass
class RateFit:
    """Least-squares fit of ``log p_t = a + slope * t``."""

    t_grid: np.ndarray
    estimates: list[TailEstimate]
    slope: float
    slope_ci: tuple[float, float]
    intercept: float
    analytic: float

    @property
    def decay_rate(self) -> float:
        return -self.slope

    @property
    def decay_ci(self) -> tuple[float, float]:
        return -self.slope_ci[1], -self.slope_ci[0]


def fit_decay_rate(
    spec_template: FlightSpec,
    r: float,
    t_grid,
    n_samples_per_t: int,
    rng: RngStream,
    threads: int = 1,
    gate: bool = True,
) -> RateFit:
    """Estimate tails on a grid of horizons and regress their logarithm on ``t``.

    Horizon ``k`` of the grid uses ``rng.substream(k)``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size < 3 or np.any(np.diff(t_grid) <= 0):
        raise InvalidParameterError("t_grid needs at least 3 increasing horizons")
    specs = [spec_template.at(t) for t in t_grid]
    if gate:
        for s in specs:
            check_feasibility(s, r, n_samples_per_t)
    estimates = []
    for k, s in enumerate(specs):
        est = estimate_tail(s, r, n_samples_per_t, rng.substream(k), threads)
        if est.count == 0:
            raise InsufficientSamplesError(f"no tail events observed at t={s.t:g}", t=s.t)
        estimates.append(est)
    logp = np.log([e.p_hat for e in estimates])
    reg = stats.linregress(t_grid, logp)
    q = stats.t.ppf(0.5 + CONFIDENCE / 2, t_grid.size - 2)
    ci = (reg.slope - q * reg.stderr, reg.slope + q * reg.stderr)
    return RateFit(t_grid, estimates, float(reg.slope), (float(ci[0]), float(ci[1])),
                   float(reg.intercept), spec_rate(spec_template, r))


def exit_bound(d: int, lam: float, c: float, r: float) -> float:
    """Rate in the asymptotic lower bound for the exit probability, from the endpoint LDP."""
    return analytic_rate("Z", d, c, r, lam=lam)


@dataclass(frozen=True)
class ExitEstimate:
    """Exit probability estimate alongside the endpoint tail from the same paths."""

    exit: TailEstimate
    endpoint: TailEstimate
    ell: float
    inclusion_violations: int = 0

    @property
    def bound_slack(self) -> float:
        return 2.0 * self.exit.rate_halfwidth

    @property
    def within_bound(self) -> bool:
        return self.exit.empirical_rate <= self.ell + self.bound_slack


def estimate_exit_probability(
    spec: FlightSpec, r: float, n_samples: int, rng: RngStream, threads: int = 1, gate: bool = True
) -> ExitEstimate:
    """Estimate ``P(sup_s |Z(s)| > r t)`` from full paths.

    Every path that ends outside the ball of radius ``r t`` has left it, so
    the exit count dominates the endpoint count path by path; this is
    asserted on every chunk.
    """
    if spec.model != "Z":
        raise InvalidParameterError("exit probabilities are estimated for standard flights (model Z)")
    _check_tail_args(r, n_samples)
    if not 0 < r < spec.c:
        raise InvalidParameterError(f"need 0 < r < c, got r={r}")
    if gate:
        check_feasibility(spec, r, n_samples)
    threshold = r * spec.t

    def work(stream, size):
        batch = sample_batch(spec, stream, size, track_max=True)
        ended_out = batch.norms > threshold
        exited = batch.max_norms > threshold
        violations = int(np.count_nonzero(ended_out & ~exited))
        assert violations == 0, "a path ended outside the ball without exiting it"
        return int(np.count_nonzero(exited)), int(np.count_nonzero(ended_out)), violations

    n_exit, n_end, violations = _run_chunks(n_samples, rng, work, threads)
    return ExitEstimate(
        TailEstimate.from_count(spec.t, r, n_exit, n_samples),
        TailEstimate.from_count(spec.t, r, n_end, n_samples),
        exit_bound(spec.d, spec.lam, spec.c, r),
        int(violations),
    )


@dataclass
class RaceResult:
    """Tail probabilities of two families outside a ball, and their ratio over ``t``."""

    t_grid: np.ndarray
    tails_a: list[TailEstimate]
    tails_b: list[TailEstimate]
    predicted_log_ratio_slope: float
    ratio: np.ndarray = field(init=False)
    log_ratio_slope: float = field(init=False)

    def __post_init__(self):
        pa = np.array([e.p_hat for e in self.tails_a])
        pb = np.array([e.p_hat for e in self.tails_b])
        with np.errstate(divide="ignore", invalid="ignore"):
            self.ratio = pa / pb
        if np.all(pa > 0) and np.all(pb > 0):
            self.log_ratio_slope = float(stats.linregress(self.t_grid, np.log(self.ratio)).slope)
        else:
            self.log_ratio_slope = math.nan

    @property
    def eventually_decreasing(self) -> bool:
        """Ratio trends down over the grid and ends below where it started."""
        return bool(self.log_ratio_slope < 0 and self.ratio[-1] < self.ratio[0])


def convergence_race(
    spec_a: FlightSpec,
    spec_b: FlightSpec,
    radius: float,
    t_grid,
    n_samples: int,
    rng: RngStream,
    threads: int = 1,
) -> RaceResult:
    """Compare how fast two families concentrate inside the ball of ``radius``.

    If the rate of ``a`` exceeds that of ``b`` near the origin, the ratio of
    their tail probabilities should decay like ``exp(-t (I_a - I_b))``.
    Family ``a`` draws from ``rng.substream(0)``, family ``b`` from
    ``rng.substream(1)``.
    """
    if spec_a.c != spec_b.c:
        raise InvalidParameterError("both families must share the speed c")
    t_grid = np.asarray(t_grid, dtype=float)
    ra, rb = rng.substream(0), rng.substream(1)
    tails_a = [estimate_tail(spec_a.at(t), radius, n_samples, ra.substream(k), threads) for k, t in enumerate(t_grid)]
    tails_b = [estimate_tail(spec_b.at(t), radius, n_samples, rb.substream(k), threads) for k, t in enumerate(t_grid)]
    predicted = -(spec_rate(spec_a, radius) - spec_rate(spec_b, radius))
    return RaceResult(t_grid, tails_a, tails_b, predicted)
