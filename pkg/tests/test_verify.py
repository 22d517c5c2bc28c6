import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from randflight import densities as dens
from randflight.errors import InfeasibleExperimentError, InsufficientSamplesError, InvalidParameterError
from randflight.flights import FlightSpec
from randflight.sampling import RngStream
from randflight.verify import (
    TailEstimate,
    check_feasibility,
    convergence_race,
    estimate_exit_probability,
    estimate_tail,
    exit_bound,
    fit_decay_rate,
    max_feasible_t,
    wilson_interval,
)

X2_RATE = -0.5 * math.log(0.75)


class TestWilson:
    def test_reference_value(self):
        # textbook example: 81 of 263 at 95%
        lo, hi = wilson_interval(81, 263, 0.95)
        assert lo == pytest.approx(0.2553, abs=1e-4)
        assert hi == pytest.approx(0.3662, abs=1e-4)

    def test_edges(self):
        lo, hi = wilson_interval(0, 1000)
        assert lo == 0.0 and 0 < hi < 0.01
        lo, hi = wilson_interval(1000, 1000)
        assert hi == 1.0 and 0.99 < lo < 1.0

    def test_empty(self):
        with pytest.raises(InvalidParameterError):
            wilson_interval(0, 0)

    @given(n=st.integers(1, 10**9), frac=st.floats(0, 1))
    @settings(max_examples=200)
    def test_tail_estimate_invariants(self, n, frac):
        k = int(round(frac * n))
        est = TailEstimate.from_count(5.0, 0.5, k, n)
        assert 0 <= est.ci_low <= est.p_hat <= est.ci_high <= 1
        assert math.isfinite(est.empirical_rate) == (k > 0)
        assert est.empirical_rate >= 0
        lo, hi = est.rate_ci
        assert lo <= est.empirical_rate <= hi


class TestEstimateTail:
    def test_planar_standard_against_quadrature(self, rng):
        spec = FlightSpec("Z", 2, 1.0, 10.0, lam=1.0)
        est = estimate_tail(spec, 0.99, 1_000_000, rng)
        exact = dens.standard_tail_probability(2, 1.0, 1.0, 10.0, 0.99 * 10.0)
        assert est.ci_low <= exact <= est.ci_high
        assert est.count > 50

    def test_conditional_rate_both_horizons(self, rng):
        estimates = [estimate_tail(FlightSpec("X", 2, w=1.0, t=t), 0.5, 1_000_000, rng.substream(k))
                     for k, t in enumerate((10.0, 40.0))]
        for est in estimates:
            assert abs(est.empirical_rate - X2_RATE) < 0.3 * X2_RATE
            # in d = 2 with n = t the tail is exactly 0.75**(t/2), so the rate is exact at every horizon
            lo, hi = est.rate_ci
            assert lo <= X2_RATE <= hi

    def test_finite_horizon_rate_converges(self):
        # d = 3: the polynomial prefactor makes -(1/t) log p_t approach the limit from one side
        gaps = []
        for t in (10, 20, 40, 80):
            p = dens.conditional_tail_probability(dens.IsotropicDensity("X", 3, t, 1.0, float(t)), 0.5 * t)
            gaps.append(abs(-math.log(p) / t - 2 * 1.0 * X2_RATE))
        assert all(a > b for a, b in zip(gaps, gaps[1:]))

    @pytest.mark.parametrize("spec", [FlightSpec("X", 3, n=2), FlightSpec("Z", 4, lam=1.0, t=2.0)])
    def test_zero_threshold(self, rng, spec):
        est = estimate_tail(spec, 0.0, 2000, rng)
        assert est.p_hat == 1.0 and est.empirical_rate == 0.0

    @pytest.mark.parametrize("r", [1.0, 1.3])
    def test_conditional_beyond_speed(self, rng, r):
        est = estimate_tail(FlightSpec("Y", 4, n=2), r, 5000, rng)
        assert est.p_hat == 0.0 and est.empirical_rate == math.inf

    def test_standard_beyond_speed(self, rng):
        assert estimate_tail(FlightSpec("Z", 2, lam=1.0, t=3.0), 1.2, 5000, rng).p_hat == 0.0

    @pytest.mark.parametrize("r,n", [(-0.1, 5000), (float("nan"), 5000), (0.5, 999)])
    def test_invalid(self, rng, r, n):
        with pytest.raises(InvalidParameterError):
            estimate_tail(FlightSpec("X", 2, n=1), r, n, rng)

    def test_ci_coverage(self):
        spec = FlightSpec("Z", 2, 1.0, 1.0, lam=1.0)
        exact = dens.standard_tail_probability(2, 1.0, 1.0, 1.0, 0.5)
        covered = 0
        for seed in range(100):
            est = estimate_tail(spec, 0.5, 2000, RngStream(seed, 77))
            covered += est.ci_low <= exact <= est.ci_high
        assert covered >= 95

    def test_thread_count_irrelevant(self):
        spec = FlightSpec("Z", 4, lam=1.0, t=5.0)
        a = estimate_tail(spec, 0.5, 70_000, RngStream(9), threads=1)
        b = estimate_tail(spec, 0.5, 70_000, RngStream(9), threads=3)
        assert a == b


class TestFeasibility:
    def test_gate_rejects_far_horizon(self):
        with pytest.raises(InfeasibleExperimentError) as err:
            check_feasibility(FlightSpec("Z", 2, lam=1.0, t=200.0), 0.9, 100_000)
        rate = 1 - math.sqrt(1 - 0.81)
        assert err.value.suggested_t_max == pytest.approx(math.log(100_000 / 50) / rate)
        assert "t <=" in str(err.value)

    def test_gate_accepts(self):
        p = check_feasibility(FlightSpec("Z", 4, lam=1.0, t=40.0), 0.5, 10_000_000)
        assert p == pytest.approx(math.exp(-10.0))

    def test_max_feasible_t(self):
        assert max_feasible_t(0.0, 1000) == math.inf
        assert max_feasible_t(0.25, 50 * math.e**10) == pytest.approx(40.0)


class TestFit:
    def test_linear_in_w(self, rng):
        grid = [5.0, 10.0, 15.0, 20.0]
        fits = [fit_decay_rate(FlightSpec("X", 2, w=w), 0.5, grid, 200_000, rng.substream(k))
                for k, w in enumerate((1.0, 2.0))]
        ratio = fits[1].decay_rate / fits[0].decay_rate
        assert abs(ratio - 2.0) < 0.25 * 2.0
        assert fits[1].analytic == pytest.approx(2 * fits[0].analytic)

    def test_fit_structure(self, rng):
        fit = fit_decay_rate(FlightSpec("Z", 2, lam=1.0), 0.5, [2.0, 4.0, 6.0, 8.0], 20_000, rng)
        assert fit.slope < 0 and fit.decay_rate == -fit.slope
        lo, hi = fit.decay_ci
        assert lo <= fit.decay_rate <= hi
        assert [e.t for e in fit.estimates] == [2.0, 4.0, 6.0, 8.0]
        assert fit.analytic == pytest.approx(1 - math.sqrt(0.75))

    def test_reports_empty_horizon(self, rng):
        with pytest.raises(InsufficientSamplesError) as err:
            fit_decay_rate(FlightSpec("X", 2, w=1.0), 0.9, [2.0, 4.0, 40.0], 1000, rng, gate=False)
        assert err.value.t == 40.0
        assert "t=40" in str(err.value)

    def test_gate_runs_first(self, rng):
        with pytest.raises(InfeasibleExperimentError) as err:
            fit_decay_rate(FlightSpec("X", 2, w=1.0), 0.9, [2.0, 4.0, 40.0], 1000, rng)
        assert err.value.suggested_t_max == pytest.approx(math.log(20) / (-0.5 * math.log(0.19)))

    @pytest.mark.parametrize("grid", [[1.0, 2.0], [1.0, 3.0, 2.0]])
    def test_bad_grid(self, rng, grid):
        with pytest.raises(InvalidParameterError):
            fit_decay_rate(FlightSpec("Z", 2, lam=1.0), 0.5, grid, 1000, rng)

    def test_thread_count_irrelevant(self):
        spec = FlightSpec("Y", 4, w=1.0)
        a = fit_decay_rate(spec, 0.5, [2.0, 4.0, 6.0], 40_000, RngStream(3), threads=1)
        b = fit_decay_rate(spec, 0.5, [2.0, 4.0, 6.0], 40_000, RngStream(3), threads=2)
        assert a.estimates == b.estimates and a.slope == b.slope


class TestExit:
    def test_bounds(self):
        assert exit_bound(2, 1.0, 1.0, 0.5) == pytest.approx(0.133975, abs=1e-6)
        assert exit_bound(4, 1.0, 1.0, 0.5) == 0.25

    def test_inclusion(self, rng):
        res = estimate_exit_probability(FlightSpec("Z", 2, lam=1.0, t=10.0), 0.5, 1_000_000, rng)
        assert res.inclusion_violations == 0
        assert res.exit.count >= res.endpoint.count
        assert res.exit.p_hat >= res.endpoint.p_hat

    @pytest.mark.parametrize("d", [2, 4])
    def test_one_sided_rate(self, rng, d):
        res = estimate_exit_probability(FlightSpec("Z", d, lam=1.0, t=20.0), 0.5, 200_000, rng)
        assert res.within_bound
        assert res.exit.empirical_rate <= res.endpoint.empirical_rate

    def test_exit_matches_endpoint_without_changes(self, rng):
        # a path with no changes is a straight segment, so leaving and ending outside coincide
        res = estimate_exit_probability(FlightSpec("Z", 4, lam=1e-6, t=1.0), 0.5, 5000, rng)
        assert res.exit.count == res.endpoint.count == 5000

    @pytest.mark.parametrize("spec,r", [(FlightSpec("X", 2, n=1), 0.5), (FlightSpec("Z", 2, lam=1.0), 1.0),
                                        (FlightSpec("Z", 2, lam=1.0), 0.0)])
    def test_invalid(self, rng, spec, r):
        with pytest.raises(InvalidParameterError):
            estimate_exit_probability(spec, r, 5000, rng)

    def test_gate(self, rng):
        with pytest.raises(InfeasibleExperimentError):
            estimate_exit_probability(FlightSpec("Z", 2, lam=1.0, t=200.0), 0.9, 100_000, rng)


class TestRace:
    GRID = [10.0, 20.0, 30.0, 40.0]

    def test_faster_conditional(self, rng):
        res = convergence_race(FlightSpec("X", 2, w=2.0), FlightSpec("Z", 2, lam=1.0), 0.3, self.GRID, 100_000, rng)
        assert res.predicted_log_ratio_slope < 0
        assert res.eventually_decreasing
        assert np.all(np.diff(res.ratio) < 0)

    def test_identical_laws(self, rng):
        spec = FlightSpec("Z", 4, lam=1.0)
        res = convergence_race(spec, spec, 0.3, [2.0, 4.0, 6.0], 100_000, rng)
        assert res.predicted_log_ratio_slope == 0.0
        for a, b, ratio in zip(res.tails_a, res.tails_b, res.ratio):
            z = (a.p_hat - b.p_hat) / math.sqrt(a.p_hat * (1 - a.p_hat) / a.n_samples * 2)
            assert abs(z) < 4
            assert abs(ratio - 1) < 0.05

    def test_slower_conditional_inside_crossing(self, rng):
        res = convergence_race(FlightSpec("Y", 4, w=0.6), FlightSpec("Z", 4, lam=1.0), 0.3, self.GRID, 100_000, rng)
        assert res.predicted_log_ratio_slope > 0
        assert res.log_ratio_slope > 0
        assert not res.eventually_decreasing

    def test_empty_tail_gives_nan_slope(self, rng):
        res = convergence_race(FlightSpec("X", 2, w=1.0), FlightSpec("Z", 2, lam=1.0), 1.2, [1.0, 2.0, 3.0], 1000, rng)
        assert math.isnan(res.log_ratio_slope)
        assert not res.eventually_decreasing

    def test_fixed_count_has_no_rate(self, rng):
        with pytest.raises(InvalidParameterError, match="change rate w"):
            convergence_race(FlightSpec("X", 2, n=1), FlightSpec("Z", 2, lam=1.0), 0.3, [1.0, 2.0, 3.0], 1000, rng)

    def test_speed_mismatch(self, rng):
        with pytest.raises(InvalidParameterError):
            convergence_race(FlightSpec("X", 2, n=1, c=2.0), FlightSpec("Z", 2, lam=1.0), 0.3, [1.0, 2.0], 1000, rng)


def test_binomial_reference():
    # Wilson interval is never wider than Clopper-Pearson at moderate counts
    lo, hi = wilson_interval(40, 10_000)
    cp = stats.binomtest(40, 10_000).proportion_ci(0.99)
    assert hi - lo <= cp.high - cp.low
