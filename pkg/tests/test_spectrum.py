import math

import numpy as np
import pytest

from ldspectrum import Grid
from ldspectrum.spectrum import (
    C_TIGHT_CONSISTENT,
    E_TIGHT_CONSISTENT,
    NOT_C_TIGHT,
    NOT_E_TIGHT,
    RateCurve,
    ShrinkSchedule,
    c_tightness_diagnostic,
    e_tightness_diagnostic,
    estimate_point_rate,
    estimate_rate_curve,
    sigma_convergence_diagnostic,
)
from conftest import max_parabolas, min_parabolas


class TestShrinkSchedule:
    def test_validation(self):
        with pytest.raises(ValueError):
            ShrinkSchedule(0, 3, (100, 200, 400, 800, 3200))
        with pytest.raises(ValueError):
            ShrinkSchedule(2, 1, (100, 200, 400, 800, 3200))
        with pytest.raises(ValueError):
            ShrinkSchedule(1, 3, (100, 100, 400, 800, 3200))
        with pytest.raises(ValueError):
            # coupling rule: last n must be >= 100 * base**i_max
            ShrinkSchedule(1, 5, (100, 200, 400, 800, 1600))

    def test_default_pairs_parities(self):
        sched = ShrinkSchedule.default()
        ns = np.array(sched.n_schedule)
        tail = ns[-sched.w_tail:]
        assert np.any(tail % 2 == 0) and np.any(tail % 2 == 1)
        assert np.all(np.diff(ns) > 0)
        assert ns[-1] >= 100 * 2**sched.i_max

    def test_json_round_trip(self):
        sched = ShrinkSchedule.default(i_max=4, n_max=10_000, base=3.0)
        again = ShrinkSchedule.from_json(sched.to_json())
        assert again == sched


class TestPointRate:
    def test_gaussian_halfpoint(self, std_gaussian, schedule):
        # oracle: inf of R^2/2 over (0.5 - 1/16, 0.5 + 1/16), attained at the left edge
        oracle = (0.5 - 2.0**-4) ** 2 / 2.0
        est = estimate_point_rate(std_gaussian, 0.5, 4, schedule.n_schedule)
        assert est.lower == pytest.approx(oracle, abs=0.02)
        assert est.upper == pytest.approx(oracle, abs=0.02)
        assert not est.all_infinite

    def test_gaussian_at_mean_goes_to_zero(self, std_gaussian, schedule):
        for i in (1, 3, 5):
            est = estimate_point_rate(std_gaussian, 0.0, i, schedule.n_schedule)
            assert 0.0 <= est.lower <= est.upper <= 5e-3

    def test_interleaved_parity_split(self, interleaved, schedule):
        est = estimate_point_rate(interleaved, 1.0, 4, schedule.n_schedule)
        # even n capture the mean of component 2; odd n pay the component-1 rate
        assert est.lower <= 0.01
        assert est.upper == pytest.approx((2.0 - 2.0**-4) ** 2 / 2.0, abs=0.02)

    def test_divergent_all_infinite(self, divergent, schedule):
        est = estimate_point_rate(divergent, 0.0, 3, schedule.n_schedule)
        assert est.all_infinite
        assert est.lower == math.inf and est.upper == math.inf

    def test_invalid_width_index(self, std_gaussian, schedule):
        with pytest.raises(ValueError):
            estimate_point_rate(std_gaussian, 0.0, 0, schedule.n_schedule)

    def test_mc_close_to_exact_at_moderate_probability(self, std_gaussian, schedule):
        ns = schedule.n_schedule[:8]
        exact = estimate_point_rate(std_gaussian, 0.1, 2, ns, w_tail=3)
        mc = estimate_point_rate(std_gaussian, 0.1, 2, ns, w_tail=3, method="mc",
                                 mc_count=200_000, seed=5)
        assert not mc.censored
        assert mc.lower == pytest.approx(exact.lower, abs=0.01)

    def test_mc_censors_sub_resolution_probabilities(self, std_gaussian):
        ns = (100, 150, 200)
        mc = estimate_point_rate(std_gaussian, 3.0, 4, ns, w_tail=2, method="mc",
                                 mc_count=10_000, seed=5)
        assert mc.censored
        # censored value is the resolution bound, not a fabricated estimate
        assert mc.upper <= -math.log(30.0 / 10_000) / 100 + 1e-12


class TestRateCurve:
    def test_gaussian_matches_oracle(self, std_gaussian):
        grid = Grid(-3.0, 3.0, 0.05)
        sched = ShrinkSchedule.default(i_max=6, n_max=20_000)
        curve = estimate_rate_curve(std_gaussian, grid, sched)
        rs = grid.points()
        assert np.max(np.abs(curve.lower - rs**2 / 2.0)) <= 0.05

    def test_error_decreases_with_doubled_n(self, std_gaussian):
        # probe the n-dominated regime: n_max just above the width-coupling
        # floor, where the finite-n residual is still the leading error term
        # (at large n_max the width-resolution floor ~pi_imax^2 takes over)
        grid = Grid(-3.0, 3.0, 0.05)
        rs = grid.points()
        sched = ShrinkSchedule.default(i_max=6, n_max=6_600)
        err = np.max(np.abs(estimate_rate_curve(std_gaussian, grid, sched).lower - rs**2 / 2))
        sched2 = ShrinkSchedule.default(i_max=6, n_max=13_200)
        err2 = np.max(np.abs(estimate_rate_curve(std_gaussian, grid, sched2).lower - rs**2 / 2))
        assert err2 < err

    def test_lower_at_most_upper_and_nonnegative(self, curves):
        for curve in curves.values():
            finite = np.isfinite(curve.lower) & np.isfinite(curve.upper)
            assert np.all(curve.lower[finite] <= curve.upper[finite] + 1e-6)
            assert np.all(curve.lower[finite] >= -1e-12)

    def test_monotone_in_width_index(self, curves):
        # Pr over a wider interval is larger, so the exponent grows with i
        for curve in curves.values():
            by_i = curve.lower_by_width
            finite = np.isfinite(by_i).all(axis=0)
            diffs = np.diff(by_i[:, finite], axis=0)
            assert np.all(diffs >= -1e-9)

    def test_width_base_consistency(self, std_gaussian):
        # the limits do not depend on the choice of the shrinking widths:
        # base-2 and base-3 runs agree within the reported per-point spread
        grid = Grid(-2.0, 2.0, 0.1)
        c2 = estimate_rate_curve(std_gaussian, grid, ShrinkSchedule.default(i_max=5))
        c3 = estimate_rate_curve(std_gaussian, grid, ShrinkSchedule.default(i_max=4, base=3.0))
        diff = np.abs(c2.lower - c3.lower)
        allowance = np.maximum(c2.spread_lower, c3.spread_lower)
        assert np.all(diff <= allowance)

    def test_divergent_curve_all_inf(self, curves):
        assert np.all(np.isinf(curves["divergent"].lower))
        assert np.all(np.isinf(curves["divergent"].upper))

    def test_mixed_matches_min_parabolas(self, curves, r_grid):
        rs = r_grid.points()
        assert np.max(np.abs(curves["mixed"].lower - min_parabolas(rs))) <= 0.05

    def test_interleaved_bounds(self, curves, r_grid):
        rs = r_grid.points()
        inside = np.abs(rs) <= 2.0
        assert np.max(np.abs(curves["interleaved"].lower - min_parabolas(rs))[inside]) <= 0.07
        assert np.max(np.abs(curves["interleaved"].upper - max_parabolas(rs))[inside]) <= 0.07

    def test_thread_count_never_changes_values(self, mixed, schedule):
        grid = Grid(-2.0, 2.0, 0.25)
        one = estimate_rate_curve(mixed, grid, schedule, threads=1)
        four = estimate_rate_curve(mixed, grid, schedule, threads=4)
        assert np.array_equal(one.lower, four.lower)
        assert np.array_equal(one.upper, four.upper)
        assert np.array_equal(one.spread_lower, four.spread_lower)

    def test_csv_round_trip(self, curves):
        for curve in (curves["divergent"], curves["mixed"]):
            text = curve.to_csv()
            again = RateCurve.from_csv(text)
            assert np.array_equal(again.grid.points(), curve.grid.points())
            assert np.array_equal(again.lower, curve.lower)
            assert np.array_equal(again.upper, curve.upper)
            assert again.to_csv() == text


class TestETightness:
    def test_gaussian(self, std_gaussian, schedule):
        rep = e_tightness_diagnostic(std_gaussian, (1, 2, 4, 8), schedule.n_schedule)
        assert rep.verdict == E_TIGHT_CONSISTENT
        # exceedance exponents behave like -K^2/2
        for k, slope in zip(rep.k_schedule, rep.slopes):
            assert slope == pytest.approx(-(k**2) / 2.0, rel=0.05)

    def test_divergent(self, divergent, schedule):
        rep = e_tightness_diagnostic(divergent, n_schedule=schedule.n_schedule)
        assert rep.verdict == NOT_E_TIGHT
        assert np.all(np.abs(rep.slopes) <= 1e-9)

    def test_mixed(self, mixed, schedule):
        rep = e_tightness_diagnostic(mixed, n_schedule=schedule.n_schedule)
        assert rep.verdict == E_TIGHT_CONSISTENT


class TestCTightness:
    def test_gaussian(self, std_gaussian, schedule):
        rep = c_tightness_diagnostic(std_gaussian, Grid(-2.0, 2.0, 0.5),
                                     n_schedule=schedule.n_schedule)
        assert rep.verdict == C_TIGHT_CONSISTENT
        assert rep.k0 is not None

    def test_divergent(self, divergent, schedule):
        rep = c_tightness_diagnostic(divergent, Grid(-1.0, 1.0, 0.5),
                                     n_schedule=schedule.n_schedule)
        assert rep.verdict == NOT_C_TIGHT

    def test_interleaved(self, interleaved, schedule):
        rep = c_tightness_diagnostic(interleaved, Grid(-2.0, 2.0, 0.5),
                                     n_schedule=schedule.n_schedule)
        assert rep.verdict == C_TIGHT_CONSISTENT


class TestSigmaConvergence:
    def test_gaussian_passes_with_full_schedule(self, std_gaussian, schedule):
        rep = sigma_convergence_diagnostic(std_gaussian, (-1.0, 1.0), 0.05, schedule)
        assert rep.passed and rep.witness == "full-schedule"

    def test_mixed_passes(self, mixed, schedule):
        rep = sigma_convergence_diagnostic(mixed, (-2.0, 2.0), 0.05, schedule)
        assert rep.passed

    def test_divergent_passes_trivially(self, divergent, schedule):
        rep = sigma_convergence_diagnostic(divergent, (-2.0, 2.0), 0.05, schedule)
        assert rep.passed

    def test_interleaved_fails_with_counterexample(self, interleaved, schedule):
        # no single subsequence can track the limsup on a domain covering both
        # component means: the parity achieving it flips across R = 0, and the
        # diagnostic finds a concrete violating grid point
        rep = sigma_convergence_diagnostic(interleaved, (-2.0, 2.0), 0.05, schedule)
        assert not rep.passed
        assert rep.counterexample_r is not None

    def test_interleaved_passes_on_one_basin(self, interleaved, schedule):
        # away from the crossover a single parity class is a valid witness
        rep = sigma_convergence_diagnostic(interleaved, (0.5, 1.5), 0.05, schedule)
        assert rep.passed
        assert rep.witness in ("odd-n", "even-n", "full-schedule")

    def test_gamma_validated(self, std_gaussian, schedule):
        with pytest.raises(ValueError):
            sigma_convergence_diagnostic(std_gaussian, (-1.0, 1.0), 0.0, schedule)
