import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldspectrum import (
    DivergentPM,
    GaussianIID,
    MixedGaussian,
    exact_cgf,
    exact_interval_prob,
    sample,
    source_from_json,
)


def phi(x):
    """Standard normal CDF straight from erf, independent of scipy."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


class TestIntervalProb:
    def test_gaussian_matches_erf_oracle(self, std_gaussian):
        # Z_100 ~ N(0, 1/100); (0.1, 0.2) standardizes to (1, 2)
        expected = phi(2.0) - phi(1.0)
        got = exact_interval_prob(std_gaussian, 100, 0.1, 0.2)
        assert got == pytest.approx(expected, abs=1e-14)

    def test_divergent_atoms_outside(self, divergent):
        assert exact_interval_prob(divergent, 5, -1.0, 1.0) == 0.0

    def test_mixed_total_mass(self, mixed):
        assert exact_interval_prob(mixed, 1, -50.0, 50.0) == pytest.approx(1.0, abs=1e-14)

    def test_gaussian_symmetry(self, std_gaussian):
        assert exact_interval_prob(std_gaussian, 4, 0.0, math.inf) == pytest.approx(0.5, abs=1e-14)

    def test_invalid_interval(self, std_gaussian):
        with pytest.raises(ValueError):
            exact_interval_prob(std_gaussian, 10, 1.0, 1.0)
        with pytest.raises(ValueError):
            exact_interval_prob(std_gaussian, 10, 2.0, 1.0)

    def test_nonpositive_n(self, std_gaussian):
        with pytest.raises(ValueError):
            exact_interval_prob(std_gaussian, 0, 0.0, 1.0)

    def test_mixture_is_weighted_sum_bitwise(self, mixed):
        p1 = mixed.component1.interval_prob(17, -0.4, 0.9)
        p2 = mixed.component2.interval_prob(17, -0.4, 0.9)
        assert mixed.interval_prob(17, -0.4, 0.9) == 0.5 * p1 + 0.5 * p2

    def test_log_prob_reaches_far_tails(self, std_gaussian):
        # interval 3-sigma-units-of-Z_n out at n=1e4: exponent about -n*R^2/2
        logp = float(np.asarray(std_gaussian.log_interval_prob(10_000, 3.0, 3.1)))
        assert -46000 < logp < -44000
        assert np.isfinite(logp)


class TestCgf:
    def test_gaussian_closed_form(self, std_gaussian):
        assert exact_cgf(std_gaussian, 7, 1.0) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 17, 10_000])
    def test_zero_theta_is_exactly_zero(self, std_gaussian, mixed, interleaved, divergent, n):
        for s in (std_gaussian, mixed, interleaved, divergent):
            assert exact_cgf(s, n, 0.0) == 0.0

    def test_mixed_limit_is_max_of_components(self, mixed):
        # phi(theta) -> max(-theta + theta^2/2, theta + theta^2/2) = 1.5 at theta=1
        assert exact_cgf(mixed, 200_000, 1.0) == pytest.approx(1.5, abs=1e-4)

    def test_divergent_formula(self, divergent):
        n, theta = 5, 1.0
        expected = math.log(0.5 * (math.exp(25.0) + math.exp(-25.0))) / 5.0
        assert exact_cgf(divergent, n, theta) == pytest.approx(expected, rel=1e-14)

    def test_divergent_no_overflow(self, divergent):
        val = exact_cgf(divergent, 10_000, 2.0)
        assert np.isfinite(val)
        assert val == pytest.approx(20_000.0 - math.log(2.0) / 10_000, abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(
        t1=st.floats(-3, 3),
        t2=st.floats(-3, 3),
        lam=st.floats(0.01, 0.99),
        n=st.integers(1, 500),
    )
    def test_cgf_convex_in_theta(self, mixed, t1, t2, lam, n):
        mid = lam * t1 + (1 - lam) * t2
        lhs = exact_cgf(mixed, n, mid)
        rhs = lam * exact_cgf(mixed, n, t1) + (1 - lam) * exact_cgf(mixed, n, t2)
        assert lhs <= rhs + 1e-9


class TestSampler:
    def test_deterministic(self, mixed):
        a = sample(mixed, 37, 1000, seed=99)
        b = sample(mixed, 37, 1000, seed=99)
        assert np.array_equal(a, b)

    def test_divergent_support(self, divergent):
        draws = sample(divergent, 3, 100, seed=1)
        assert set(np.unique(draws)) <= {-3.0, 3.0}

    def test_gaussian_clt_bound(self, std_gaussian):
        n, count = 10_000, 100_000
        draws = sample(std_gaussian, n, count, seed=42)
        bound = 4.0 * (1.0 / math.sqrt(n)) / math.sqrt(count)
        assert abs(float(np.mean(draws))) <= bound

    def test_zero_count_rejected(self, std_gaussian):
        with pytest.raises(ValueError):
            sample(std_gaussian, 5, 0, seed=0)

    def test_empirical_frequency_matches_exact_law(self, std_gaussian, mixed, divergent):
        # 20 randomized (source, n, lo, hi) triples with moderate probability,
        # each within 5 binomial standard deviations at 1e5 draws
        rng = np.random.default_rng(2024)
        count = 100_000
        sources = [std_gaussian, mixed, divergent]
        checked = 0
        attempts = 0
        while checked < 20 and attempts < 500:
            attempts += 1
            s = sources[int(rng.integers(len(sources)))]
            n = int(rng.integers(1, 400))
            if isinstance(s, DivergentPM):
                lo, hi = (0.0, n + 1.0) if rng.random() < 0.5 else (-n - 1.0, 0.0)
            else:
                center = float(rng.choice([-1.0, 0.0, 1.0]))
                sd = 1.0 / math.sqrt(n)
                lo = center - float(rng.uniform(0.2, 2.0)) * sd
                hi = lo + float(rng.uniform(0.5, 3.0)) * sd
            p = exact_interval_prob(s, n, lo, hi)
            if not 0.05 <= p <= 0.95:
                continue
            draws = sample(s, n, count, seed=7_000 + checked)
            freq = float(np.mean((draws > lo) & (draws < hi)))
            sd_bin = math.sqrt(p * (1.0 - p) / count)
            assert abs(freq - p) <= 5.0 * sd_bin, (s.kind, n, lo, hi, p, freq)
            checked += 1
        assert checked == 20


class TestValidationAndJson:
    def test_sigma_must_be_positive(self):
        with pytest.raises(ValueError):
            GaussianIID(0.0, 0.0)

    def test_weights_validated(self):
        g = GaussianIID(0.0, 1.0)
        with pytest.raises(ValueError):
            MixedGaussian(g, g, 0.6, 0.6)
        with pytest.raises(ValueError):
            MixedGaussian(g, g, -0.2, 1.2)
        MixedGaussian(g, g, 0.3, 0.7)  # fine

    @pytest.mark.parametrize(
        "payload",
        [
            {"kind": "gaussian_iid", "mu": 0.0, "sigma": 1.0},
            {
                "kind": "mixed",
                "components": [
                    {"kind": "gaussian_iid", "mu": -1.0, "sigma": 1.0},
                    {"kind": "gaussian_iid", "mu": 1.0, "sigma": 2.0},
                ],
                "weights": [0.25, 0.75],
            },
            {
                "kind": "interleaved",
                "odd": {"kind": "gaussian_iid", "mu": -1.0, "sigma": 1.0},
                "even": {"kind": "gaussian_iid", "mu": 1.0, "sigma": 1.0},
            },
            {"kind": "divergent_pm"},
        ],
    )
    def test_json_round_trip(self, payload):
        source = source_from_json(payload)
        again = source_from_json(json.loads(json.dumps(source.to_json())))
        assert again == source
        assert again.to_json() == source.to_json()

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            source_from_json({"kind": "bernoulli"})

    def test_capabilities(self, std_gaussian, divergent):
        caps = std_gaussian.capabilities()
        assert caps.has_exact_law and caps.has_exact_cgf
        assert caps.has_sampler and caps.has_analytic_rate
        assert divergent.capabilities().has_analytic_rate


class TestAnalyticRateOracles:
    def test_gaussian(self, std_gaussian):
        lo, hi = std_gaussian.analytic_rate()
        assert lo(0.5) == pytest.approx(0.125)
        assert hi(0.5) == pytest.approx(0.125)

    def test_mixed(self, mixed):
        lo, hi = mixed.analytic_rate()
        assert lo(0.0) == pytest.approx(0.5)
        assert hi(0.0) == pytest.approx(0.5)

    def test_interleaved(self, interleaved):
        lo, hi = interleaved.analytic_rate()
        assert lo(0.0) == pytest.approx(0.5)
        assert hi(0.0) == pytest.approx(0.5)
        assert lo(1.0) == pytest.approx(0.0)
        assert hi(1.0) == pytest.approx(2.0)

    def test_divergent(self, divergent):
        lo, hi = divergent.analytic_rate()
        assert lo(0.3) == math.inf
        assert np.all(np.isinf(hi(np.linspace(-5, 5, 11))))
