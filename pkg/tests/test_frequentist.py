import math

import numpy as np
import pytest
from scipy import integrate, stats

from repsuccess.frequentist import (
    METHODS,
    RateResult,
    SamplingHypothesis,
    SuccessRegion,
    d_min_limit,
    information_consistency_check,
    monte_carlo_rate,
    paradox_thresholds,
    prob_success,
    succeeds,
    success_region,
    type1_error,
)
from repsuccess.normal_model import ReplicationPair, sceptical_bf, z_from_min_bf, z_gamma
from repsuccess.numerics import DomainError

CASES = [
    (2.0, 1.0, 1 / 3), (2.5, 1.0, 1 / 3), (3.0, 2.0, 1 / 10), (4.0, 0.5, 1 / 3),
    (5.0, 4.0, 1 / 10), (-3.0, 1.5, 1 / 3), (2.2, 8.0, 1 / 3), (1.3, 1.0, 1 / 3),
]


def _gaussian_mass(region, z_o, c, hyp):
    # P(d in region) with z_r = d z_o sqrt(c), summed over the intervals
    scale = z_o * math.sqrt(c)
    total = 0.0
    for lo, hi in region.intervals:
        a, b = sorted((lo * scale, hi * scale))
        total += stats.norm.cdf(b, hyp.mu_zr, math.sqrt(hyp.var_zr)) - stats.norm.cdf(a, hyp.mu_zr, math.sqrt(hyp.var_zr))
    return total


class TestSuccessRegion:
    @pytest.mark.parametrize("method", METHODS)
    @pytest.mark.parametrize("z_o,c,gamma", CASES)
    def test_region_matches_direct_criterion(self, method, z_o, c, gamma):
        region = success_region(method, z_o, c, gamma)
        d = np.linspace(-12.0, 12.0, 48001)
        direct = succeeds(method, z_o, d * z_o * math.sqrt(c), c, gamma)
        inside = region.contains(d)
        # ignore points within rounding distance of an endpoint
        edges = np.array([e for iv in region.intervals for e in iv if math.isfinite(e)])
        far = np.ones_like(d, dtype=bool) if len(edges) == 0 else np.min(np.abs(d[:, None] - edges[None, :]), axis=1) > 1e-9
        np.testing.assert_array_equal(direct[far], inside[far])

    def test_two_trials_cutoff(self):
        # no success region once the original minimum Bayes factor exceeds gamma
        below = z_from_min_bf(0.3)
        above = z_from_min_bf(0.35)
        assert not success_region("two_trials", below, 1.0, 1 / 3).is_empty
        assert success_region("two_trials", above, 1.0, 1 / 3).is_empty
        assert success_region("sceptical_bf", above, 1.0, 1 / 3).is_empty

    def test_sceptical_p_with_alpha(self):
        region = success_region("sceptical_p", 2.0, 2.0, 1 / 3, alpha=0.025)
        assert region.d_min == pytest.approx(4.87, abs=0.01)
        z_r = region.d_min * 2.0 * math.sqrt(2.0)
        assert succeeds("sceptical_p", 2.0, z_r * 1.0001, 2.0, 1 / 3, alpha=0.025)
        assert not succeeds("sceptical_p", 2.0, z_r * 0.9999, 2.0, 1 / 3, alpha=0.025)

    def test_zero_original(self):
        assert success_region("replication_bf", 0.0, 1.0, 1 / 3).is_empty

    def test_region_type(self):
        with pytest.raises(DomainError):
            SuccessRegion(((1.0, 0.0),), "two_trials")
        with pytest.raises(DomainError):
            SuccessRegion(((0.0, 2.0), (1.0, 3.0)), "two_trials")
        r = SuccessRegion(((-math.inf, -2.0), (0.5, math.inf)), "replication_bf")
        assert r.d_min == 0.5 and r.d_max == math.inf
        assert r.contains(-3.0) and not r.contains(0.0)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            success_region("bogus", 2.0, 1.0, 1 / 3)
        with pytest.raises(DomainError):
            success_region("two_trials", 2.0, 1.0, 1.5)
        with pytest.raises(DomainError):
            success_region("two_trials", 2.0, -1.0, 1 / 3)


class TestParadox:
    def test_thresholds_are_region_edges(self):
        z_o = z_from_min_bf(0.1)
        th = paradox_thresholds(z_o, 1.0, 1 / 3)
        for method, d in th.items():
            assert succeeds(method, z_o, (d - 1e-6) * z_o, 1.0, 1 / 3)
            assert not succeeds(method, z_o, (d + 1e-6) * z_o, 1.0, 1 / 3)

    def test_truncated_has_no_negative_success(self):
        th = paradox_thresholds(z_from_min_bf(0.1), 1.0, 1 / 3, truncate=True)
        assert th == {"sceptical_bf": None, "replication_bf": None}


class TestLimits:
    @pytest.mark.parametrize("method", ["sceptical_bf", "sceptical_p"])
    def test_c_limit_is_approached(self, method):
        lim = d_min_limit(method, "c_to_infinity", 1 / 3, z_o=3.0)
        vals = [success_region(method, 3.0, c, 1 / 3).d_min for c in (1e2, 1e4, 1e6)]
        errs = [abs(v - lim) for v in vals]
        assert errs[2] < errs[1] < errs[0]
        assert errs[2] < 1e-3

    @pytest.mark.parametrize("method", ["sceptical_bf", "replication_bf"])
    def test_z_limit_is_approached(self, method):
        lim = d_min_limit(method, "zo2_to_infinity", 1 / 3, c=1.0)
        vals = [success_region(method, z, 1.0, 1 / 3).d_min for z in (10.0, 100.0, 1000.0)]
        errs = [abs(v - lim) for v in vals]
        assert errs[2] < errs[1] < errs[0]
        assert errs[2] < 1e-3

    def test_zero_limits(self):
        assert d_min_limit("two_trials", "c_to_infinity", 1 / 3, z_o=3.0) == 0.0
        assert d_min_limit("two_trials", "zo2_to_infinity", 1 / 3, c=1.0) == 0.0
        assert d_min_limit("replication_bf", "c_to_infinity", 1 / 3, z_o=3.0) == 0.0
        assert d_min_limit("sceptical_p", "zo2_to_infinity", 1 / 3, c=1.0) == 0.0

    def test_zero_limits_decay(self):
        # shrinkage paradox: d_min keeps decreasing without bound
        for method, kw in [("two_trials", "c"), ("replication_bf", "c"), ("two_trials", "z"), ("sceptical_p", "z")]:
            if kw == "c":
                vals = [success_region(method, 3.0, c, 1 / 3).d_min for c in (1e2, 1e4, 1e6)]
            else:
                vals = [success_region(method, z, 1.0, 1 / 3).d_min for z in (10.0, 100.0, 1000.0)]
            assert vals[0] > vals[1] > vals[2] > 0
            assert vals[2] < 0.05 * vals[0]

    def test_limit_requires_parameters(self):
        with pytest.raises(ValueError):
            d_min_limit("sceptical_bf", "c_to_infinity", 1 / 3)
        with pytest.raises(ValueError):
            d_min_limit("sceptical_bf", "sideways", 1 / 3, z_o=3.0)


class TestProbabilities:
    @pytest.mark.parametrize("method", METHODS)
    @pytest.mark.parametrize("z_o,c,gamma", CASES)
    @pytest.mark.parametrize("kind", ["null", "conditional", "predictive"])
    def test_matches_region_mass(self, method, z_o, c, gamma, kind):
        hyp = SamplingHypothesis.null() if kind == "null" else getattr(SamplingHypothesis, kind)(z_o, c)
        region = success_region(method, z_o, c, gamma)
        p = prob_success(method, z_o, c, gamma, hyp).probability
        assert p == pytest.approx(_gaussian_mass(region, z_o, c, hyp), abs=1e-12)

    @pytest.mark.parametrize("method", METHODS)
    def test_matches_riemann_sum(self, method):
        z_o, c, gamma = 2.6, 1.7, 1 / 3
        hyp = SamplingHypothesis.predictive(z_o, c)
        sd = math.sqrt(hyp.var_zr)
        zr = np.linspace(hyp.mu_zr - 14 * sd, hyp.mu_zr + 14 * sd, 400001)
        dens = stats.norm.pdf(zr, hyp.mu_zr, sd)
        ok = succeeds(method, z_o, zr, c, gamma)
        riemann = float(np.sum(dens * ok) * (zr[1] - zr[0]))
        assert prob_success(method, z_o, c, gamma, hyp).probability == pytest.approx(riemann, abs=2e-4)

    def test_result_type(self):
        with pytest.raises(DomainError):
            RateResult(1.5, "two_trials", 1 / 3)
        with pytest.raises(DomainError):
            SamplingHypothesis(0.0, 0.0, "null")


class TestTypeOneError:
    @pytest.mark.parametrize("gamma", [1 / 3, 1 / 10])
    def test_two_trials_closed_form(self, gamma):
        expected = 2.0 * stats.norm.sf(z_gamma(gamma)) ** 2
        for c in (0.5, 1.0, 8.0):
            assert type1_error("two_trials", gamma, c).probability == expected

    @pytest.mark.parametrize("method", ["sceptical_bf", "replication_bf", "sceptical_p"])
    @pytest.mark.parametrize("c", [0.5, 2.0])
    def test_against_outer_trapezoid(self, method, c):
        gamma = 1 / 3
        zo = np.linspace(1e-6, 12.0, 24001)
        inner = np.array([_gaussian_mass(success_region(method, z, c, gamma), z, c, SamplingHypothesis.null())
                          for z in zo])
        ref = 2.0 * integrate.trapezoid(inner * stats.norm.pdf(zo), zo)
        assert type1_error(method, gamma, c).probability == pytest.approx(ref, rel=2e-4)

    def test_monotone_in_c(self):
        for method in ("sceptical_bf", "sceptical_p"):
            t = [type1_error(method, 1 / 3, c).probability for c in (0.5, 1, 2, 4, 8)]
            assert all(a > b for a, b in zip(t, t[1:]))


class TestMonteCarlo:
    def test_independent_of_workers(self):
        a = monte_carlo_rate("sceptical_bf", 1 / 3, 1.0, "predictive", 200_000, seed=7, z_o=2.5, workers=1)
        b = monte_carlo_rate("sceptical_bf", 1 / 3, 1.0, "predictive", 200_000, seed=7, z_o=2.5, workers=4)
        assert a == b

    def test_seed_changes_result(self):
        a = monte_carlo_rate("two_trials", 1 / 3, 1.0, "conditional", 100_000, seed=1, z_o=2.5)
        b = monte_carlo_rate("two_trials", 1 / 3, 1.0, "conditional", 100_000, seed=2, z_o=2.5)
        assert a.probability != b.probability

    def test_standard_error(self):
        r = monte_carlo_rate("replication_bf", 1 / 3, 2.0, "null", 70_000, seed=3)
        assert r.mc_std_error == pytest.approx(math.sqrt(r.probability * (1 - r.probability) / 70_000))

    def test_agrees_with_analytic(self):
        hyp = SamplingHypothesis.conditional(2.5, 2.0)
        p = prob_success("sceptical_p", 2.5, 2.0, 1 / 3, hyp).probability
        mc = monte_carlo_rate("sceptical_p", 1 / 3, 2.0, "conditional", 300_000, seed=11, z_o=2.5)
        assert abs(mc.probability - p) < 4 * mc.mc_std_error

    def test_invalid(self):
        with pytest.raises(ValueError):
            monte_carlo_rate("two_trials", 1 / 3, 1.0, "conditional", 10, seed=1)
        with pytest.raises(DomainError):
            monte_carlo_rate("two_trials", 1 / 3, 1.0, "null", 0, seed=1)
        with pytest.raises(DomainError):
            monte_carlo_rate("two_trials", 1 / 3, 1.0, "alternative", 10, seed=1)


class TestInformationConsistency:
    grid = np.linspace(2.0, 40.0, 200)

    @pytest.mark.parametrize("d,expected", [(1.0, "diverges_to_zero"), (0.5, "diverges_to_zero"),
                                            (0.3, "bounded_away"), (0.40, "bounded_away"),
                                            (0.43, "diverges_to_zero")])
    def test_classification(self, d, expected):
        assert information_consistency_check(d, self.grid) == expected

    def test_large_sample_bf_vanishes(self):
        bf = sceptical_bf(ReplicationPair.from_relative(40.0, 1.0, 1.0))
        assert bf.value < 1e-6

    def test_grid_validation(self):
        with pytest.raises(DomainError):
            information_consistency_check(0.5, [3.0, 2.0, 4.0])
