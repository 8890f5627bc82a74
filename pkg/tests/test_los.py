import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import expi, gammaln
from scipy.stats import poisson

from mmblockage import los
from mmblockage.params import ParameterError, SystemParams, derive
from mmblockage.results import ZERO_COVERAGE, is_defined

# mpmath, 30 digits
A_PRIME_001 = 0.977029739231267966
A_PRIME_01 = 0.813069597992620450
A_URBAN_001 = 0.889211330419516071
COND_300 = 7.6779883559670684e-05
FREQ_300 = 1.67827740178528990e-04
DUR_300 = 0.0750808558029104920
EI_1 = 1.31790215145440389


def consts(**kw):
    return derive(SystemParams(**kw))


def simpson_grid(f, a, b, n=1_000_000):
    x = np.linspace(a, b, n + 1)
    y = f(x)
    h = (b - a) / n
    return h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())


class TestCoverage:
    def test_empty_disc(self):
        assert los.coverage_los(consts(bs_density_lambda_T=0.0)) == 0.0

    def test_saturates(self):
        c = consts(bs_density_lambda_T=30 / (math.pi * 1e4) / (5 / 6))
        assert los.coverage_los(c) == pytest.approx(1.0, abs=1e-12)

    def test_300_per_km2(self):
        c = consts(bs_density_lambda_T=3e-4)
        assert los.coverage_los(c) == pytest.approx(1 - math.exp(-7.853981633974483), rel=1e-14)
        assert los.coverage_los(c) == pytest.approx(0.99961, abs=1e-5)


class TestAPrime:
    @pytest.mark.parametrize("lam_b,expected", [(0.01, A_PRIME_001), (0.1, A_PRIME_01), (0.0, 1.0)])
    def test_values(self, lam_b, expected):
        assert los.a_prime(consts(blocker_density_lambda_B=lam_b)) == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize("lam_b", [1e-9, 1e-6, 1e-4, 1e-3, 5e-3])
    def test_series_branch_is_accurate(self, lam_b):
        c = consts(blocker_density_lambda_B=lam_b)
        assert los.a_prime(c) == pytest.approx(los.a_integral(c), rel=1e-12)

    def test_quadrature_equals_closed_form_without_static(self):
        c = consts(blocker_density_lambda_B=0.05)
        assert los.a_integral(c) == pytest.approx(los.a_prime(c), rel=1e-10)

    def test_no_blockers_integral_is_one(self):
        assert los.a_integral(consts(blocker_density_lambda_B=0.0)) == pytest.approx(1.0, rel=1e-12)

    def test_urban_integral_against_fixed_grid(self, urban):
        c = derive(urban.with_(blocker_density_lambda_B=0.01))
        k = c.C / c.mu
        ref = simpson_grid(lambda r: np.exp(-(c.beta * r + c.beta0)) / (1 + k * r) * 2 * r / 1e4, 0, 100)
        assert los.a_integral(c) == pytest.approx(ref, rel=1e-11)
        assert los.a_integral(c) == pytest.approx(A_URBAN_001, rel=1e-11)

    @pytest.mark.parametrize("lam_b,bound", [(0.01, 0.002), (0.1, 0.07)])
    def test_first_order_approximation(self, lam_b, bound):
        c = consts(blocker_density_lambda_B=lam_b)
        assert abs(los.a_prime_approx(c) / los.a_prime(c) - 1) < bound

    def test_approximation_warns_outside_its_range(self):
        with pytest.warns(RuntimeWarning):
            los.a_prime_approx(consts(blocker_density_lambda_B=0.3))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            los.a_prime_approx(consts(blocker_density_lambda_B=0.1))


class TestBlockageProbability:
    def test_reference_point(self):
        c = consts(bs_density_lambda_T=3e-4)
        assert los.blockage_prob_open_park(c)[1] == pytest.approx(COND_300, rel=1e-10)

    def test_no_dynamic_or_static_blockage(self):
        c = consts(blocker_density_lambda_B=0.0)
        uncond, cond = los.blockage_prob_los(c)
        assert uncond == pytest.approx(1 - los.coverage_los(c), rel=1e-12)
        assert cond == 0.0

    def test_zero_density(self):
        uncond, cond = los.blockage_prob_los(consts(bs_density_lambda_T=0.0))
        assert uncond == 1.0
        assert cond is ZERO_COVERAGE
        assert str(cond) == "undefined: zero coverage"

    @pytest.mark.parametrize("lam_b", [0.001, 0.01, 0.1, 0.2])
    @pytest.mark.parametrize("lam_t", [1e-5, 1e-4, 3e-4, 1e-3])
    def test_general_reduces_to_open_park(self, lam_b, lam_t):
        c = consts(blocker_density_lambda_B=lam_b, bs_density_lambda_T=lam_t)
        u1, c1 = los.blockage_prob_los(c)
        u2, c2 = los.blockage_prob_open_park(c)
        assert u1 == pytest.approx(u2, rel=1e-9)
        assert c1 == pytest.approx(c2, rel=1e-9)

    def test_open_park_closed_form_rejects_static(self, urban):
        with pytest.raises(ParameterError):
            los.blockage_prob_open_park(derive(urban))

    def test_decomposition(self, urban):
        for lam_t in (5e-5, 2e-4, 8e-4):
            r = los.los_report(derive(urban.with_(bs_density_lambda_T=lam_t)))
            assert r.block_prob_uncond >= r.block_prob_cond * r.coverage_prob
            assert 0 <= r.block_prob_cond <= 1

    def test_huge_density_stays_finite(self):
        c = consts(bs_density_lambda_T=0.05)
        uncond, cond = los.blockage_prob_los(c)
        assert uncond == 0.0 and cond == 0.0

    def test_monotone_on_grid(self):
        base = dict(static_density_lambda_S=5e-5)
        lam_t = np.geomspace(5e-5, 5e-4, 5)
        cond = lambda **kw: los.blockage_prob_los(consts(**{**base, **kw}))[1]
        for lb in np.linspace(0.01, 0.2, 5):
            vals = [cond(bs_density_lambda_T=t, blocker_density_lambda_B=lb) for t in lam_t]
            assert np.all(np.diff(vals) < 0)
        for t in lam_t:
            for name, grid in [("blocker_density_lambda_B", np.linspace(0.0, 0.2, 5)),
                               ("self_block_angle_omega", np.linspace(0.0, 2.0, 5)),
                               ("static_density_lambda_S", np.linspace(0.0, 2e-4, 5))]:
                vals = [cond(bs_density_lambda_T=t, **{name: g}) for g in grid]
                assert np.all(np.diff(vals) >= 0), name


class TestMinDensity:
    def test_closed_form_reference(self):
        c = consts()
        assert los.min_bs_density(c, 1e-4) == pytest.approx(3.6e-4, rel=0.005)

    def test_exact_within_twenty_percent(self):
        c = consts()
        closed, exact = los.min_bs_density(c, 1e-4), los.min_bs_density(c, 1e-4, mode="exact")
        assert abs(exact / closed - 1) <= 0.20
        target_met = los.blockage_prob_open_park(derive(c.params.with_(bs_density_lambda_T=exact)))[1]
        assert target_met <= 1e-4

    def test_target_near_one(self):
        assert los.min_bs_density(consts(), 1 - 1e-12) < 1e-10

    def test_excess_factor_linear_in_blocker_density(self):
        x = [consts(blocker_density_lambda_B=b).rc_over_mu for b in (0.01, 0.02)]
        assert (2 * x[1] / 3) / (2 * x[0] / 3) == pytest.approx(2.0, rel=1e-12)

    def test_infeasible_reports_infimum(self, urban):
        # static blockage in an urban disc keeps the conditional probability above ~1e-30
        with pytest.raises(los.InfeasibleTargetError) as err:
            los.min_bs_density(derive(urban.with_(los_range_R=5.0)), 1e-300, mode="exact")
        assert err.value.infimum is not None


class TestEiSeries:
    def test_zero(self):
        assert los.ei_series(0.0) == 0.0

    def test_one(self):
        assert los.ei_series(1.0) == pytest.approx(EI_1, rel=1e-14)

    @pytest.mark.parametrize("x", [0.1, 1.0, 2.5, 7.854, 20.0])
    def test_identity(self, x):
        assert los.ei_series(x) == pytest.approx(expi(x) - math.log(x) - np.euler_gamma, rel=1e-11)

    @pytest.mark.parametrize("x", [800.0, 5000.0])
    def test_log_space(self, x):
        n = np.arange(1, int(x + 60 * math.sqrt(x)))
        terms = n * math.log(x) - np.log(n) - gammaln(n + 1)
        ref = terms.max() + math.log(np.exp(terms - terms.max()).sum())
        assert los.ei_series_log(x) == pytest.approx(ref, rel=1e-12)

    def test_branches_agree_at_threshold(self):
        x = los.LOG_SPACE_THRESHOLD
        direct = math.log(los.ei_series(x))
        n = np.arange(1, 2000)
        terms = n * math.log(x) - np.log(n) - gammaln(n + 1)
        assert direct == pytest.approx(terms.max() + math.log(np.exp(terms - terms.max()).sum()), rel=1e-12)

    @given(st.floats(1e-3, 200), st.floats(1e-3, 5))
    def test_increasing_and_convex(self, x, h):
        f0, f1, f2 = los.ei_series(x), los.ei_series(x + h), los.ei_series(x + 2 * h)
        assert f1 > f0
        assert f2 - 2 * f1 + f0 >= -1e-12 * f2


class TestDuration:
    def test_reference_point(self):
        assert los.expected_duration_los(consts(bs_density_lambda_T=3e-4)) == pytest.approx(DUR_300, rel=1e-12)

    def test_single_bs_limit(self):
        assert los.expected_duration_los(consts(bs_density_lambda_T=1e-12)) == pytest.approx(0.5, rel=1e-6)

    def test_zero_coverage(self):
        assert los.expected_duration_los(consts(bs_density_lambda_T=0.0)) is ZERO_COVERAGE
        assert los.expected_duration_los_approx(consts(bs_density_lambda_T=0.0)) is ZERO_COVERAGE

    def test_approximation_value(self):
        approx = los.expected_duration_los_approx(consts(bs_density_lambda_T=3e-4))
        assert approx == pytest.approx(1 / (2 * 7.853981633974483 * (1 - math.exp(-7.853981633974483))), rel=1e-14)
        assert approx == pytest.approx(0.0637, abs=1e-4)

    @pytest.mark.parametrize("x", [5.0, 7.854, 10.0, 30.0, 100.0])
    def test_approximation_gap_is_first_order_in_one_over_x(self, x):
        # exact / approx = x e^{-x} S(x) = 1 + 1/x + O(1/x^2); the dropped term sets the gap
        c = consts(self_block_angle_omega=0.0, bs_density_lambda_T=x / (math.pi * 1e4))
        ratio = los.expected_duration_los(c) / los.expected_duration_los_approx(c)
        gap = ratio - 1
        assert 1 / x < gap <= (1 + 4 / x) / x

    @given(st.floats(0.0, 0.5))
    def test_independent_of_blocker_density(self, lam_b):
        ref = los.expected_duration_los(consts())
        assert los.expected_duration_los(consts(blocker_density_lambda_B=lam_b)) == ref

    def test_huge_density_finite(self):
        d = los.expected_duration_los(consts(bs_density_lambda_T=0.05))
        assert 0 < d < 1e-3 and math.isfinite(d)


class TestFrequency:
    def test_reference_point(self):
        assert los.expected_frequency(consts(bs_density_lambda_T=3e-4)) == pytest.approx(FREQ_300, rel=1e-10)

    def test_no_blockers(self):
        assert los.expected_frequency(consts(blocker_density_lambda_B=0.0)) == 0.0

    def test_needs_open_park(self, urban):
        with pytest.raises(ParameterError):
            los.expected_frequency(derive(urban))

    def test_zero_coverage(self):
        assert not is_defined(los.expected_frequency(consts(bs_density_lambda_T=0.0)))

    @pytest.mark.parametrize("lam_t", [1e-4, 3e-4])
    @pytest.mark.parametrize("lam_b", [0.01, 0.1])
    def test_renewal_identity_per_bs_count(self, lam_t, lam_b):
        # With n available BSs, all-blocked periods start at rate
        # f_n = n mu (1 - a')^n and last d_n = 1 / (n mu); f_n d_n is the
        # blocked fraction. Averaging over n given coverage recovers the
        # three closed forms.
        c = consts(bs_density_lambda_T=lam_t, blocker_density_lambda_B=lam_b, self_block_angle_omega=0.0)
        x = c.disc_mean
        ap = los.a_prime(c)
        n = np.arange(1, 400)
        pn = poisson.pmf(n, x) / -math.expm1(-x)
        f_n, d_n = n * c.mu * (1 - ap) ** n, 1 / (n * c.mu)
        assert float(np.dot(pn, f_n)) == pytest.approx(los.expected_frequency(c), rel=1e-10)
        assert float(np.dot(pn, d_n)) == pytest.approx(los.expected_duration_los(c), rel=1e-10)
        assert float(np.dot(pn, f_n * d_n)) == pytest.approx(los.blockage_prob_open_park(c)[1], rel=1e-10)

    def test_frequency_times_duration_is_not_the_probability(self):
        # E[f_n d_n] != E[f_n] E[d_n]: the product of the two averages
        # undershoots the blocked fraction several-fold at this point.
        c = consts(bs_density_lambda_T=3e-4)
        product = los.expected_frequency(c) * los.expected_duration_los(c)
        assert product / los.blockage_prob_open_park(c)[1] < 0.5


class TestReport:
    def test_report_fields_and_provenance(self, urban):
        r = los.los_report(derive(urban))
        assert set(r.row()) == {"coverage_prob", "block_prob_uncond", "block_prob_cond", "exp_duration_s",
                                "exp_frequency_hz", "a_integral", "a_prime"}
        assert not is_defined(r.exp_frequency_hz)
        assert "a_integral" in r.provenance

    def test_open_park_report(self):
        r = los.los_report(consts(), open_park=True)
        assert r.a_integral == r.a_prime
        assert is_defined(r.exp_frequency_hz)
