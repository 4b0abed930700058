"""Pricing-map layer: closed-form checks, brute-force oracles, invariants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xmpricing.errors import InvalidParameterError, NoRootError
from xmpricing.noise_link import (
    expected_revenue,
    inverse_phi,
    make_logistic,
    make_price_map,
    price_of,
    regularity_constants,
    unclipped_price,
    virtual_valuation,
)

# Frozen oracle values.  Each was computed with an independent method
# (30-digit mpmath evaluation of the logistic closed forms, brute-force
# scans, grid argmax) before the implementation existed.
CDF_HALF_SCALE_HALF = 0.7310585786300049  # 1/(1+e^-1)
PHI_AT_5 = 3.9932620530009145  # 5 - (1 - F(5))/f(5), high-precision eval
PHI_INV_AT_0 = 1.2784645427610738  # brute scan at 1e-5 then root refinement
REV_AT_12785 = 0.2784645426241578  # 1.2785 * (1 - F(1.2785))
ORACLE_REV_G0 = 0.2784645427610738  # revenue at the exact optimal price, g=0
H_AT_HALF = 1.4046738485459385  # 0.5 + root of phi(w) = -0.5
UF_RANGE_2 = 0.8807970779778823  # max over [-2,2] of {f/F, f/(1-F)} = F(2)
LF_RANGE_2 = 0.10499358540350652  # min over [-2,2] of -(log F)'' etc. = f(2)


@pytest.fixture(scope="module")
def logistic_unit():
    return make_logistic(1.0, 1.0)


@pytest.fixture(scope="module")
def pm_unit(logistic_unit):
    # utility bound 2 mirrors the default L1 budget W = 2
    return make_price_map(logistic_unit, utility_bound=2.0)


class TestMakeLogistic:
    def test_cdf_symmetry_at_zero(self, logistic_unit):
        assert logistic_unit.cdf(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_pdf_closed_form_at_zero(self, logistic_unit):
        assert logistic_unit.pdf(0.0) == pytest.approx(0.25, abs=1e-15)

    def test_cdf_half_scale(self):
        model = make_logistic(0.5, 1.0)
        assert model.cdf(0.5) == pytest.approx(CDF_HALF_SCALE_HALF, abs=1e-12)

    def test_invalid_parameters(self):
        with pytest.raises(InvalidParameterError):
            make_logistic(0.0, 1.0)
        with pytest.raises(InvalidParameterError):
            make_logistic(-1.0, 1.0)
        with pytest.raises(InvalidParameterError):
            make_logistic(1.0, 0.0)

    def test_cdf_nondecreasing_and_tails(self, logistic_unit):
        grid = np.linspace(-30, 30, 2001)
        c = logistic_unit.cdf(grid)
        assert np.all(np.diff(c) >= 0)
        assert logistic_unit.cdf(-10.0) < 0.01
        assert logistic_unit.cdf(10.0) > 0.99

    def test_pdf_nonnegative_integrates_to_one(self, logistic_unit):
        grid = np.linspace(-20, 20, 40001)
        f = logistic_unit.pdf(grid)
        assert np.all(f >= 0)
        assert np.trapezoid(f, grid) == pytest.approx(1.0, abs=1e-3)

    def test_pdf_matches_cdf_finite_difference(self, logistic_unit):
        grid = np.linspace(-8, 8, 161)
        h = 1e-6
        fd = (logistic_unit.cdf(grid + h) - logistic_unit.cdf(grid - h)) / (2 * h)
        f = logistic_unit.pdf(grid)
        assert np.max(np.abs(fd - f) / f) < 1e-5

    def test_pdf_prime_matches_finite_difference(self, logistic_unit):
        # avoid u = 0 where pdf_prime vanishes and relative error degenerates
        grid = np.concatenate([np.linspace(-8, -0.05, 80), np.linspace(0.05, 8, 80)])
        h = 1e-5
        fd = (logistic_unit.pdf(grid + h) - logistic_unit.pdf(grid - h)) / (2 * h)
        fp = logistic_unit.pdf_prime(grid)
        assert np.max(np.abs(fd - fp) / np.abs(fp)) < 1e-4


class TestVirtualValuation:
    def test_at_zero_unit_scale(self, logistic_unit):
        assert virtual_valuation(logistic_unit, 0.0) == pytest.approx(-2.0, abs=1e-12)

    def test_at_five_closed_form(self, logistic_unit):
        assert virtual_valuation(logistic_unit, 5.0) == pytest.approx(
            PHI_AT_5, abs=1e-12
        )

    def test_at_zero_half_scale(self):
        model = make_logistic(0.5, 1.0)
        assert virtual_valuation(model, 0.0) == pytest.approx(-1.0, abs=1e-12)

    def test_strictly_increasing_on_grid(self, logistic_unit):
        grid = np.arange(-10, 10, 1e-2)
        vals = virtual_valuation(logistic_unit, grid)
        assert np.all(np.diff(vals) > 0)

    def test_derivative_at_least_one(self, logistic_unit):
        grid = np.arange(-10, 10, 1e-2)
        h = 1e-6
        fd = (
            virtual_valuation(logistic_unit, grid + h)
            - virtual_valuation(logistic_unit, grid - h)
        ) / (2 * h)
        assert np.all(fd >= 1.0)

    @given(st.floats(min_value=-8, max_value=8), st.floats(min_value=0.1, max_value=3))
    @settings(max_examples=50, deadline=None)
    def test_increment_is_minus_scale_over_cdf(self, u, s):
        model = make_logistic(s, 1.0)
        assert virtual_valuation(model, u) - u == pytest.approx(
            -s / model.cdf(u), rel=1e-9
        )


class TestInversePhi:
    def test_known_point(self, pm_unit):
        assert inverse_phi(pm_unit, -2.0) == pytest.approx(0.0, abs=1e-8)

    def test_at_zero_brute_force_value(self, pm_unit):
        assert inverse_phi(pm_unit, 0.0) == pytest.approx(PHI_INV_AT_0, abs=1e-8)

    def test_round_trip(self, pm_unit, logistic_unit):
        w = inverse_phi(pm_unit, virtual_valuation(logistic_unit, 3.7))
        assert w == pytest.approx(3.7, abs=1e-8)

    def test_round_trip_grid(self, pm_unit, logistic_unit):
        for v in np.linspace(-10, 10, 201):
            w = inverse_phi(pm_unit, float(v))
            assert abs(virtual_valuation(logistic_unit, w) - v) <= 1e-8


class TestPriceOf:
    def test_composition_at_two(self, pm_unit):
        assert price_of(pm_unit, 2.0) == pytest.approx(2.0, abs=1e-8)

    def test_at_zero(self, pm_unit):
        assert price_of(pm_unit, 0.0) == pytest.approx(PHI_INV_AT_0, abs=1e-8)

    def test_against_grid_argmax(self, pm_unit, logistic_unit):
        # independent brute-force revenue maximization at g = 0.5
        prices = np.arange(0.0, 6.0 + 1e-12, 1e-4)
        rev = prices * logistic_unit.sf(prices - 0.5)
        best = prices[np.argmax(rev)]
        assert price_of(pm_unit, 0.5) == pytest.approx(best, abs=1e-3)
        assert price_of(pm_unit, 0.5) == pytest.approx(H_AT_HALF, abs=1e-8)

    def test_cap_clipping(self, pm_unit):
        cap = pm_unit.price_cap
        assert price_of(pm_unit, 50.0) == cap
        assert price_of(pm_unit, 2.0) <= cap + 1e-12

    def test_interpolated_map_matches_exact(self, logistic_unit):
        pm = make_price_map(logistic_unit, 2.0, interpolate=True)
        pm_exact = make_price_map(logistic_unit, 2.0)
        for u in np.linspace(-2, 2, 41):
            assert price_of(pm, float(u)) == pytest.approx(
                price_of(pm_exact, float(u)), abs=1e-6
            )


class TestExpectedRevenue:
    def test_zero_price(self, logistic_unit):
        assert expected_revenue(logistic_unit, 1.3, 0.0) == 0.0

    def test_value_near_optimum(self, logistic_unit):
        assert expected_revenue(logistic_unit, 0.0, 1.2785) == pytest.approx(
            REV_AT_12785, abs=1e-12
        )

    def test_negative_price_rejected(self, logistic_unit):
        with pytest.raises(InvalidParameterError):
            expected_revenue(logistic_unit, 0.0, -0.5)

    def test_optimal_price_dominates_grid(self, pm_unit, logistic_unit):
        rng = np.random.default_rng(7)
        prices = np.arange(0.0, 6.0, 1e-3)
        for g in rng.uniform(-2, 2, 10):
            star = expected_revenue(logistic_unit, g, price_of(pm_unit, float(g)))
            grid_rev = prices * logistic_unit.sf(prices - g)
            assert star >= np.max(grid_rev) - 1e-6


class TestRegularityConstants:
    def test_unit_scale_range_two(self, logistic_unit):
        u_f, l_f = regularity_constants(logistic_unit, 1.0, 1.0)
        assert u_f == pytest.approx(UF_RANGE_2, abs=1e-6)
        assert l_f == pytest.approx(LF_RANGE_2, abs=1e-6)

    def test_scaling_at_origin(self):
        # f(0)/F(0) = 1/(2s): doubling the scale halves the score at 0
        for s in (0.5, 1.0, 2.0):
            model = make_logistic(s, 1.0)
            assert model.pdf(0.0) / model.cdf(0.0) == pytest.approx(
                1.0 / (2 * s), rel=1e-12
            )


class TestPricingMapShape:
    def test_h_derivative_strictly_inside_unit_interval(self, pm_unit):
        h = 1e-5
        for u in np.linspace(-5, 5, 101):
            d = (unclipped_price(pm_unit, u + h) - unclipped_price(pm_unit, u - h)) / (
                2 * h
            )
            assert 0.0 < d < 1.0 - 1e-9

    def test_oracle_optimality_random_utilities(self, pm_unit, logistic_unit):
        rng = np.random.default_rng(1234)
        prices = np.arange(0.0, 6.0 + 1e-12, 1e-4)
        for g in rng.uniform(-2, 2, 50):
            grid_best = prices[np.argmax(prices * logistic_unit.sf(prices - g))]
            assert abs(price_of(pm_unit, float(g)) - grid_best) <= 1e-3

    def test_price_cap_is_h_at_bound(self, pm_unit):
        assert pm_unit.price_cap == pytest.approx(
            unclipped_price(pm_unit, 2.0), abs=1e-12
        )

    def test_bracket_cap_raises(self, logistic_unit):
        pm = make_price_map(logistic_unit, 2.0)
        with pytest.raises(NoRootError):
            # far beyond anything phi can reach within the bracket cap
            inverse_phi(pm, -math.exp(300))
