import math

import numpy as np
import pytest

from deltareg.asymptotics import fit_power_law, sweep
from deltareg.epr import (
    EprConfig,
    association_check,
    delta_sq_box_integral,
    entangled_covariance,
    envelope,
    modified_limit_target,
    modified_norm,
    modified_relative_probability,
    normalized_delta_norm,
    psi_prime_independence,
    relative_probability_unmodified,
    ridge_marginal,
)
from deltareg.genfunc import TestFunction
from deltareg.mollifier import get_mollifier
from deltareg.quadrature import Gaussian

from conftest import (
    BUMP_NORMALIZED_NORM,
    GAUSS_SELF_ENERGY,
    ONE_SIGMA_MASS,
    SELF_ENERGY,
    scipy_modified_integral,
)


class TestConfig:
    def test_defaults(self):
        cfg = EprConfig()
        assert (cfg.x0, cfg.sigma_x, cfg.a, cfg.b, cfg.L, cfg.h) == (2.0, 1.0, -2.0, 0.0, 10.0, 1.0)
        assert cfg.mollifier.kind.value == "gaussian"

    def test_string_mollifier(self):
        assert EprConfig(mollifier="bump").mollifier is get_mollifier("bump")

    @pytest.mark.parametrize("kw", [{"sigma_x": 0}, {"a": 1, "b": 0}, {"L": -1}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            EprConfig(**kw)


class TestEnvelope:
    def test_point_symmetry(self):
        f = envelope(EprConfig(x0=1.3, sigma_x=0.7))
        x1, x2 = 0.4, np.array([-1.1, 0.2, 2.0])
        np.testing.assert_allclose(f(0.0, x1, x2), f(0.0, -x1, -x2), rtol=1e-15)

    @pytest.mark.parametrize("x0, sigma", [(2.0, 1.0), (-3.0, 0.5), (0.0, 2.0)])
    def test_ridge_marginal_is_normal_density(self, x0, sigma):
        cfg = EprConfig(x0=x0, sigma_x=sigma)
        x1 = np.linspace(-6, 6, 25)
        pdf = np.exp(-((x1 + x0 / 2) ** 2) / (2 * sigma ** 2)) / (math.sqrt(2 * math.pi) * sigma)
        np.testing.assert_allclose(ridge_marginal(cfg, x1), pdf, rtol=1e-13)

    def test_limit_target(self):
        assert modified_limit_target(EprConfig()) == pytest.approx(ONE_SIGMA_MASS, rel=1e-14)
        assert modified_limit_target(EprConfig(a=-math.inf, b=math.inf)) == 1.0


class TestDeltaSquaredBox:
    @pytest.mark.parametrize("x0", [0.7, 0.0, -5.0])
    def test_factorization(self, x0):
        cfg = EprConfig(x0=x0, a=0.0, b=1.0)
        assert delta_sq_box_integral(cfg, 1e-2) == pytest.approx(GAUSS_SELF_ENERGY / 1e-2, rel=1e-5)

    def test_empty_interval(self):
        assert delta_sq_box_integral(EprConfig(a=0.5, b=0.5), 1e-2) == 0.0

    def test_order(self, mollifier):
        cfg = EprConfig(a=0.0, b=1.0, mollifier=mollifier)
        fit = fit_power_law(sweep(lambda e: delta_sq_box_integral(cfg, e)))
        assert fit.order == pytest.approx(-1.0, abs=0.02)
        assert fit.constant == pytest.approx(SELF_ENERGY[mollifier.kind.value], rel=1e-6)


class TestUnmodifiedRatio:
    @pytest.mark.parametrize("eps", [1e-2, 1e-3])
    @pytest.mark.parametrize("x0", [0.0, 2.0, 7.5])
    def test_geometric_ratio(self, eps, x0):
        r = relative_probability_unmodified(EprConfig(x0=x0, a=0.0, b=1.0, L=10.0), eps)
        assert r.ratio == pytest.approx(0.05, rel=1e-5)
        assert r.ratio * r.denominator == pytest.approx(r.numerator, rel=1e-10)

    @pytest.mark.parametrize("L, expected", [(10, 0.05), (100, 0.005), (1000, 0.0005)])
    def test_L_sweep(self, L, expected):
        r = relative_probability_unmodified(EprConfig(a=0.0, b=1.0, L=L), 1e-2)
        assert r.ratio == pytest.approx(expected, rel=1e-5)
        assert r.L == L

    def test_prefactor_cancels(self):
        base = relative_probability_unmodified(EprConfig(), 1e-2)
        scaled = relative_probability_unmodified(EprConfig(h=3.7), 1e-2)
        assert scaled.ratio == pytest.approx(base.ratio, rel=1e-12)
        assert scaled.numerator == pytest.approx(3.7 ** 2 * base.numerator, rel=1e-12)

    def test_box_denominator_loses_ridge_strip(self):
        # The ridge x2 = x1 + x0 leaves [-L, L]^2 over a strip of width |x0|.
        r = relative_probability_unmodified(EprConfig(x0=2.0), 1e-2, box_denominator=True)
        assert r.denominator == pytest.approx((20 - 2) * GAUSS_SELF_ENERGY / 1e-2, rel=1e-6)
        # With x0 = 0 the ridge peak is cut in half near the two corners,
        # losing 2 * (C/eps) * eps / (sqrt(2) sqrt(2 pi)) = C / sqrt(pi).
        eps, L = 1e-2, 10.0
        r0 = relative_probability_unmodified(EprConfig(x0=0.0), eps, box_denominator=True)
        expected = 0.1 / (1 - eps / (2 * math.sqrt(math.pi) * L))
        assert r0.ratio == pytest.approx(expected, rel=1e-6)

    def test_requires_L_beyond_interval(self):
        with pytest.raises(ValueError):
            relative_probability_unmodified(EprConfig(a=-2, b=0, L=2.0), 1e-2)


class TestModified:
    def test_norm_value(self):
        assert modified_norm(EprConfig(), 1e-2) == pytest.approx(28.209, rel=1e-3)

    def test_norm_order_and_constant(self, mollifier):
        cfg = EprConfig(mollifier=mollifier)
        s = sweep(lambda e: modified_norm(cfg, e), 1e-1, 1e-4, 7)
        assert fit_power_law(s).order == pytest.approx(-1.0, abs=0.02)
        c = SELF_ENERGY[mollifier.kind.value]
        assert 1e-3 * modified_norm(cfg, 1e-3) == pytest.approx(c, rel=1e-3)

    def test_ridge_collapse_against_scipy(self):
        cfg = EprConfig()
        eps = 1e-3
        oracle = scipy_modified_integral(cfg, eps, -20.0, 18.0)
        assert oracle * eps == pytest.approx(GAUSS_SELF_ENERGY, rel=1e-5)
        assert modified_norm(cfg, eps) == pytest.approx(oracle, rel=1e-7)

    def test_ratio_limit(self):
        r = modified_relative_probability(EprConfig(), 1e-3)
        assert abs(r.ratio - ONE_SIGMA_MASS) < 2e-3
        num = scipy_modified_integral(EprConfig(), 1e-3, -2.0, 0.0)
        assert r.numerator == pytest.approx(num, rel=1e-7)

    def test_full_window_ratio_is_one(self):
        cfg = EprConfig(a=-math.inf, b=math.inf)
        assert modified_relative_probability(cfg, 1e-3).ratio == pytest.approx(1.0, abs=1e-6)
        lo, hi = EprConfig().infinite_window()
        cfg = EprConfig(a=lo, b=hi)
        assert modified_relative_probability(cfg, 1e-3).ratio == pytest.approx(1.0, abs=1e-6)

    def test_empty_interval(self):
        assert modified_relative_probability(EprConfig(a=0.0, b=0.0), 1e-3).ratio == 0.0

    def test_translation_covariance(self):
        c = 1.5
        base = modified_relative_probability(EprConfig(), 1e-3).ratio
        moved = modified_relative_probability(EprConfig(x0=2 + 2 * c, a=-2 - c, b=0 - c), 1e-3).ratio
        assert moved == pytest.approx(base, rel=1e-8)

    def test_unmodified_ratio_ignores_x0(self):
        a = relative_probability_unmodified(EprConfig(x0=-4.0), 1e-3).ratio
        b = relative_probability_unmodified(EprConfig(x0=3.0), 1e-3).ratio
        assert a == pytest.approx(b, rel=1e-10)

    def test_prefactor_cancels(self):
        a = modified_relative_probability(EprConfig(), 1e-2).ratio
        b = modified_relative_probability(EprConfig(h=0.25), 1e-2).ratio
        assert a == pytest.approx(b, rel=1e-12)

    def test_eps_must_resolve_envelope(self):
        with pytest.raises(ValueError):
            modified_norm(EprConfig(sigma_x=0.5), 0.2)
        with pytest.raises(ValueError):
            modified_relative_probability(EprConfig(sigma_x=0.5), 0.06)


class TestIndependence:
    @pytest.mark.parametrize("x0, sigma", [(2.0, 1.0), (-1.0, 1.0), (2.0, 2.0), (0.5, 0.3)])
    def test_product_form(self, x0, sigma):
        rep = psi_prime_independence(EprConfig(x0=x0, sigma_x=sigma))
        assert abs(rep.covariance) <= 1e-8
        assert rep.max_conditional_variation <= 1e-8
        # Each marginal is Gaussian with variance 2 sigma^2.
        assert rep.variance_x1 == pytest.approx(2 * sigma ** 2, rel=1e-8)
        assert rep.variance_x2 == pytest.approx(2 * sigma ** 2, rel=1e-8)

    def test_entangled_contrast(self):
        cov = entangled_covariance(EprConfig(), 1e-2)
        assert cov >= 0.9
        # Var(x1) = sigma^2 exactly on the ridge; the transverse spread adds O(eps^2).
        assert cov == pytest.approx(1.0, abs=1e-3)


class TestNormalizedDelta:
    def test_gaussian(self, gauss):
        assert abs(normalized_delta_norm(gauss, 1e-2) - 1 / math.sqrt(2)) < 1e-8

    def test_bump_oracle_and_difference(self, gauss, bump):
        b = normalized_delta_norm(bump, 1e-2)
        assert abs(b - BUMP_NORMALIZED_NORM) < 1e-8
        assert abs(normalized_delta_norm(gauss, 1e-2) - b) / (1 / math.sqrt(2)) > 0.05

    def test_eps_independence(self, mollifier):
        vals = [normalized_delta_norm(mollifier, e) for e in (1e-2, 1e-3, 1e-4)]
        assert max(vals) - min(vals) < 1e-8


class TestAssociation:
    def test_gaussian_diverges(self, mollifier):
        psi = TestFunction(lambda x: np.exp(-x ** 2), Gaussian(0, 1))
        c = association_check(psi, mollifier)
        assert c.kind == "divergent"
        assert c.order == pytest.approx(-1.0, abs=0.02)

    def test_flat_testfunction_converges(self, mollifier):
        psi = TestFunction(lambda x: x ** 2 * np.exp(-x ** 2), Gaussian(0, 1))
        c = association_check(psi, mollifier)
        assert (c.kind, c.limit) == ("convergent", 0.0)
        assert c.order == pytest.approx(1.0, abs=0.05)

    def test_odd_testfunction_converges(self, gauss):
        psi = TestFunction(lambda x: x * np.exp(-x ** 2), Gaussian(0, 1))
        c = association_check(psi, gauss)
        assert (c.kind, c.limit) == ("convergent", 0.0)
