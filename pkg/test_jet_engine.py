#!/usr/bin/env python3
"""
Jet Engine Test Suite
Exact derivatives of the catalog functions and jet arithmetic.
"""

import math

import numpy as np
import pytest
from scipy import special as sp

from frac_config import ConfigurationError, DomainError
from jet_engine import CatalogFn, Jet, derivative, jet_eval, shift_check


class TestJetArithmetic:
    """Jet construction and algebra."""

    def test_variable_and_constant(self):
        x = Jet.variable(0.7, 3)
        c = Jet.constant(0.7, 2.0, 3)
        assert list(x.coeffs) == [0.7, 1.0, 0.0, 0.0]
        assert list(c.coeffs) == [2.0, 0.0, 0.0, 0.0]
        assert x.order == 3

    def test_product_of_variables(self):
        x = Jet.variable(1.5, 4)
        square = x * x
        assert square.coeffs[:3] == pytest.approx([2.25, 3.0, 1.0])
        assert square.coeffs[3] == 0.0

    def test_sum_difference_scaling(self):
        x = Jet.variable(2.0, 2)
        expr = 3.0 * x - 1.0 + x
        assert list(expr.coeffs) == pytest.approx([7.0, 4.0, 0.0])
        assert list((1.0 - x).coeffs) == pytest.approx([-1.0, -1.0, 0.0])

    def test_exp_composition(self):
        x0 = 0.3
        e = (Jet.variable(x0, 8) * 2.0).exp()
        expected = [math.exp(2 * x0) * 2.0 ** k / math.factorial(k) for k in range(9)]
        assert e.coeffs == pytest.approx(expected, rel=1e-13)
        print("✅ Jet - exp composition")

    def test_gaussian_by_composition_matches_recurrence(self):
        x0 = 0.8
        u = Jet.variable(x0, 12)
        composed = (-(u * u)).exp()
        direct = jet_eval(CatalogFn("gaussian"), x0, 12)
        assert composed.coeffs == pytest.approx(direct.coeffs, rel=1e-12, abs=1e-15)

    def test_evaluate(self):
        jet = Jet(0.0, [1.0, 2.0, 3.0])
        assert jet.evaluate(0.5) == pytest.approx(1.0 + 1.0 + 0.75)

    def test_shift_to(self):
        jet = Jet(0.0, [1.0, 2.0])
        moved = jet.shift_to(1.0)
        assert moved.point == 1.0
        assert list(moved.coeffs) == pytest.approx([3.0, 2.0])

    def test_shift_to_raises_order(self):
        moved = Jet(0.0, [0.0, 0.0, 1.0]).shift_to(2.0, 4)
        assert list(moved.coeffs) == pytest.approx([4.0, 4.0, 1.0, 0.0, 0.0])

    def test_mismatched_points(self):
        with pytest.raises(DomainError):
            Jet.variable(0.0, 2) + Jet.variable(1.0, 2)

    def test_nonfinite_rejected(self):
        with pytest.raises(DomainError):
            Jet(0.0, [1.0, np.nan])

    def test_coefficients_read_only(self):
        jet = Jet.variable(1.0, 2)
        with pytest.raises(ValueError):
            jet.coeffs[0] = 5.0


class TestCatalogJets:
    """Exact derivatives of the catalog."""

    def test_sech_derivatives(self):
        x = 0.9
        s, t = 1.0 / math.cosh(x), math.tanh(x)
        f = CatalogFn("sech")
        assert derivative(f, x, 0) == pytest.approx(s)
        assert derivative(f, x, 1) == pytest.approx(-s * t, rel=1e-14)
        assert derivative(f, x, 2) == pytest.approx(s * (t * t - s * s), rel=1e-13)

    def test_tanh_derivatives(self):
        x = -0.4
        s, t = 1.0 / math.cosh(x), math.tanh(x)
        f = CatalogFn("tanh")
        assert derivative(f, x, 1) == pytest.approx(s * s, rel=1e-14)
        assert derivative(f, x, 2) == pytest.approx(-2.0 * s * s * t, rel=1e-13)

    def test_gaussian_hermite(self):
        x = 1.1
        f = CatalogFn("gaussian")
        for k in range(11):
            expected = (-1) ** k * sp.eval_hermite(k, x) * math.exp(-x * x)
            assert derivative(f, x, k) == pytest.approx(expected, rel=1e-10)
        print("✅ Jet - Gaussian derivatives match Hermite")

    def test_trig_and_exp_cycles(self):
        x = 1.2
        assert derivative(CatalogFn("sin"), x, 5) == pytest.approx(math.cos(x))
        assert derivative(CatalogFn("cos"), x, 6) == pytest.approx(-math.cos(x))
        assert derivative(CatalogFn("exp"), x, 7) == pytest.approx(math.exp(x))

    def test_power_and_constant(self):
        f = CatalogFn("power", 2.5)
        assert derivative(f, 2.0, 3) == pytest.approx(2.5 * 1.5 * 0.5 * 2.0 ** -0.5)
        assert derivative(CatalogFn("power", 2.0), 0.0, 2) == pytest.approx(2.0)
        assert derivative(CatalogFn("power", 2.0), 3.0, 3) == 0.0
        assert derivative(CatalogFn("constant", 4.0), 1.0, 0) == 4.0
        assert derivative(CatalogFn("constant", 4.0), 1.0, 1) == 0.0

    def test_overflow_is_domain_error(self):
        with pytest.raises(DomainError):
            derivative(CatalogFn("exp"), 800.0, 2)
        assert derivative(CatalogFn("sech"), 800.0, 1) == 0.0


    def test_product_rule(self):
        # sech' = -sech tanh, so the product jet is -(k + 1) s_{k+1}
        rng = np.random.default_rng(20)
        for x in rng.uniform(-3.0, 3.0, 50):
            x = float(x)
            s = jet_eval(CatalogFn("sech"), x, 21)
            t = jet_eval(CatalogFn("tanh"), x, 20)
            product = jet_eval(CatalogFn("sech"), x, 20) * t
            cauchy = [sum(s.coeffs[i] * t.coeffs[k - i] for i in range(k + 1)) for k in range(21)]
            from_derivative = [-(k + 1) * s.coeffs[k + 1] for k in range(21)]
            scale = float(np.max(np.abs(product.coeffs)))
            assert list(product.coeffs) == pytest.approx(cauchy, rel=1e-12, abs=1e-14 * scale)
            assert list(product.coeffs) == pytest.approx(from_derivative, rel=1e-12,
                                                         abs=1e-14 * scale)
        print("✅ Jet - sech*tanh product rule at 50 points")

    @pytest.mark.parametrize("f", [
        CatalogFn("sech"), CatalogFn("tanh"), CatalogFn("sin"), CatalogFn("cos"),
        CatalogFn("gaussian"), CatalogFn("exp"), CatalogFn("power", 2.5),
        CatalogFn("constant", 3.0),
    ], ids=lambda f: f.label)
    def test_central_differences(self, f):
        # (D^{k-1} f(x + h) - D^{k-1} f(x - h)) / 2h against D^k f
        rng = np.random.default_rng(4)
        h = 1e-4
        for x in rng.uniform(0.3, 3.0, 20):
            x = float(x)
            for k in range(1, 5):
                estimate = (derivative(f, x + h, k - 1) - derivative(f, x - h, k - 1)) / (2.0 * h)
                exact = derivative(f, x, k)
                scale = max(abs(derivative(f, x, j)) for j in range(k + 1))
                assert abs(estimate - exact) <= 1e-5 * max(abs(exact), scale, 1.0)

    def test_sech_high_order_finite(self):
        derivs = jet_eval(CatalogFn("sech"), 0.5, 60).derivatives()
        assert np.all(np.isfinite(derivs))

    def test_order_limits(self):
        with pytest.raises(DomainError):
            jet_eval(CatalogFn("sin"), 0.0, 201)
        with pytest.raises(DomainError):
            jet_eval(CatalogFn("sin"), 0.0, 180).derivative(175)

    def test_power_domain(self):
        with pytest.raises(DomainError):
            jet_eval(CatalogFn("power", 0.5), 0.0, 3)
        with pytest.raises(DomainError):
            jet_eval(CatalogFn("power", -1.0), 0.0, 3)

    def test_shift_check_first_order(self):
        f = CatalogFn("sin")
        for h in (1e-3, 5e-4):
            direct, operator = shift_check(f, 1.0, 3, h)
            assert abs(direct - operator) < 10.0 * h * h

    @pytest.mark.parametrize("j", [1, 2, 4])
    def test_shift_check_second_order_gap(self, j):
        f = CatalogFn("sech")
        gaps = []
        for h in (1e-2, 5e-3, 2.5e-3):
            direct, operator = shift_check(f, 0.3, j, h)
            gaps.append(abs(direct - operator))
        assert gaps[0] >= 3.5 * gaps[1]
        assert gaps[1] >= 3.5 * gaps[2]


class TestCatalogFn:
    """Parsing and point values."""

    def test_parse(self):
        assert CatalogFn.parse("sech") == CatalogFn("sech")
        assert CatalogFn.parse("power:2.5") == CatalogFn("power", 2.5)
        assert CatalogFn.parse("power").param == 1.0
        assert CatalogFn.parse("constant:3").label == "constant:3"

    @pytest.mark.parametrize("text", ["bogus", "sin:2", "power:abc"])
    def test_parse_rejects(self, text):
        with pytest.raises(ConfigurationError):
            CatalogFn.parse(text)

    def test_values_vectorised(self):
        xs = np.array([0.1, 0.5, 2.0])
        assert CatalogFn("sech").values(xs) == pytest.approx(1.0 / np.cosh(xs))
        assert CatalogFn("gaussian").values(xs) == pytest.approx(np.exp(-xs * xs))
        assert CatalogFn("power", 1.5).values(xs) == pytest.approx(xs ** 1.5)
        assert CatalogFn("constant", 2.0).value(0.3) == 2.0


def main():
    """Run jet engine tests."""
    print("🧪 Jet Engine Test Suite")
    print("=========================")

    exit_code = pytest.main([__file__, "-v", "--tb=short", "--no-header"])

    if exit_code == 0:
        print("\n✅ All tests passed!")
    else:
        print("\n❌ Some tests failed!")
    return exit_code


if __name__ == "__main__":
    exit(main())
