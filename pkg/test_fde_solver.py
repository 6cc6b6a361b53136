#!/usr/bin/env python3
"""
FDE Solver Test Suite
Truncated-ODE reduction, RK4, shooting and the exact solutions.
"""

import math

import numpy as np
import pytest

from fde_solver import (
    FdeKind, FdeProblem, FdeSolver, OdeSystem, build_truncated_ode, exact_constant,
    exact_constant_derivatives, exact_variable, exact_variable_derivatives,
    frobenius_exponent, integrate_through, reciprocal_jet, rk4_integrate, substitute_reciprocal,
    to_log_frame, truncation_residual
)
from frac_config import (
    BracketError, ConfigurationError, DomainError, SingularCoefficientError
)
from special_functions import fox_wright


@pytest.fixture(scope="module")
def constant_report():
    """Default constant-coefficient pipeline on a coarse report grid."""
    solver = FdeSolver()
    grid = np.linspace(0.1, 10.0, 34)
    return solver.solve_and_compare(FdeProblem(FdeKind.CONSTANT, 1.0), grid)


def manufactured_system() -> OdeSystem:
    # f = exp(-x) solves f'' + f' + f - exp(-x) = 0
    return OdeSystem(2, lambda x: 1.0, lambda x: 1.0, lambda x: 1.0, lambda x: -math.exp(-x))


class TestReduction:
    """Truncated ODE coefficients."""

    def test_constant_coefficients(self):
        lam = 0.7
        system = build_truncated_ode(FdeProblem(FdeKind.CONSTANT, lam))
        assert system.order == 2
        for x in (0.01, 0.5, 3.0, 10.0):
            assert system.c2(x) == pytest.approx(-x * x / 6.0, rel=1e-12)
            assert system.c1(x) == pytest.approx(x, rel=1e-12)
            assert system.c0(x) == pytest.approx(1.0 + lam * math.sqrt(math.pi * x), rel=1e-12)
            assert system.source(x) == pytest.approx(-1.0, rel=1e-12)
        print("✅ Reduction - constant-coefficient ODE")

    def test_variable_coefficients(self):
        lam = 1.3
        system = build_truncated_ode(FdeProblem(FdeKind.VARIABLE, lam))
        for x in (0.2, 1.0, 7.0):
            assert system.c2(x) == pytest.approx(-x ** 3 / 6.0, rel=1e-12)
            assert system.c1(x) == pytest.approx(x * x, rel=1e-12)
            assert system.c0(x) == pytest.approx(x + lam * math.sqrt(math.pi * x), rel=1e-12)
            assert system.source(x) == 0.0

    def test_reciprocal_substitution(self):
        lam = 1.0
        system = substitute_reciprocal(build_truncated_ode(FdeProblem(FdeKind.VARIABLE, lam)))
        assert system.variable == "y"
        for y in (0.1, 0.5, 2.0):
            assert system.c2(y) == pytest.approx(y * y)
            assert system.c1(y) == pytest.approx(8.0 * y, rel=1e-12)
            assert system.c0(y) == pytest.approx(-6.0 * (1.0 + lam * math.sqrt(math.pi * y)), rel=1e-12)

    def test_reciprocal_residuals_agree(self):
        # f = 1 / (1 + x) is not a solution, so the residuals are nonzero
        system = build_truncated_ode(FdeProblem(FdeKind.VARIABLE, 1.0))
        reciprocal = substitute_reciprocal(system)
        for x in np.geomspace(0.05, 20.0, 50):
            x = float(x)
            f, f1, f2 = 1.0 / (1.0 + x), -1.0 / (1.0 + x) ** 2, 2.0 / (1.0 + x) ** 3
            c2, c1, c0, s = system.coefficients(x)
            size = abs(c2 * f2) + abs(c1 * f1) + abs(c0 * f) + abs(s)
            direct = system.residual(x, f, f1, f2)
            y = 1.0 / x
            jet = reciprocal_jet(x, f, f1, f2)
            assert reciprocal.parent_residual(y, *jet) == pytest.approx(direct, rel=1e-12,
                                                                        abs=1e-12 * size)
            scale = reciprocal.scale(y)
            assert reciprocal.residual(y, *jet) == pytest.approx(scale * direct, rel=1e-12,
                                                                 abs=1e-12 * size * abs(scale))
        print("✅ Reciprocal substitution - residuals agree at 50 points")

    def test_reciprocal_truncation_residual(self):
        system = build_truncated_ode(FdeProblem(FdeKind.VARIABLE, 1.0))
        reciprocal = substitute_reciprocal(system)
        direct = truncation_residual(system, 2.0)
        assert direct != 0.0
        assert truncation_residual(reciprocal, 2.0) == pytest.approx(direct, rel=1e-10)

    def test_reciprocal_needs_variable_kind(self):
        with pytest.raises(ConfigurationError):
            substitute_reciprocal(build_truncated_ode(FdeProblem(FdeKind.CONSTANT, 1.0)))

    def test_two_terms_first_order(self):
        system = build_truncated_ode(FdeProblem(FdeKind.CONSTANT, 1.0, 0.5, 2))
        assert system.order == 1

    def test_integer_order(self):
        system = build_truncated_ode(FdeProblem(FdeKind.CONSTANT, 2.0, 1.0, 3))
        assert system.order == 1
        assert system.c1(3.0) == pytest.approx(1.0)
        assert system.c0(3.0) == pytest.approx(2.0)
        assert system.source(3.0) == 0.0

    @pytest.mark.parametrize("kind, q, n", [
        (FdeKind.CONSTANT, 0.5, 4),
        (FdeKind.CONSTANT, 1.5, 3),
        (FdeKind.CONSTANT, 2.0, 3),
        (FdeKind.VARIABLE, 0.5, 2),
        (FdeKind.VARIABLE, 1.0, 3),
    ])
    def test_unsupported(self, kind, q, n):
        with pytest.raises(ConfigurationError):
            build_truncated_ode(FdeProblem(kind, 1.0, q, n))

    def test_problem_validation(self):
        with pytest.raises(DomainError):
            FdeProblem(FdeKind.CONSTANT, -1.0)
        with pytest.raises(DomainError):
            FdeProblem(FdeKind.CONSTANT, 1.0, 0.0)

    def test_frobenius_exponent(self):
        r = frobenius_exponent(FdeProblem(FdeKind.VARIABLE, 1.0))
        assert r == pytest.approx((-7.0 + math.sqrt(73.0)) / 2.0, rel=1e-12)


class TestIntegrator:
    """Fixed-step RK4."""

    def test_fourth_order(self):
        errors = []
        for steps in (10, 20, 40):
            _, f, _ = rk4_integrate(manufactured_system(), 0.0, 2.0, steps, (1.0, -1.0))[-1]
            errors.append(abs(f - math.exp(-2.0)))
        for coarse, fine in zip(errors, errors[1:]):
            assert 8.0 <= coarse / fine <= 32.0
        print(f"✅ RK4 - error ratios {errors[0] / errors[1]:.1f}, {errors[1] / errors[2]:.1f}")

    def test_first_order(self):
        system = OdeSystem(1, lambda x: 0.0, lambda x: 1.0, lambda x: 1.0, lambda x: 0.0)
        trajectory = rk4_integrate(system, 0.0, 1.0, 100, (1.0, 0.0))
        t, f, g = trajectory[-1]
        assert t == pytest.approx(1.0)
        assert f == pytest.approx(math.exp(-1.0), rel=1e-9)
        assert g == pytest.approx(-f)
        assert len(trajectory) == 101

    def test_backward(self):
        _, f, _ = rk4_integrate(manufactured_system(), 2.0, 0.0, 200,
                                (math.exp(-2.0), -math.exp(-2.0)))[-1]
        assert f == pytest.approx(1.0, rel=1e-8)

    def test_singular_coefficient(self):
        system = OdeSystem(2, lambda x: x, lambda x: 1.0, lambda x: 1.0, lambda x: 0.0)
        with pytest.raises(SingularCoefficientError):
            rk4_integrate(system, 0.0, 1.0, 10, (1.0, 0.0))

    def test_steps_positive(self):
        with pytest.raises(DomainError):
            rk4_integrate(manufactured_system(), 0.0, 1.0, 0, (1.0, -1.0))

    def test_integrate_through_hits_stops(self):
        stops = [0.0, 0.3, 0.35, 1.7, 2.0]
        states = integrate_through(manufactured_system(), stops, 400, (1.0, -1.0))
        assert [t for t, _, _ in states] == stops
        for t, f, g in states:
            assert f == pytest.approx(math.exp(-t), rel=1e-9)
            assert g == pytest.approx(-math.exp(-t), rel=1e-9)

    def test_log_frame(self):
        # x^2 f'' - 2 f = 0 has f = x^2; in s = ln x, f = exp(2 s)
        euler = OdeSystem(2, lambda x: x * x, lambda x: 0.0, lambda x: -2.0, lambda x: 0.0)
        log_system = to_log_frame(euler)
        assert log_system.c2(0.7) == pytest.approx(1.0)
        assert log_system.c1(0.7) == pytest.approx(-1.0)
        _, f, f_s = rk4_integrate(log_system, 0.0, math.log(2.0), 1000, (1.0, 2.0))[-1]
        assert f == pytest.approx(4.0, rel=1e-10)
        assert f_s == pytest.approx(8.0, rel=1e-10)


class TestExactSolutions:
    """Closed-form solutions and derivatives."""

    def test_constant_is_erfc_form(self):
        for x in (0.01, 0.5, 2.0, 6.0):
            expected = math.exp(x) * math.erfc(math.sqrt(x))
            assert exact_constant(1.0, 0.5, x) == pytest.approx(expected, rel=1e-9)
        assert exact_constant(1.0, 0.5, 0.0) == 1.0

    def test_constant_first_order(self):
        assert exact_constant(0.8, 1.0, 2.0) == pytest.approx(math.exp(-1.6), rel=1e-12)

    def test_constant_negative_x(self):
        with pytest.raises(DomainError):
            exact_constant(1.0, 0.5, -0.1)

    @pytest.mark.parametrize("x", [0.3, 1.0, 4.0])
    def test_constant_derivatives(self, x):
        f, f1, f2 = exact_constant_derivatives(1.0, x)
        h = 1e-4
        slope = (exact_constant(1.0, 0.5, x + h) - exact_constant(1.0, 0.5, x - h)) / (2 * h)
        assert f1 == pytest.approx(slope, rel=1e-6)
        h = 1e-3
        curvature = (exact_constant(1.0, 0.5, x + h) - 2 * f + exact_constant(1.0, 0.5, x - h)) / (h * h)
        assert f2 == pytest.approx(curvature, rel=1e-4)

    @pytest.mark.parametrize("x", [0.5, 1.0, 3.0])
    def test_variable_derivatives(self, x):
        lam = 1.0
        f, f1, f2 = exact_variable_derivatives(lam, x)
        h = 1e-5
        slope = (exact_variable(lam, x + h) - exact_variable(lam, x - h)) / (2 * h)
        assert f1 == pytest.approx(slope, rel=1e-6)
        h = 1e-3
        curvature = (exact_variable(lam, x + h) - 2 * f + exact_variable(lam, x - h)) / (h * h)
        assert f2 == pytest.approx(curvature, rel=1e-4)

    def test_variable_fox_wright_form(self):
        lam = 1.0
        for x in np.linspace(0.5, 10.0, 20):
            psi = fox_wright([], [(0.5, -0.5)], 2.0 * lam / math.sqrt(x))
            expected = math.sqrt(math.pi) * math.exp(lam * lam) * psi / math.sqrt(x)
            assert exact_variable(lam, float(x)) == pytest.approx(expected, rel=1e-8)

    def test_variable_normalisation(self):
        assert exact_variable(1.7, 1.0) == pytest.approx(1.0)
        with pytest.raises(DomainError):
            exact_variable(1.0, 0.0)

    def test_truncation_residual_small(self):
        system = build_truncated_ode(FdeProblem(FdeKind.CONSTANT, 1.0))
        for x in np.linspace(0.1, 5.0, 50):
            residual = truncation_residual(system, float(x))
            assert abs(residual) < 0.05 * exact_constant(1.0, 0.5, float(x))
        print("✅ Exact solution - truncated ODE residual below 5% of lambda f")


class TestConstantPipeline:
    """Backward shooting for the decay problem."""

    def test_accuracy(self, constant_report):
        assert np.all(np.isfinite(constant_report.numeric))
        assert constant_report.max_abs_error < 0.035
        print(f"✅ FDE constant - max relative error {constant_report.max_abs_error:.4f}")

    def test_solution_shape(self, constant_report):
        numeric = constant_report.numeric
        assert np.all(numeric > 0.0)
        assert np.all(numeric < 1.0)
        assert np.all(np.diff(numeric) < 0.0)

    def test_settings_recorded(self, constant_report):
        settings = constant_report.settings
        assert settings["eps"] == 1e-4
        assert settings["x_max"] == 20.0
        assert settings["start_slope"] < 0.0
        assert -1e3 < settings["far_value"] < 1e3

    def test_start_value_met(self):
        solver = FdeSolver(steps=1000)
        problem = FdeProblem(FdeKind.CONSTANT, 1.0)
        result = solver.shoot_bvp(build_truncated_ode(problem), [1.0])
        x0, f0, _ = result.trajectory[0]
        assert x0 == solver.eps
        assert f0 == pytest.approx(solver.start_value(problem), abs=1e-8)
        assert [x for x, _, _ in result.trajectory] == [solver.eps, 1.0, solver.x_max]

    def test_reproducible(self):
        # converged slope does not depend on where bisection starts
        solver = FdeSolver(steps=1000)
        system = build_truncated_ode(FdeProblem(FdeKind.CONSTANT, 1.0))
        first = solver.shoot_bvp(system, bracket=(-1e3, 1e3)).start_slope
        second = solver.shoot_bvp(system, bracket=(-500.0, 800.0)).start_slope
        assert abs(first - second) <= 1e-8 * abs(first)

    def test_array_stops(self):
        solver = FdeSolver(steps=1000)
        grid = np.geomspace(0.1, 10.0, 15)
        result = solver.shoot_bvp(build_truncated_ode(FdeProblem(FdeKind.CONSTANT, 1.0)), grid)
        xs = [x for x, _, _ in result.trajectory]
        assert xs == sorted(set(grid.tolist()) | {solver.eps, solver.x_max})
        report = solver.solve_and_compare(FdeProblem(FdeKind.CONSTANT, 1.0), grid)
        assert len(report.numeric) == 15
        assert np.all(np.isfinite(report.numeric))
        print("✅ FDE constant - ndarray report grid")

    def test_zero_lambda(self):
        report = FdeSolver().solve_and_compare(FdeProblem(FdeKind.CONSTANT, 0.0), [0.5, 2.0])
        assert list(report.numeric) == [1.0, 1.0]
        assert report.max_abs_error == 0.0

    def test_bracket_failure(self):
        solver = FdeSolver(steps=200)
        system = build_truncated_ode(FdeProblem(FdeKind.CONSTANT, 1.0))
        with pytest.raises(BracketError):
            solver.shoot_bvp(system, bracket=(1.0, 1.0))

    def test_first_order_integer(self):
        report = FdeSolver().solve_and_compare(FdeProblem(FdeKind.CONSTANT, 1.0, 1.0, 2),
                                               [0.5, 1.0, 4.0])
        assert report.max_abs_error < 1e-8

    def test_first_order_two_terms(self):
        report = FdeSolver().solve_and_compare(FdeProblem(FdeKind.CONSTANT, 1.0, 0.5, 2),
                                               np.linspace(0.1, 10.0, 12))
        assert np.all(report.numeric > 0.0)
        assert np.all(report.numeric < 1.0)
        assert np.all(np.diff(report.numeric) < 0.0)

    def test_grid_outside_interval(self):
        with pytest.raises(ConfigurationError):
            FdeSolver().solve_and_compare(FdeProblem(FdeKind.CONSTANT, 1.0), [1.0, 30.0])

    def test_solver_validation(self):
        with pytest.raises(DomainError):
            FdeSolver(eps=1.0, x_max=0.5)
        with pytest.raises(DomainError):
            FdeSolver(steps=0)


class TestVariablePipeline:
    """Reciprocal-variable solve for the variable-coefficient problem."""

    def test_slope_condition(self):
        solver = FdeSolver()
        system = build_truncated_ode(FdeProblem(FdeKind.VARIABLE, 1.0))
        points, amplitude = solver.solve_variable(system, [0.5, 1.0, 4.0])
        by_x = {x: (f, g) for x, f, g in points}
        assert by_x[1.0][1] == pytest.approx(0.5, rel=1e-10)
        assert amplitude < 0.0

    def test_report(self):
        report = FdeSolver().solve_and_compare(FdeProblem(FdeKind.VARIABLE, 0.5),
                                               [1.0, 2.0, 5.0, 10.0])
        assert np.all(np.isfinite(report.numeric))
        assert report.settings["amplitude"] > 0.0
        system = build_truncated_ode(FdeProblem(FdeKind.VARIABLE, 0.5))
        assert report.settings["truncation_residual"] == pytest.approx(
            truncation_residual(system, 2.0), rel=1e-10)
        assert np.all(np.abs(report.rel_error) <= 2.0)

    def test_far_points_rejected(self):
        system = build_truncated_ode(FdeProblem(FdeKind.VARIABLE, 1.0))
        with pytest.raises(ConfigurationError):
            FdeSolver().solve_variable(system, [2_000.0])


def main():
    """Run FDE solver tests."""
    print("🧪 FDE Solver Test Suite")
    print("=========================")

    exit_code = pytest.main([__file__, "-v", "--tb=short", "--no-header"])

    if exit_code == 0:
        print("\n✅ All tests passed!")
    else:
        print("\n❌ Some tests failed!")
    return exit_code


if __name__ == "__main__":
    exit(main())
