"""
FDE Solver
Reduces the constant- and variable-coefficient linear FDEs to truncated
ODEs, integrates them with fixed-step RK4 and compares against the exact
Mittag-Leffler and Fox-Wright solutions.
"""

import math
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from frac_config import (
    FracConfig, FracLogger, DomainError, ConfigurationError, NumericalError,
    BracketError, SingularCoefficientError
)
from error_metrics import rel_error_array
from series_expansion import Order
from special_functions import binom_general, gamma, mittag_leffler, recip_gamma

Coefficient = Callable[[float], float]
TrajectoryPoint = Tuple[float, float, float]


class FdeKind(Enum):
    CONSTANT = "constant"
    VARIABLE = "variable"


@dataclass(frozen=True)
class FdeProblem:
    """Caputo D^q f + lam f = 0 (constant) or D^q f + lam f / x = 0 (variable)."""
    kind: FdeKind
    lam: float = FracConfig.FDE_LAMBDA
    q: float = FracConfig.FDE_ORDER
    n_terms: int = FracConfig.FDE_TERMS

    def __post_init__(self):
        if self.lam < 0:
            raise DomainError(f"lambda must be nonnegative, got {self.lam}")
        Order(self.q)

    @property
    def f0(self) -> float:
        """f(0): 1 for the decay problem, 0 for the variable-coefficient solution."""
        return 1.0 if self.kind is FdeKind.CONSTANT else 0.0


@dataclass(frozen=True)
class Condition:
    location: float
    kind: str  # "value" | "slope"
    value: float


@dataclass
class OdeSystem:
    """
    c2 f'' + c1 f' + c0 f + s = 0 in the independent variable `variable`.

    `scale` relates residuals to the parent frame: residual here equals
    scale(t) times the parent residual at the matching point.
    """
    order: int
    c2: Coefficient
    c1: Coefficient
    c0: Coefficient
    source: Coefficient
    variable: str = "x"
    conditions: List[Condition] = field(default_factory=list)
    problem: Optional[FdeProblem] = None
    multiplier: Optional[Coefficient] = None
    scale: Optional[Coefficient] = None

    def coefficients(self, t: float) -> Tuple[float, float, float, float]:
        return self.c2(t), self.c1(t), self.c0(t), self.source(t)

    def residual(self, t: float, f: float, f1: float, f2: float) -> float:
        c2, c1, c0, s = self.coefficients(t)
        return c2 * f2 + c1 * f1 + c0 * f + s

    def parent_residual(self, t: float, f: float, f1: float, f2: float) -> float:
        """Residual of the system this one was derived from, at the matching point."""
        r = self.residual(t, f, f1, f2)
        return r if self.scale is None else r / self.scale(t)

    def fde_residual(self, t: float, f: float, f1: float, f2: float) -> float:
        """Residual divided back by the multiplier, in units of the original FDE."""
        r = self.parent_residual(t, f, f1, f2)
        return r if self.multiplier is None else r / self.multiplier(t)

    def leading(self, t: float) -> float:
        return self.c2(t) if self.order == 2 else self.c1(t)


def _truncation_weights(q: float, n_terms: int, integer: bool) -> List[float]:
    gamma_factor = 1.0 if integer else gamma(1.0 - q)
    return [binom_general(q, k) * gamma_factor * recip_gamma(k - q + 1) for k in range(n_terms)]


def _check_supported(p: FdeProblem) -> Order:
    order = Order(p.q)
    if p.n_terms not in (2, 3):
        raise ConfigurationError(
            f"truncated ODE supports n_terms in (2, 3), got {p.n_terms}"
        )
    if order.integer_flag:
        if order.ceiling != 1 or p.kind is FdeKind.VARIABLE:
            raise ConfigurationError("integer orders are supported only as q=1 with constant coefficients")
    elif not p.q < 1.0:
        raise ConfigurationError(
            f"orders above 1 need initial data beyond f(0); got q={p.q}"
        )
    if p.kind is FdeKind.VARIABLE and p.n_terms != 3:
        raise ConfigurationError("the variable-coefficient reduction needs n_terms=3")
    return order


def build_truncated_ode(p: FdeProblem) -> OdeSystem:
    """
    Truncate the Caputo series after n_terms and clear the x^-q factor.

    The constant case is multiplied by Gamma(1-q) x^q and the variable case by
    Gamma(1-q) x^(q+1); for q = 1/2, n_terms = 3 this gives
    -x^2/6 f'' + x f' + (1 + lam sqrt(pi x)) f - f(0) = 0 and
    -x^3/6 f'' + x^2 f' + (x + lam sqrt(pi x)) f - f(0) x = 0.
    """
    order = _check_supported(p)
    integer = order.integer_flag
    q = p.q
    b = _truncation_weights(q, p.n_terms, integer) + [0.0] * (3 - p.n_terms)
    shift = (1 if p.kind is FdeKind.VARIABLE else 0) - (round(q) if integer else 0)
    gamma_factor = 1.0 if integer else gamma(1.0 - q)
    lam, f0 = p.lam, p.f0

    def term(k: int) -> Coefficient:
        bk = b[k]
        if bk == 0.0:
            return lambda x: 0.0
        return lambda x: bk * x ** (k + shift)

    c2, c1, base_c0 = term(2), term(1), term(0)

    def c0(x: float) -> float:
        return base_c0(x) + lam * gamma_factor * (1.0 if integer else x ** q)

    def source(x: float) -> float:
        return -f0 * base_c0(x)

    def multiplier(x: float) -> float:
        m = 1.0 if integer else gamma_factor * x ** q
        return m * x if p.kind is FdeKind.VARIABLE else m

    if p.kind is FdeKind.CONSTANT:
        conditions = [Condition(0.0, "value", f0), Condition(math.inf, "value", 0.0)]
    else:
        conditions = [Condition(math.inf, "value", 0.0),
                      Condition(1.0, "slope", lam * lam - 0.5)]

    system_order = 2 if b[2] != 0.0 else 1
    return OdeSystem(system_order, c2, c1, c0, source, "x", conditions, p, multiplier)


def substitute_reciprocal(system: OdeSystem) -> OdeSystem:
    """
    Change variables x = 1/y and normalise the leading coefficient to y^2.

    For the variable-coefficient defaults this is
    y^2 f'' + 8 y f' - 6 (1 + lam sqrt(pi y)) f = 0.
    """
    if system.problem is None or system.problem.kind is not FdeKind.VARIABLE or system.order != 2:
        raise ConfigurationError("reciprocal substitution applies to the second-order variable-coefficient system")

    def inv_c2(y: float) -> float:
        return y * y * system.c2(1.0 / y)

    def c1(y: float) -> float:
        x = 1.0 / y
        return 2.0 * y - system.c1(x) / system.c2(x)

    def c0(y: float) -> float:
        return system.c0(1.0 / y) / inv_c2(y)

    def source(y: float) -> float:
        return system.source(1.0 / y) / inv_c2(y)

    def scale(y: float) -> float:
        return 1.0 / inv_c2(y)

    def multiplier(y: float) -> float:
        return system.multiplier(1.0 / y)

    lam = system.problem.lam
    conditions = [Condition(0.0, "value", 0.0), Condition(1.0, "slope", -(lam * lam - 0.5))]
    return OdeSystem(2, lambda y: y * y, c1, c0, source, "y", conditions,
                     system.problem, multiplier, scale)


def to_log_frame(system: OdeSystem) -> OdeSystem:
    """Rewrite in s = ln t so that t^k f^(k) terms become constant-coefficient near 0."""

    def c2(s: float) -> float:
        return system.c2(math.exp(s)) * math.exp(-2.0 * s)

    def c1(s: float) -> float:
        t = math.exp(s)
        return system.c1(t) / t - system.c2(t) / (t * t)

    def c0(s: float) -> float:
        return system.c0(math.exp(s))

    def source(s: float) -> float:
        return system.source(math.exp(s))

    return OdeSystem(system.order, c2, c1, c0, source, f"ln {system.variable}",
                     list(system.conditions), system.problem, None, None)


def _rhs(system: OdeSystem, t: float, f: float, g: float) -> Tuple[float, float]:
    """(f', f'') for order 2; (f', unused) for order 1."""
    lead = system.leading(t)
    if abs(lead) < FracConfig.SINGULAR_COEFFICIENT_TOL:
        raise SingularCoefficientError(
            f"leading coefficient vanishes at {system.variable}={t}"
        )
    c2, c1, c0, s = system.coefficients(t)
    if system.order == 2:
        return g, -(c1 * g + c0 * f + s) / c2
    return -(c0 * f + s) / c1, 0.0


def rk4_integrate(system: OdeSystem, start: float, end: float, steps: int,
                  initial: Tuple[float, float]) -> List[TrajectoryPoint]:
    """
    Classical fixed-step RK4 for the truncated ODE.

    Args:
        system: First- or second-order linear system
        start: Initial value of the independent variable
        end: Final value; may be below start for backward integration
        steps: Number of equal steps
        initial: (f, f') at start; f' is recomputed for first-order systems

    Returns:
        List of (t, f, f') at every node, start included
    """
    if steps < 1:
        raise DomainError(f"steps must be positive, got {steps}")
    h = (end - start) / steps
    f, g = initial
    if system.order == 1:
        g = _rhs(system, start, f, 0.0)[0]
    trajectory = [(start, f, g)]

    for i in range(steps):
        t = start + i * h
        if system.order == 2:
            k1f, k1g = _rhs(system, t, f, g)
            k2f, k2g = _rhs(system, t + 0.5 * h, f + 0.5 * h * k1f, g + 0.5 * h * k1g)
            k3f, k3g = _rhs(system, t + 0.5 * h, f + 0.5 * h * k2f, g + 0.5 * h * k2g)
            k4f, k4g = _rhs(system, t + h, f + h * k3f, g + h * k3g)
            f += h * (k1f + 2.0 * k2f + 2.0 * k3f + k4f) / 6.0
            g += h * (k1g + 2.0 * k2g + 2.0 * k3g + k4g) / 6.0
        else:
            k1 = _rhs(system, t, f, 0.0)[0]
            k2 = _rhs(system, t + 0.5 * h, f + 0.5 * h * k1, 0.0)[0]
            k3 = _rhs(system, t + 0.5 * h, f + 0.5 * h * k2, 0.0)[0]
            k4 = _rhs(system, t + h, f + h * k3, 0.0)[0]
            f += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        t_next = start + (i + 1) * h
        if system.order == 1:
            g = _rhs(system, t_next, f, 0.0)[0]
        trajectory.append((t_next, f, g))
    return trajectory


def integrate_through(system: OdeSystem, stops: Sequence[float], steps: int,
                      initial: Tuple[float, float]) -> List[TrajectoryPoint]:
    """
    RK4 across consecutive stops with a common nominal step.

    The total step count is spread over the span of `stops`; each segment
    gets at least one step. Returns the state at every stop, in stop order.
    """
    span = abs(stops[-1] - stops[0])
    h_nominal = span / steps if span > 0 else 1.0
    state = initial
    out = [(stops[0], state[0], state[1])]
    for a, b in zip(stops[:-1], stops[1:]):
        if a == b:
            out.append((b, state[0], state[1]))
            continue
        n = max(1, int(math.ceil(abs(b - a) / h_nominal - 1e-9)))
        _, f, g = rk4_integrate(system, a, b, n, state)[-1]
        state = (f, g)
        out.append((b, f, g))
    return out


def exact_constant(lam: float, q: float, x: float) -> float:
    """E_q(-lam x^q), the solution of D^q f = -lam f with f(0) = 1."""
    if x < 0:
        raise DomainError(f"exact constant-coefficient solution needs x >= 0, got {x}")
    if x == 0.0:
        return 1.0
    return mittag_leffler(q, 1.0, -lam * x ** q)


def exact_constant_derivatives(lam: float, x: float) -> Tuple[float, float, float]:
    """(f, f', f'') for q = 1/2, where f = exp(lam^2 x) erfc(lam sqrt(x))."""
    if not x > 0:
        raise DomainError(f"derivatives need x > 0, got {x}")
    f = exact_constant(lam, 0.5, x)
    f1 = lam * lam * f - lam / math.sqrt(math.pi * x)
    f2 = lam * lam * f1 + lam * x ** -1.5 / (2.0 * math.sqrt(math.pi))
    return f, f1, f2


def exact_variable(lam: float, x: float) -> float:
    """exp(lam^2 - lam^2/x) / sqrt(x), normalised by f(1) = 1."""
    if not x > 0:
        raise DomainError(f"exact variable-coefficient solution needs x > 0, got {x}")
    return math.exp(lam * lam - lam * lam / x) / math.sqrt(x)


def exact_variable_derivatives(lam: float, x: float) -> Tuple[float, float, float]:
    f = exact_variable(lam, x)
    l2 = lam * lam
    log_d1 = l2 / (x * x) - 0.5 / x
    log_d2 = -2.0 * l2 / x ** 3 + 0.5 / (x * x)
    return f, f * log_d1, f * (log_d1 * log_d1 + log_d2)


def truncation_residual(system: OdeSystem, x: float) -> float:
    """
    Residual of the exact solution in the truncated ODE, in FDE units.

    Reciprocal systems are evaluated at y = 1/x and mapped back to the x frame.
    """
    if system.problem is None:
        raise ConfigurationError("truncation residual needs the originating problem")
    p = system.problem
    if p.kind is FdeKind.CONSTANT:
        if abs(p.q - 0.5) > FracConfig.INTEGER_TOLERANCE:
            raise ConfigurationError("closed-form derivatives are available for q=1/2 only")
        f, f1, f2 = exact_constant_derivatives(p.lam, x)
    else:
        f, f1, f2 = exact_variable_derivatives(p.lam, x)
    if system.variable == "y":
        return system.fde_residual(1.0 / x, *reciprocal_jet(x, f, f1, f2))
    return system.fde_residual(x, f, f1, f2)


def reciprocal_jet(x: float, f: float, f1: float, f2: float) -> Tuple[float, float, float]:
    """Value and y-derivatives of F(y) = f(1/y) at y = 1/x from the x-derivatives of f."""
    return f, -x * x * f1, x ** 4 * f2 + 2.0 * x ** 3 * f1


def frobenius_exponent(p: FdeProblem) -> float:
    """Regular exponent r of y^r at y = 0 for the reciprocal variable-coefficient system."""
    b = _truncation_weights(p.q, 3, False)
    a1 = 2.0 - b[1] / b[2]
    a0 = b[0] / b[2]
    disc = (a1 - 1.0) ** 2 - 4.0 * a0
    if disc < 0:
        raise NumericalError("indicial equation has complex exponents")
    return 0.5 * (-(a1 - 1.0) + math.sqrt(disc))


@dataclass
class ShootingResult:
    trajectory: List[TrajectoryPoint]
    start_slope: float
    far_value: float
    iterations: int


@dataclass
class SolveReport:
    """Numeric and exact solutions on a common grid."""
    grid: np.ndarray
    numeric: np.ndarray
    exact: np.ndarray
    rel_error: np.ndarray
    problem: FdeProblem
    settings: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not len(self.grid) == len(self.numeric) == len(self.exact) == len(self.rel_error):
            raise NumericalError("report columns have different lengths")

    @property
    def max_abs_error(self) -> float:
        return float(np.max(np.abs(self.rel_error)))


class FdeSolver:
    """
    Runs the truncated-ODE pipelines for both FDE kinds.
    """

    def __init__(self, eps: float = FracConfig.FDE_EPS, x_max: float = FracConfig.FDE_XMAX,
                 steps: int = FracConfig.FDE_STEPS):
        self.logger = FracLogger("fde_solver")
        if not 0 < eps < x_max:
            raise DomainError(f"need 0 < eps < x_max, got eps={eps}, x_max={x_max}")
        if steps < 1:
            raise DomainError(f"steps must be positive, got {steps}")
        self.eps = eps
        self.x_max = x_max
        self.steps = steps

    def start_value(self, p: FdeProblem) -> float:
        """f(eps) from the leading Caputo term: 1 - lam eps^q / Gamma(1+q)."""
        return p.f0 - p.lam * self.eps ** p.q * recip_gamma(1.0 + p.q)

    def shoot_bvp(self, system: OdeSystem, stops: Optional[Sequence[float]] = None,
                  bracket: Tuple[float, float] = FracConfig.FDE_TAIL_BRACKET) -> ShootingResult:
        """
        Solve the decay problem f(0) = f0, f(inf) = 0 for a second-order system.

        Integration runs backward from x_max in ln x, where the mode that grows
        toward infinity decays. The far value c = f(x_max) is bisected until
        the trajectory reaches the series start value at eps.

        Args:
            system: Constant-coefficient truncated system in x
            stops: Extra points inside [eps, x_max] to report
            bracket: Interval searched for c

        Returns:
            Trajectory (x, f, f') ascending in x, the slope f'(eps) and c
        """
        p = system.problem
        if p is None or p.kind is not FdeKind.CONSTANT:
            raise ConfigurationError("shooting applies to the constant-coefficient problem")
        xs = self._stops(stops)

        if p.lam == 0.0:
            return ShootingResult([(x, p.f0, 0.0) for x in xs], 0.0, p.f0, 0)

        log_system = to_log_frame(system)
        s_stops = [math.log(x) for x in reversed(xs)]
        target = self.start_value(p)

        def run(c: float) -> List[TrajectoryPoint]:
            # tail f ~ c (x / x_max)^-q
            return integrate_through(log_system, s_stops, self.steps, (c, -p.q * c))

        def mismatch(c: float) -> float:
            return run(c)[-1][1] - target

        lo, hi = bracket
        f_lo, f_hi = mismatch(lo), mismatch(hi)
        if f_lo * f_hi > 0:
            self.logger.error("Shooting bracket holds no sign change", {
                "bracket": [lo, hi], "mismatch": [f_lo, f_hi], "lambda": p.lam
            })
            raise BracketError(f"no sign change of f(eps) - target over far values {bracket}")

        iterations = 0
        for iterations in range(1, FracConfig.FDE_BISECTION_MAX_ITER + 1):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            f_mid = mismatch(mid)
            if f_mid == 0.0:
                lo = hi = mid
                break
            if (f_mid < 0) == (f_lo < 0):
                lo, f_lo = mid, f_mid
            else:
                hi = mid
        c = 0.5 * (lo + hi)

        trajectory = [(x, f, g / x) for x, (_, f, g) in zip(xs, reversed(run(c)))]
        self.logger.debug("Shooting converged", {
            "far_value": c, "iterations": iterations, "start_slope": trajectory[0][2]
        })
        return ShootingResult(trajectory, trajectory[0][2], c, iterations)

    def solve_first_order(self, system: OdeSystem,
                          stops: Optional[Sequence[float]] = None) -> List[TrajectoryPoint]:
        """Initial-value solve when the truncation leaves a first-order equation."""
        p = system.problem
        xs = self._stops(stops)
        if Order(p.q).integer_flag:
            states = integrate_through(system, [0.0] + xs, self.steps, (p.f0, 0.0))
            return [(x, f, g) for x, (_, f, g) in zip(xs, states[1:])]
        log_system = to_log_frame(system)
        states = integrate_through(log_system, [math.log(x) for x in xs], self.steps,
                                   (self.start_value(p), 0.0))
        return [(x, f, g / x) for x, (_, f, g) in zip(xs, states)]

    def solve_variable(self, system: OdeSystem,
                       stops: Sequence[float]) -> Tuple[List[TrajectoryPoint], float]:
        """
        Integrate the reciprocal system from y near 0 and scale to the slope condition.

        Returns:
            (x, f, f') at each requested x, and the amplitude of the regular mode
        """
        p = system.problem
        reciprocal = substitute_reciprocal(system)
        log_system = to_log_frame(reciprocal)
        y_start = FracConfig.FDE_Y_START
        r = frobenius_exponent(p)

        ys = sorted({1.0 / x for x in stops} | {1.0})
        if ys[0] <= y_start:
            raise ConfigurationError(f"report points must satisfy x < {1.0 / y_start}")
        s_stops = [math.log(y_start)] + [math.log(y) for y in ys]
        leading = y_start ** r
        states = integrate_through(log_system, s_stops, self.steps, (leading, r * leading))

        by_y = {y: (f, g) for y, (_, f, g) in zip(ys, states[1:])}
        # f_s = y f_y, so at y = 1 they coincide
        slope_y_at_one = by_y[1.0][1]
        if slope_y_at_one == 0.0:
            raise NumericalError("regular mode has zero slope at y=1")
        target = next(c.value for c in reciprocal.conditions if c.kind == "slope")
        amplitude = target / slope_y_at_one

        out = []
        for x in stops:
            y = 1.0 / x
            f, f_s = by_y[y]
            # f_x = -y^2 f_y = -y f_s
            out.append((x, amplitude * f, -amplitude * y * f_s))
        self.logger.debug("Variable-coefficient solve finished", {
            "frobenius_exponent": r, "amplitude": amplitude
        })
        return out, amplitude

    def solve_and_compare(self, p: FdeProblem, grid: Sequence[float]) -> SolveReport:
        """
        Run the pipeline for p and compare to the exact solution on grid.

        Args:
            p: FDE problem
            grid: Report points in x

        Returns:
            SolveReport with symmetric relative errors
        """
        start_time = datetime.now()
        grid = np.asarray(sorted(float(x) for x in grid))
        self.logger.info("Starting FDE solve", {
            "kind": p.kind.value, "lambda": p.lam, "q": p.q, "n_terms": p.n_terms,
            "points": len(grid), "eps": self.eps, "x_max": self.x_max, "steps": self.steps
        })

        try:
            system = build_truncated_ode(p)
            settings = {"eps": self.eps, "x_max": self.x_max, "steps": self.steps}
            if p.kind is FdeKind.CONSTANT:
                if system.order == 2:
                    result = self.shoot_bvp(system, grid)
                    trajectory = result.trajectory
                    settings["far_value"] = result.far_value
                    settings["start_slope"] = result.start_slope
                else:
                    trajectory = self.solve_first_order(system, grid)
                by_x = {x: f for x, f, _ in trajectory}
                numeric = np.array([by_x[x] for x in grid])
                exact = np.array([exact_constant(p.lam, p.q, x) for x in grid])
            else:
                points, amplitude = self.solve_variable(system, grid)
                settings["amplitude"] = amplitude
                settings["truncation_residual"] = truncation_residual(
                    substitute_reciprocal(system), FracConfig.FDE_RESIDUAL_X
                )
                numeric = np.array([f for _, f, _ in points])
                exact = np.array([exact_variable(p.lam, x) for x in grid])

            report = SolveReport(grid, numeric, exact, rel_error_array(exact, numeric), p, settings)
            self.logger.info("FDE solve complete", {
                "kind": p.kind.value,
                "max_rel_error": report.max_abs_error,
                "processing_time": (datetime.now() - start_time).total_seconds()
            })
            return report

        except Exception as e:
            self.logger.error(f"FDE solve failed: {str(e)}")
            raise

    def _stops(self, stops: Optional[Sequence[float]]) -> List[float]:
        requested = [] if stops is None else [float(x) for x in stops]
        xs = sorted(set(requested) | {self.eps, self.x_max})
        if xs[0] < self.eps or xs[-1] > self.x_max:
            raise ConfigurationError(
                f"report points must lie in [eps, x_max] = [{self.eps}, {self.x_max}]"
            )
        return xs
