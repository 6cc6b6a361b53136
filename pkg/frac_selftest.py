"""
FracSeries Self-Test
Quick invariant checks run by the `selftest` CLI verb.
"""

import math
import time
from typing import Callable, List, Tuple

import numpy as np
import pandas as pd

from frac_config import FracLogger
from fde_solver import (
    FdeKind, FdeProblem, OdeSystem, build_truncated_ode, reciprocal_jet, rk4_integrate,
    substitute_reciprocal
)
from gl_processor import inner_sum, inner_sum_terms, weight_exact, weight_limit
from jet_engine import CatalogFn, derivative
from series_expansion import (
    Definition, ExpansionConfig, Order, caputo_from_rl, frac_derivative
)
from special_functions import fox_wright, mittag_leffler

CheckResult = Tuple[bool, str]

CATALOG = [
    CatalogFn("sech"), CatalogFn("tanh"), CatalogFn("sin"), CatalogFn("cos"),
    CatalogFn("gaussian"), CatalogFn("exp"), CatalogFn("power", 2.0), CatalogFn("constant", 3.0),
]


def close(a: float, b: float, rtol: float, scale: float = 0.0) -> bool:
    """|a - b| <= rtol * max(|a|, |b|, scale)."""
    return abs(a - b) <= rtol * max(abs(a), abs(b), scale)


class SelfTestRunner:
    """Runs the invariant suite and tabulates pass/fail."""

    def __init__(self, seed: int = 0):
        self.logger = FracLogger("selftest")
        self.rng = np.random.default_rng(seed)
        self.seed = seed

    def checks(self) -> List[Tuple[str, Callable[[], CheckResult]]]:
        return [
            ("definition_unification", self.check_definition_unification),
            ("integer_collapse", self.check_integer_collapse),
            ("inner_sum_identity", self.check_inner_sum_identity),
            ("weight_limit", self.check_weight_limit),
            ("fox_wright_gaussian", self.check_fox_wright_gaussian),
            ("mittag_leffler_exp", self.check_mittag_leffler_exp),
            ("equation_reconstruction", self.check_equation_reconstruction),
            ("rk4_order", self.check_rk4_order),
        ]

    def run(self) -> pd.DataFrame:
        rows = []
        for name, check in self.checks():
            start = time.perf_counter()
            try:
                passed, detail = check()
            except Exception as e:
                passed, detail = False, f"{type(e).__name__}: {e}"
            elapsed = time.perf_counter() - start
            rows.append({"check": name, "passed": int(passed), "detail": detail,
                         "seconds": round(elapsed, 3)})
            log = self.logger.info if passed else self.logger.error
            log(f"Self-test {name}", {"passed": passed, "detail": detail, "seed": self.seed})
        return pd.DataFrame(rows)

    def check_definition_unification(self) -> CheckResult:
        worst_gl = worst_bridge = 0.0
        for _ in range(20):
            x = float(self.rng.uniform(0.05, 5.0))
            q = float(self.rng.uniform(0.05, 1.95))
            if abs(q - 1.0) < 1e-3:
                q += 0.01
            for f in CATALOG:
                gl = frac_derivative(f, x, ExpansionConfig(Definition.GL, Order(q), 12))
                rl = frac_derivative(f, x, ExpansionConfig(Definition.RL, Order(q), 12))
                for a, b in zip(gl.terms, rl.terms):
                    if not close(a.contribution, b.contribution, 1e-13):
                        return False, f"GL/RL term {a.k} differs for {f.label} at x={x}, q={q}"
                caputo = frac_derivative(f, x, ExpansionConfig(Definition.CAPUTO, Order(q), 12))
                bridge = caputo_from_rl(f, x, Order(q), 0.0, 12)
                scale = sum(abs(t.contribution) for t in caputo.terms)
                if not close(caputo.value, bridge, 1e-10, scale):
                    return False, f"Caputo bridge differs for {f.label} at x={x}, q={q}"
                worst_bridge = max(worst_bridge, abs(caputo.value - bridge))
                worst_gl = max(worst_gl, abs(gl.value - rl.value))
        return True, f"max |GL-RL|={worst_gl:.3g}, max |Caputo-bridge|={worst_bridge:.3g}"

    def check_integer_collapse(self) -> CheckResult:
        for q in (1, 2, 3):
            for f in CATALOG:
                for definition in Definition:
                    x = 1.3
                    value = frac_derivative(f, x, ExpansionConfig(definition, Order(q), q + 4)).value
                    expected = derivative(f, x, q)
                    if not close(value, expected, 1e-12, 1e-300):
                        return False, f"{definition.value} q={q} on {f.label}: {value} != {expected}"
        return True, "q in (1, 2, 3) on all catalog functions"

    def check_inner_sum_identity(self) -> CheckResult:
        worst = 0.0
        for _ in range(200):
            q = float(self.rng.uniform(0.0, 4.0))
            if abs(q - round(q)) < 1e-3:
                q += 0.01
            n = int(self.rng.integers(1, 26))
            k = int(self.rng.integers(0, n))
            direct = inner_sum(q, k, n, "direct")
            closed = inner_sum(q, k, n, "closed")
            # early terms cancel for large q, so measure against the largest term
            scale = float(np.max(np.abs(inner_sum_terms(q, k, n))))
            if not close(direct, closed, 1e-10, scale):
                return False, f"q={q}, k={k}, N={n}: {direct} != {closed}"
            worst = max(worst, abs(direct - closed) / scale)
        return True, f"max gap relative to largest term {worst:.3g}"

    def check_weight_limit(self) -> CheckResult:
        for n in (1_000, 10_000):
            for q, k in ((0.5, 0), (0.5, 1), (1.5, 1)):
                exact = weight_exact(q, k, n, 1.0 / n)
                limit = weight_limit(q, k, 1.0)
                gap = abs(exact - limit) / abs(limit)
                if not gap < 10.0 / n:
                    return False, f"N={n}, q={q}, k={k}: gap {gap:.3g}"
        return True, "gap below 10/N"

    def check_fox_wright_gaussian(self) -> CheckResult:
        worst = 0.0
        for z in np.linspace(-3.0, 3.0, 61):
            value = fox_wright([], [(0.5, -0.5)], float(z))
            worst = max(worst, abs(value - math.exp(-z * z / 4.0) / math.sqrt(math.pi)))
        return worst < 1e-10, f"max abs error {worst:.3g}"

    def check_mittag_leffler_exp(self) -> CheckResult:
        worst = 0.0
        for z in np.linspace(-5.0, 5.0, 101):
            worst = max(worst, abs(mittag_leffler(1.0, 1.0, float(z)) / math.exp(z) - 1.0))
        return worst < 1e-12, f"max rel error {worst:.3g}"

    def check_equation_reconstruction(self) -> CheckResult:
        lam = 1.0
        const = build_truncated_ode(FdeProblem(FdeKind.CONSTANT, lam))
        var = build_truncated_ode(FdeProblem(FdeKind.VARIABLE, lam))
        recip = substitute_reciprocal(var)
        for x in self.rng.uniform(0.01, 10.0, 50):
            x = float(x)
            root = math.sqrt(math.pi * x)
            pairs = [
                (const.c2(x), -x * x / 6.0), (const.c1(x), x), (const.c0(x), 1.0 + lam * root),
                (const.source(x), -1.0),
                (var.c2(x), -x ** 3 / 6.0), (var.c1(x), x * x), (var.c0(x), x + lam * root),
                (recip.c2(x), x * x), (recip.c1(x), 8.0 * x), (recip.c0(x), -6.0 * (1.0 + lam * root)),
            ]
            for got, want in pairs:
                if not close(got, want, 1e-12):
                    return False, f"coefficient {got} != {want} at {x}"
            f, f1, f2 = math.exp(-x), -math.exp(-x), math.exp(-x)
            size = sum(abs(c * d) for c, d in zip(var.coefficients(x), (f2, f1, f, 1.0)))
            mapped = recip.parent_residual(1.0 / x, *reciprocal_jet(x, f, f1, f2))
            if not close(mapped, var.residual(x, f, f1, f2), 1e-12, size):
                return False, f"reciprocal residual {mapped} disagrees at {x}"
        return True, "constant, variable and reciprocal systems match"

    def check_rk4_order(self) -> CheckResult:
        system = OdeSystem(2, lambda x: 1.0, lambda x: 0.0, lambda x: 1.0, lambda x: 0.0)
        errors = []
        for steps in (10, 20):
            f_end = rk4_integrate(system, 0.0, math.pi, steps, (0.0, 1.0))[-1][1]
            errors.append(abs(f_end))
        ratio = errors[0] / errors[1]
        return 8.0 < ratio < 32.0, f"error ratio on halving {ratio:.2f}"
