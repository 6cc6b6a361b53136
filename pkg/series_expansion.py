"""
Series Expansion
Integer-derivative series for the Grunwald-Letnikov, Riemann-Liouville and
Caputo fractional derivatives, the integer-order collapse, and the Gaussian
Hermite closed form.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Tuple

import numpy as np

from frac_config import FracConfig, DomainError, ConfigurationError, WeightOverflowError
from jet_engine import CatalogFn, Jet, jet_eval
from special_functions import binom_general, gamma, hermite, recip_gamma, sinpi


class Definition(Enum):
    GL = "gl"
    RL = "rl"
    CAPUTO = "caputo"

    @classmethod
    def parse(cls, text: str) -> "Definition":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ConfigurationError(f"unknown definition '{text}'; use gl, rl or caputo")


@dataclass(frozen=True)
class Order:
    """Real fractional order q > 0."""
    q: float

    def __post_init__(self):
        if not self.q > 0:
            raise DomainError(f"fractional order must be positive, got q={self.q}")

    @property
    def integer_flag(self) -> bool:
        return abs(self.q - round(self.q)) < FracConfig.INTEGER_TOLERANCE

    @property
    def ceiling(self) -> int:
        """n = ceil(q); equals q itself for integer orders."""
        if self.integer_flag:
            return int(round(self.q))
        return int(math.floor(self.q)) + 1


@dataclass(frozen=True)
class ExpansionConfig:
    definition: Definition
    order: Order
    truncation: int
    base: float = 0.0

    def __post_init__(self):
        if self.definition is Definition.GL and self.base != 0.0:
            raise ConfigurationError("the GL series has zero base point")
        if not 1 <= self.truncation <= FracConfig.MAX_SERIES_TERMS:
            raise ConfigurationError(
                f"truncation must lie in [1, {FracConfig.MAX_SERIES_TERMS}], got {self.truncation}"
            )


@dataclass
class SeriesTerm:
    k: int
    weight: float
    derivative_value: float
    contribution: float


@dataclass
class ExpansionResult:
    value: float
    terms: List[SeriesTerm] = field(default_factory=list)


def series_weight(q: float, k: int, x: float, a: float = 0.0) -> float:
    """
    Weight of f^(k)(x): binom(q, k) (x - a)^(k - q) / Gamma(k - q + 1).

    For integer q this is 1 at k = q and exactly 0 elsewhere.
    """
    if not x > a:
        raise DomainError(f"series weight needs x > a, got x={x}, a={a}")
    try:
        power = (x - a) ** (k - q)
    except OverflowError:
        raise WeightOverflowError(f"(x - a)^(k - q) overflows at x={x}, k={k}, q={q}")
    return binom_general(q, k) * power * recip_gamma(k - q + 1)


def sinc_gamma_weight(q: float, k: int, x: float, a: float = 0.0) -> float:
    """Same weight written as sin[pi(q-k)] Gamma(q+1) (x-a)^(k-q) / (pi (q-k) k!)."""
    if not x > a:
        raise DomainError(f"series weight needs x > a, got x={x}, a={a}")
    d = q - k
    sinc = 1.0 if d == 0.0 else sinpi(d) / (math.pi * d)
    return sinc * gamma(q + 1) * (x - a) ** (k - q) / math.factorial(k)


def caputo_subtraction_terms(base_jet: Jet, x: float, n: int, k: int) -> float:
    """k-th derivative at x of the degree n-1 Taylor polynomial at the base point."""
    a = base_jet.point
    total = 0.0
    for m in range(k, n):
        total += base_jet.derivative(m) * (x - a) ** (m - k) / math.factorial(m - k)
    return total


def _weights(q: float, x: float, a: float, count: int) -> np.ndarray:
    return np.array([series_weight(q, k, x, a) for k in range(count)])


def _accumulate(weights: np.ndarray, derivs: np.ndarray) -> ExpansionResult:
    terms = []
    total = 0.0
    # ascending k, fixed order
    for k, (w, d) in enumerate(zip(weights, derivs)):
        contribution = float(w * d) if w != 0.0 else 0.0
        terms.append(SeriesTerm(k, float(w), float(d), contribution))
        total += contribution
    return ExpansionResult(total, terms)


def frac_derivative(f: CatalogFn, x: float, cfg: ExpansionConfig) -> ExpansionResult:
    """
    Truncated integer-derivative series of a fractional derivative.

    Args:
        f: Catalog function
        x: Evaluation point, x > base
        cfg: Definition, order, truncation and base point

    Returns:
        Partial sum over k = 0 .. truncation - 1 with the per-term trace
    """
    a = cfg.base
    if not x > a:
        raise DomainError(f"evaluation point must exceed the base point, got x={x}, a={a}")
    q = cfg.order.q
    count = cfg.truncation
    weights = _weights(q, x, a, count)
    derivs = jet_eval(f, x, count - 1).derivatives()

    if cfg.definition is Definition.CAPUTO:
        n = cfg.order.ceiling
        base_jet = jet_eval(f, a, max(n - 1, 0))
        derivs = np.array([
            derivs[k] - caputo_subtraction_terms(base_jet, x, n, k) for k in range(count)
        ])

    return _accumulate(weights, derivs)


def caputo_from_rl(f: CatalogFn, x: float, q: Order, a: float, n_terms: int) -> float:
    """Caputo derivative as the RL series of f minus its Taylor polynomial at a."""
    cfg = ExpansionConfig(Definition.RL, q, n_terms, a)
    if not x > a:
        raise DomainError(f"evaluation point must exceed the base point, got x={x}, a={a}")
    n = q.ceiling
    jet_x = jet_eval(f, x, n_terms - 1)
    taylor = jet_eval(f, a, max(n - 1, 0)).shift_to(x, n_terms - 1)
    remainder = jet_x - taylor
    return _accumulate(_weights(q.q, x, a, cfg.truncation), remainder.derivatives()).value


def gaussian_hermite_series(x: float, q: Order, n_terms: int) -> float:
    """GL series of exp(-x^2) using d^k/dx^k exp(-x^2) = H_k(-x) exp(-x^2)."""
    if not x > 0.0:
        raise DomainError(f"Hermite form needs x > 0, got x={x}")
    total = 0.0
    for k in range(n_terms):
        w = series_weight(q.q, k, x, 0.0)
        if w != 0.0:
            total += w * hermite(k, -x)
    return math.exp(-x * x) * total


def taylor_power_series_derivative(f: CatalogFn, x: float, cfg: ExpansionConfig) -> float:
    """
    Fractional derivative from the Maclaurin series of f and the power rule.

    Converges only inside the Taylor radius about 0 (pi/2 for sech and tanh).
    """
    if cfg.base != 0.0:
        raise ConfigurationError("the power-series path expands about 0")
    if not x > 0.0:
        raise DomainError(f"power-series path needs x > 0, got x={x}")
    q = cfg.order.q
    skip = cfg.order.ceiling if cfg.definition is Definition.CAPUTO else 0
    coeffs = jet_eval(f, 0.0, cfg.truncation - 1).coeffs
    total = 0.0
    for m, c in enumerate(coeffs):
        if m < skip or c == 0.0:
            continue
        total += c * math.factorial(m) * recip_gamma(m - q + 1) * x ** (m - q)
    return total


def power_rule(p: float, q: float, x: float) -> float:
    """Gamma(p+1)/Gamma(p-q+1) x^(p-q), the closed form used to check monomials."""
    return gamma(p + 1) * recip_gamma(p - q + 1) * x ** (p - q)


def series_values(f: CatalogFn, xs: np.ndarray, definition: Definition, q: float,
                  n_terms: int, base: float = 0.0) -> np.ndarray:
    """frac_derivative over a grid."""
    cfg = ExpansionConfig(definition, Order(q), n_terms, base)
    return np.array([frac_derivative(f, float(x), cfg).value for x in xs])


def truncation_pair(f: CatalogFn, x: float, definition: Definition, q: float,
                    n_terms: int, reference_terms: int) -> Tuple[float, float]:
    """(reference partial sum, truncated partial sum) from one jet evaluation."""
    cfg = ExpansionConfig(definition, Order(q), reference_terms, 0.0)
    result = frac_derivative(f, x, cfg)
    truncated = sum(t.contribution for t in result.terms[:n_terms])
    return result.value, truncated
