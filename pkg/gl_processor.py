"""
Grunwald-Letnikov Processor
Discrete GL summation used as an independent oracle, plus the exact
finite-N weight of f^(k) and the inner-sum identity behind it.
"""

import math
from dataclasses import dataclass

import numpy as np

from frac_config import FracConfig, DomainError, WeightOverflowError
from jet_engine import CatalogFn, jet_eval
from series_expansion import Definition, Order, power_rule, series_weight
from special_functions import binom_general, log_abs_binom_general


@dataclass(frozen=True)
class GridSpec:
    """Evaluation point x split into n_grid steps of h = x / n_grid."""
    x: float
    n_grid: int

    def __post_init__(self):
        if not self.x > 0.0:
            raise DomainError(f"GL grid needs x > 0, got x={self.x}")
        if self.n_grid < 1:
            raise DomainError(f"GL grid needs at least one point, got {self.n_grid}")

    @property
    def h(self) -> float:
        return self.x / self.n_grid

    def nodes(self) -> np.ndarray:
        """x - j h for j = 0 .. n_grid - 1; f(0) itself is never sampled."""
        return self.x - np.arange(self.n_grid) * self.h


def gl_coefficients(q: float, n_grid: int) -> np.ndarray:
    """(-1)^j binom(q, j) for j < n_grid by the ratio (j - 1 - q) / j."""
    if q < 0:
        raise DomainError(f"GL sum needs q >= 0, got q={q}")
    j = np.arange(1, n_grid, dtype=float)
    ratios = (j - 1.0 - q) / j
    return np.concatenate(([1.0], np.cumprod(ratios)))


def gl_sum(f: CatalogFn, q: float, grid: GridSpec) -> float:
    """
    Discrete GL derivative h^-q sum_j (-1)^j binom(q, j) f(x - j h).

    Args:
        f: Catalog function defined on (0, x]
        q: Order, q >= 0
        grid: Evaluation point and number of gridpoints

    Returns:
        Finite-N GL approximation
    """
    coeffs = gl_coefficients(q, grid.n_grid)
    samples = f.values(grid.nodes())
    if not np.all(np.isfinite(samples)):
        raise DomainError(f"{f.label} is not finite on the GL grid")
    return grid.h ** (-q) * math.fsum(coeffs * samples)


def gl_sum_grid(f: CatalogFn, q: float, xs: np.ndarray, n_grid: int) -> np.ndarray:
    """gl_sum at each x, sharing the coefficient vector (pairwise dot, not fsum)."""
    coeffs = gl_coefficients(q, n_grid)
    out = np.empty(len(xs))
    for i, x in enumerate(xs):
        grid = GridSpec(float(x), n_grid)
        out[i] = grid.h ** (-q) * float(np.dot(coeffs, f.values(grid.nodes())))
    return out


def gl_reference_grid(f: CatalogFn, definition: Definition, q: float, xs: np.ndarray,
                      n_grid: int = FracConfig.GL_REFERENCE_GRID) -> np.ndarray:
    """Vectorised gl_reference."""
    xs = np.asarray(xs, dtype=float)
    values = gl_sum_grid(f, q, xs, n_grid)
    if definition is Definition.CAPUTO:
        n = Order(q).ceiling
        base = jet_eval(f, 0.0, n - 1)
        for m in range(n):
            values -= base.coeffs[m] * np.array([power_rule(m, q, float(x)) for x in xs])
    return values


def gl_reference(f: CatalogFn, definition: Definition, q: float, x: float,
                 n_grid: int = FracConfig.GL_REFERENCE_GRID) -> float:
    """GL oracle for any definition with base 0; Caputo drops the RL image of the Taylor part."""
    value = gl_sum(f, q, GridSpec(x, n_grid))
    if definition is Definition.CAPUTO:
        n = Order(q).ceiling
        base = jet_eval(f, 0.0, n - 1)
        for m in range(n):
            value -= base.coeffs[m] * power_rule(m, q, x)
    return value


def inner_sum_terms(q: float, k: int, n_grid: int) -> np.ndarray:
    """Terms (-1)^(j-k) binom(j, k) binom(q, j) for j = k .. N-1."""
    if not 0 <= k <= n_grid - 1:
        raise DomainError(f"inner sum needs 0 <= k <= N-1, got k={k}, N={n_grid}")
    return np.array([
        (-1) ** (j - k) * math.comb(j, k) * binom_general(q, j) for j in range(k, n_grid)
    ])


def inner_sum(q: float, k: int, n_grid: int, mode: str = "direct") -> float:
    """
    Inner sum over j of (-1)^(j-k) binom(j, k) binom(q, j).

    mode="direct" sums the terms; mode="closed" uses
    (-1)^(N-k+1) (N-k)/(q-k) binom(N, k) binom(q, N).
    """
    if not 0 <= k <= n_grid - 1:
        raise DomainError(f"inner sum needs 0 <= k <= N-1, got k={k}, N={n_grid}")
    if mode == "direct":
        return math.fsum(inner_sum_terms(q, k, n_grid))
    if mode == "closed":
        if abs(q - round(q)) < FracConfig.INTEGER_TOLERANCE:
            raise DomainError("closed inner sum requires non-integer q")
        sign = -1.0 if (n_grid - k) % 2 == 0 else 1.0
        return sign * (n_grid - k) / (q - k) * math.comb(n_grid, k) * binom_general(q, n_grid)
    raise DomainError(f"unknown inner-sum mode '{mode}'")


def weight_exact(q: float, k: int, n_grid: int, h: float) -> float:
    """
    Finite-N weight of f^(k)(x), evaluated in log space.

    Raises:
        WeightOverflowError: if the magnitude exceeds the double range
    """
    if abs(q - round(q)) < FracConfig.INTEGER_TOLERANCE:
        raise DomainError("exact weight requires non-integer q")
    if not 0 <= k < n_grid:
        raise DomainError(f"exact weight needs 0 <= k < N, got k={k}, N={n_grid}")
    if not h > 0.0:
        raise DomainError(f"step must be positive, got h={h}")

    binom_sign, log_binom_q = log_abs_binom_general(q, n_grid)
    log_binom_n = math.lgamma(n_grid + 1) - math.lgamma(k + 1) - math.lgamma(n_grid - k + 1)
    log_mag = (
        math.log(n_grid - k)
        + (k - q) * math.log(h)
        - math.log(abs(q - k))
        + log_binom_n
        + log_binom_q
    )
    if log_mag > FracConfig.LOG_FLOAT_MAX:
        raise WeightOverflowError(
            f"weight magnitude exp({log_mag:.1f}) overflows at q={q}, k={k}, N={n_grid}"
        )
    sign = -1.0 if (n_grid - k) % 2 == 0 else 1.0
    sign *= binom_sign * (1.0 if q > k else -1.0)
    return sign * math.exp(log_mag)


def weight_limit(q: float, k: int, x: float) -> float:
    """Large-N limit of weight_exact with h N = x held fixed."""
    return series_weight(q, k, x, 0.0)
