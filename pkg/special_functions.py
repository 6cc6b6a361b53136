"""
Special Functions
Gamma, reciprocal gamma, generalized binomials, Mittag-Leffler and
Fox-Wright series, and Hermite polynomials for the series weights and
exact FDE solutions.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Tuple

from frac_config import (
    FracConfig, FracLogger, DomainError, GammaOverflowError, PoleError,
    SeriesConvergenceError
)

# Lanczos coefficients, g = 7, n = 9
LANCZOS_G = 7
LANCZOS_COEFFS = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
]
SQRT_TWO_PI = math.sqrt(2.0 * math.pi)


@lru_cache(maxsize=1)
def _logger() -> FracLogger:
    return FracLogger("special_functions")


@dataclass(frozen=True)
class MLParams:
    """Parameters of the two-parameter Mittag-Leffler function."""
    alpha: float
    beta: float
    z: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"Mittag-Leffler requires alpha > 0, got {self.alpha}")

    def evaluate(self) -> float:
        return mittag_leffler(self.alpha, self.beta, self.z)


@dataclass(frozen=True)
class FoxWrightParams:
    """Upper (a, A) and lower (b, B) parameter pairs plus argument."""
    upper: List[Tuple[float, float]] = field(default_factory=list)
    lower: List[Tuple[float, float]] = field(default_factory=list)
    z: float = 0.0

    def evaluate(self) -> float:
        return fox_wright(self.upper, self.lower, self.z)


class KahanSummation:
    """Running sum with a compensation term for lost low-order bits."""

    def __init__(self):
        self.sum = 0.0
        self.carry = 0.0

    def add(self, value: float) -> None:
        value -= self.carry
        previous_sum = self.sum
        self.sum = previous_sum + value
        self.carry = (self.sum - previous_sum) - value


def is_nonpositive_integer(z: float, tol: float = 0.0) -> bool:
    return z <= tol and abs(z - round(z)) <= tol


def sinpi(z: float) -> float:
    """sin(pi*z) with exact zeros at the integers."""
    r = z - 2.0 * round(z / 2.0)  # r in [-1, 1]
    if r == 0.0 or abs(r) == 1.0:
        return 0.0
    if r > 0.5:
        r = 1.0 - r
    elif r < -0.5:
        r = -1.0 - r
    return math.sin(math.pi * r)


def _lanczos(z: float) -> float:
    # valid for z >= 0.5
    z -= 1.0
    x = LANCZOS_COEFFS[0]
    for i in range(1, LANCZOS_G + 2):
        x += LANCZOS_COEFFS[i] / (z + i)
    t = z + LANCZOS_G + 0.5
    # split the power to delay overflow for large z
    half = t ** ((z + 0.5) / 2.0)
    return SQRT_TWO_PI * half * (half * math.exp(-t)) * x


def gamma(z: float) -> float:
    """
    Euler gamma function.

    Args:
        z: Real argument, not a nonpositive integer

    Returns:
        Gamma(z)

    Raises:
        PoleError: if z lies within POLE_TOLERANCE of 0, -1, -2, ...
        GammaOverflowError: if z > GAMMA_MAX_ARG
    """
    if is_nonpositive_integer(z, FracConfig.POLE_TOLERANCE):
        raise PoleError(f"gamma has a pole at z={z}")
    if z > FracConfig.GAMMA_MAX_ARG:
        raise GammaOverflowError(f"gamma overflows a double at z={z}")
    if z == math.floor(z) and z <= 171:
        return float(math.factorial(int(z) - 1))
    if z < 0.5:
        if 1.0 - z > FracConfig.GAMMA_MAX_ARG:
            # reflected value underflows
            return 0.0
        return math.pi / (sinpi(z) * _lanczos(1.0 - z))
    return _lanczos(z)


def recip_gamma(z: float) -> float:
    """1/Gamma(z), exactly zero at the poles."""
    if z <= 0.0 and z == math.floor(z):
        return 0.0
    if z == math.floor(z) and z <= 171:
        return 1.0 / math.factorial(int(z) - 1)
    if z < 0.5:
        if 1.0 - z > FracConfig.GAMMA_MAX_ARG:
            raise GammaOverflowError(f"1/gamma overflows a double at z={z}")
        return sinpi(z) * _lanczos(1.0 - z) / math.pi
    if z > FracConfig.GAMMA_MAX_ARG:
        return 0.0
    return 1.0 / _lanczos(z)


def gamma_sign(z: float) -> float:
    """Sign of Gamma(z); 0.0 at the poles."""
    if z > 0.0:
        return 1.0
    if z == math.floor(z):
        return 0.0
    return -1.0 if math.ceil(-z) % 2 == 1 else 1.0


def binom_general(q: float, j: int) -> float:
    """Generalized binomial coefficient via the falling-factorial product."""
    if j < 0:
        raise DomainError(f"binomial index must be nonnegative, got {j}")
    result = 1.0
    for i in range(j):
        result *= (q - i) / (i + 1)
    return result


def log_abs_binom_general(q: float, j: int) -> Tuple[float, float]:
    """Return (sign, log|binom(q, j)|); sign 0.0 means the coefficient is zero."""
    if j < 0:
        raise DomainError(f"binomial index must be nonnegative, got {j}")
    sign = 1.0
    log_mag = 0.0
    for i in range(j):
        factor = q - i
        if factor == 0.0:
            return 0.0, -math.inf
        if factor < 0.0:
            sign = -sign
        log_mag += math.log(abs(factor)) - math.log(i + 1)
    return sign, log_mag


def _sum_series(term_at, label: str, metadata: dict) -> float:
    """Compensated sum of term_at(k), k = 0, 1, ... with the small-term stopping rule."""
    acc = KahanSummation()
    streak = 0
    for k in range(FracConfig.SERIES_MAX_TERMS):
        try:
            term = term_at(k)
        except OverflowError:
            _logger().error(f"{label} series terms overflow", {**metadata, "k": k})
            raise SeriesConvergenceError(f"{label} series terms overflow at k={k}")
        acc.add(term)
        if abs(term) < FracConfig.SERIES_RTOL * abs(acc.sum):
            streak += 1
            if streak >= FracConfig.SERIES_SMALL_STREAK:
                return acc.sum
        else:
            streak = 0
    _logger().error(f"{label} series did not converge", metadata)
    raise SeriesConvergenceError(
        f"{label} series not converged after {FracConfig.SERIES_MAX_TERMS} terms"
    )


def mittag_leffler(alpha: float, beta: float, z: float) -> float:
    """
    Two-parameter Mittag-Leffler function by direct series.

    Args:
        alpha: Positive order parameter
        beta: Real shift parameter
        z: Real argument

    Returns:
        E_{alpha,beta}(z)
    """
    if not alpha > 0:
        raise DomainError(f"Mittag-Leffler requires alpha > 0, got {alpha}")
    if z == 0.0:
        return recip_gamma(beta)
    if abs(z) > FracConfig.ML_CANCELLATION_THRESHOLD:
        _logger().warning("Mittag-Leffler argument large; series cancellation likely", {
            "alpha": alpha, "beta": beta, "z": z,
            "threshold": FracConfig.ML_CANCELLATION_THRESHOLD
        })

    log_z = math.log(abs(z))
    z_negative = z < 0.0
    shift, rise = _integer_shift(alpha)
    try:
        z_shift = z ** shift
    except OverflowError:
        shift, z_shift = 0, 1.0
    terms: List[float] = []

    def log_space_term(k: int) -> float:
        arg = alpha * k + beta
        sign = gamma_sign(arg)
        if sign == 0.0:
            return 0.0
        if z_negative and k % 2 == 1:
            sign = -sign
        return sign * math.exp(k * log_z - math.lgamma(arg))

    def term_at(k: int) -> float:
        # term_k = term_{k-m} z^m Gamma(a) / Gamma(a + p), a = alpha (k-m) + beta
        term = None
        if shift and k >= shift:
            a = alpha * (k - shift) + beta
            if a > 0.0:
                rising = 1.0
                for i in range(rise):
                    rising *= a + i
                term = terms[k - shift] * z_shift / rising
                if not math.isfinite(term):
                    raise OverflowError(f"Mittag-Leffler term {k} is not finite")
        if term is None:
            term = log_space_term(k)
        terms.append(term)
        return term

    return _sum_series(term_at, "Mittag-Leffler", {"alpha": alpha, "beta": beta, "z": z})


def _integer_shift(alpha: float) -> Tuple[int, int]:
    """Smallest (m, p) with alpha * m = p a positive integer; (0, 0) if none."""
    for m in range(1, FracConfig.ML_MAX_SHIFT + 1):
        p = round(alpha * m)
        if p >= 1 and abs(alpha * m - p) <= FracConfig.INTEGER_TOLERANCE:
            return m, p
    return 0, 0


def fox_wright(upper: List[Tuple[float, float]], lower: List[Tuple[float, float]],
               z: float) -> float:
    """
    Fox-Wright function sum_n prod Gamma(a + A n) / prod Gamma(b + B n) z^n / n!.

    Lower gamma factors enter through their reciprocals so poles give zero terms.
    """
    log_z = math.log(abs(z)) if z != 0.0 else -math.inf
    z_negative = z < 0.0

    def term_at(n: int) -> float:
        if n > 0 and z == 0.0:
            return 0.0
        sign = -1.0 if (z_negative and n % 2 == 1) else 1.0
        log_mag = (n * log_z if n > 0 else 0.0) - math.lgamma(n + 1)
        for a, A in upper:
            arg = a + A * n
            if is_nonpositive_integer(arg, FracConfig.POLE_TOLERANCE):
                raise PoleError(f"upper Fox-Wright parameter hits a gamma pole at n={n}")
            sign *= gamma_sign(arg)
            log_mag += math.lgamma(arg)
        for b, B in lower:
            arg = b + B * n
            s = gamma_sign(arg)
            if s == 0.0:
                return 0.0
            sign *= s
            log_mag -= math.lgamma(arg)
        return sign * math.exp(log_mag)

    metadata = {"upper": upper, "lower": lower, "z": z}
    length = _terminating_length(lower)
    if z == 0.0:
        length = 1 if length is None else min(length, 1)
    if length is not None and length <= FracConfig.SERIES_MAX_TERMS:
        acc = KahanSummation()
        for n in range(length):
            try:
                acc.add(term_at(n))
            except OverflowError:
                _logger().error("Fox-Wright series terms overflow", {**metadata, "k": n})
                raise SeriesConvergenceError(f"Fox-Wright series terms overflow at k={n}")
        return acc.sum
    return _sum_series(term_at, "Fox-Wright", metadata)


def _terminating_length(lower: List[Tuple[float, float]]) -> Optional[int]:
    """Number of leading terms before a lower pair pins every later term to a pole."""
    lengths = []
    for b, B in lower:
        if B > 0.0 or not (float(b).is_integer() and float(B).is_integer()):
            continue
        if B == 0.0:
            if b <= 0.0:
                lengths.append(0)
            continue
        # b + B n <= 0 from n = ceil(b / -B) on
        lengths.append(max(0, math.ceil(b / -B)))
    return min(lengths) if lengths else None


def hermite(k: int, x: float) -> float:
    """Physicists' Hermite polynomial H_k(x) by three-term recurrence."""
    if k < 0:
        raise DomainError(f"Hermite degree must be nonnegative, got {k}")
    h_prev, h = 1.0, 2.0 * x
    if k == 0:
        return h_prev
    for n in range(1, k):
        h_prev, h = h, 2.0 * x * h - 2.0 * n * h_prev
    return h
