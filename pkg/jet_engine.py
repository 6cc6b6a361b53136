"""
Jet Engine
Truncated Taylor-coefficient arithmetic supplying exact integer derivatives
of the catalog functions.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from frac_config import FracConfig, DomainError, ConfigurationError
from special_functions import binom_general

Number = Union[int, float]


class Jet:
    """
    Taylor coefficients c_k = f^(k)(x)/k! of a function at a point.

    Coefficients are copied on construction and never mutated afterwards.
    """

    def __init__(self, point: float, coeffs):
        arr = np.array(coeffs, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("jet needs a non-empty coefficient vector")
        if not np.all(np.isfinite(arr)):
            raise DomainError(f"jet at x={point} has non-finite coefficients")
        arr.setflags(write=False)
        self.point = float(point)
        self._coeffs = arr

    @classmethod
    def variable(cls, x: float, order: int) -> "Jet":
        coeffs = np.zeros(order + 1)
        coeffs[0] = x
        if order >= 1:
            coeffs[1] = 1.0
        return cls(x, coeffs)

    @classmethod
    def constant(cls, x: float, value: float, order: int) -> "Jet":
        coeffs = np.zeros(order + 1)
        coeffs[0] = value
        return cls(x, coeffs)

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def order(self) -> int:
        return self._coeffs.size - 1

    def derivative(self, k: int) -> float:
        """f^(k)(x) = k! c_k."""
        if k < 0 or k > self.order:
            raise DomainError(f"derivative order {k} outside jet order {self.order}")
        if k > 170:
            raise DomainError(f"k! overflows double precision for k={k}")
        return float(self._coeffs[k]) * math.factorial(k)

    def derivatives(self) -> np.ndarray:
        top = min(self.order, 170)
        factorials = np.array([math.factorial(k) for k in range(top + 1)], dtype=float)
        return self._coeffs[:top + 1] * factorials

    def evaluate(self, h: float) -> float:
        """Truncated Taylor polynomial at x + h."""
        return float(np.polynomial.polynomial.polyval(h, self._coeffs))

    def shift_to(self, x: float, order: Optional[int] = None) -> "Jet":
        """Re-expand the truncated polynomial about another point."""
        order = self.order if order is None else order
        poly = np.polynomial.Polynomial(self._coeffs)
        moved = poly(np.polynomial.Polynomial([x - self.point, 1.0]))
        coeffs = np.zeros(order + 1)
        top = min(order, moved.coef.size - 1)
        coeffs[:top + 1] = moved.coef[:top + 1]
        return Jet(x, coeffs)

    def _check_compatible(self, other: "Jet") -> int:
        if other.point != self.point:
            raise DomainError("jets expanded at different points")
        return min(self.order, other.order)

    def __add__(self, other: Union["Jet", Number]) -> "Jet":
        if isinstance(other, Jet):
            n = self._check_compatible(other)
            return Jet(self.point, self._coeffs[:n + 1] + other.coeffs[:n + 1])
        coeffs = self._coeffs.copy()
        coeffs[0] += other
        return Jet(self.point, coeffs)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(self.point, -self._coeffs)

    def __sub__(self, other: Union["Jet", Number]) -> "Jet":
        return self + (-other)

    def __rsub__(self, other: Number) -> "Jet":
        return (-self) + other

    def __mul__(self, other: Union["Jet", Number]) -> "Jet":
        if isinstance(other, Jet):
            n = self._check_compatible(other)
            product = np.convolve(self._coeffs[:n + 1], other.coeffs[:n + 1])[:n + 1]
            return Jet(self.point, product)
        return Jet(self.point, self._coeffs * other)

    __rmul__ = __mul__

    def exp(self) -> "Jet":
        """Composition exp(u) via k e_k = sum_j j u_j e_{k-j}."""
        u = self._coeffs
        e = np.zeros_like(u)
        e[0] = math.exp(u[0])
        j = np.arange(u.size, dtype=float)
        for k in range(1, u.size):
            e[k] = np.dot(j[1:k + 1] * u[1:k + 1], e[k - 1::-1][:k]) / k
        return Jet(self.point, e)


@dataclass(frozen=True)
class CatalogFn:
    """A function from the closed catalog, with its optional parameter."""
    tag: str
    param: float = 0.0

    def __post_init__(self):
        if self.tag not in FracConfig.CATALOG_TAGS:
            raise ConfigurationError(
                f"unknown function '{self.tag}'; choose from {', '.join(FracConfig.CATALOG_TAGS)}"
            )

    @classmethod
    def parse(cls, text: str) -> "CatalogFn":
        """Parse 'sech', 'power:2.5' or 'constant:1'."""
        tag, _, raw = text.strip().partition(":")
        tag = tag.lower()
        if tag in ("power", "constant"):
            try:
                param = float(raw) if raw else 1.0
            except ValueError:
                raise ConfigurationError(f"bad parameter in --fn {text}")
            return cls(tag, param)
        if raw:
            raise ConfigurationError(f"function '{tag}' takes no parameter")
        return cls(tag)

    @property
    def label(self) -> str:
        if self.tag in ("power", "constant"):
            return f"{self.tag}:{self.param:g}"
        return self.tag

    def _power_is_integer(self) -> bool:
        return float(self.param).is_integer()

    def check_domain(self, x: float) -> None:
        if self.tag != "power":
            return
        if not self._power_is_integer() and x <= 0.0:
            raise DomainError(f"power({self.param}) needs x > 0, got x={x}")
        if self._power_is_integer() and self.param < 0 and x == 0.0:
            raise DomainError(f"power({self.param}) is singular at x=0")

    def value(self, x: float) -> float:
        self.check_domain(x)
        return float(self.values(np.array([x]))[0])

    def values(self, xs: np.ndarray) -> np.ndarray:
        """Vectorised point values."""
        xs = np.asarray(xs, dtype=float)
        if self.tag == "sech":
            return 1.0 / np.cosh(xs)
        if self.tag == "tanh":
            return np.tanh(xs)
        if self.tag == "sin":
            return np.sin(xs)
        if self.tag == "cos":
            return np.cos(xs)
        if self.tag == "gaussian":
            return np.exp(-xs * xs)
        if self.tag == "exp":
            return np.exp(xs)
        if self.tag == "constant":
            return np.full_like(xs, self.param)
        if self._power_is_integer():
            if self.param < 0 and np.any(xs == 0.0):
                raise DomainError(f"power({self.param}) is singular at x=0")
        elif np.any(xs <= 0.0):
            raise DomainError(f"power({self.param}) needs x > 0")
        return np.power(xs, self.param)


def _cyclic(values: Tuple[float, float, float, float], order: int) -> np.ndarray:
    coeffs = np.empty(order + 1)
    inv_fact = 1.0
    for k in range(order + 1):
        if k > 0:
            inv_fact /= k
        coeffs[k] = values[k % 4] * inv_fact
    return coeffs


def _sech_tanh(x: float, order: int) -> Tuple[np.ndarray, np.ndarray]:
    s = np.zeros(order + 1)
    t = np.zeros(order + 1)
    s[0] = 1.0 / math.cosh(x) if abs(x) < 700 else 0.0
    t[0] = math.tanh(x)
    for k in range(order):
        # s' = -s t, t' = s^2
        s[k + 1] = -np.dot(s[:k + 1], t[k::-1]) / (k + 1)
        t[k + 1] = np.dot(s[:k + 1], s[k::-1]) / (k + 1)
    return s, t


def _gaussian(x: float, order: int) -> np.ndarray:
    g = np.zeros(order + 1)
    g[0] = math.exp(-x * x)
    for k in range(order):
        # g' = -2 x g on jets
        g[k + 1] = -2.0 * (x * g[k] + (g[k - 1] if k >= 1 else 0.0)) / (k + 1)
    return g


def _power(p: float, x: float, order: int) -> np.ndarray:
    coeffs = np.zeros(order + 1)
    for k in range(order + 1):
        b = binom_general(p, k)
        if b == 0.0:
            continue
        coeffs[k] = b * x ** (p - k)
    return coeffs


def jet_eval(f: CatalogFn, x: float, order: int) -> Jet:
    """
    Exact jet of a catalog function.

    Args:
        f: Catalog function
        x: Expansion point
        order: Highest Taylor coefficient, at most MAX_JET_ORDER

    Returns:
        Jet with order + 1 coefficients
    """
    if order < 0 or order > FracConfig.MAX_JET_ORDER:
        raise DomainError(f"jet order must lie in [0, {FracConfig.MAX_JET_ORDER}], got {order}")
    f.check_domain(x)
    try:
        coeffs = _catalog_coeffs(f, x, order)
    except OverflowError:
        raise DomainError(f"derivatives of {f.label} overflow a double at x={x}")
    return Jet(x, coeffs)


def _catalog_coeffs(f: CatalogFn, x: float, order: int) -> np.ndarray:
    if f.tag in ("sech", "tanh"):
        s, t = _sech_tanh(x, order)
        coeffs = s if f.tag == "sech" else t
    elif f.tag == "sin":
        coeffs = _cyclic((math.sin(x), math.cos(x), -math.sin(x), -math.cos(x)), order)
    elif f.tag == "cos":
        coeffs = _cyclic((math.cos(x), -math.sin(x), -math.cos(x), math.sin(x)), order)
    elif f.tag == "gaussian":
        coeffs = _gaussian(x, order)
    elif f.tag == "exp":
        coeffs = _cyclic((math.exp(x),) * 4, order)
    elif f.tag == "power":
        coeffs = _power(f.param, x, order)
    else:
        coeffs = np.zeros(order + 1)
        coeffs[0] = f.param
    return coeffs


def derivative(f: CatalogFn, x: float, k: int) -> float:
    """f^(k)(x) from the jet of order k."""
    return jet_eval(f, x, k).derivative(k)


def shift_check(f: CatalogFn, x: float, j: int, h: float) -> Tuple[float, float]:
    """
    Compare the shifted sample f(x - j h) with (1 - h d/dx)^j f at x.

    Returns:
        (direct shifted value, binomial operator expansion through order j)
    """
    direct = f.value(x - j * h)
    derivs = jet_eval(f, x, j).derivatives()
    operator = math.fsum(
        math.comb(j, i) * (-h) ** i * derivs[i] for i in range(j + 1)
    )
    return direct, operator
