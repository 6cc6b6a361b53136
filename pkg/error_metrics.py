"""
Error Metrics
Symmetric relative error and truncation sweeps over (q, N, x) for the
catalog functions.
"""

from dataclasses import dataclass, field
from datetime import datetime
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from frac_config import FracConfig, FracLogger, ConfigurationError
from gl_processor import gl_reference_grid
from jet_engine import CatalogFn
from series_expansion import (
    Definition, ExpansionConfig, Order, frac_derivative, taylor_power_series_derivative
)


@lru_cache(maxsize=1)
def _logger() -> FracLogger:
    return FracLogger("error_metrics")


def rel_error(a: float, b: float) -> float:
    """(a - b) / ((|a| + |b|) / 2), in [-2, 2]; 0 by convention when a = b = 0."""
    if a == 0.0 and b == 0.0:
        _logger().warning("relative error undefined for two zeros; returning 0")
        return 0.0
    return (a - b) / ((abs(a) + abs(b)) / 2.0)


def rel_error_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise rel_error; double zeros map to 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    denom = (np.abs(a) + np.abs(b)) / 2.0
    both_zero = denom == 0.0
    if np.any(both_zero):
        _logger().warning("relative error undefined for two zeros; returning 0", {
            "count": int(np.sum(both_zero))
        })
    safe = np.where(both_zero, 1.0, denom)
    return np.where(both_zero, 0.0, (a - b) / safe)


def root_mask(xs: np.ndarray, values: np.ndarray,
              window: float = FracConfig.ROOT_WINDOW) -> np.ndarray:
    """True where x lies within `window` of a zero or sign change of `values`."""
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = values == 0.0
    flips = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]
    for i in flips:
        # linear interpolation of the crossing
        x0, x1 = xs[i], xs[i + 1]
        v0, v1 = values[i], values[i + 1]
        root = x0 - v0 * (x1 - x0) / (v1 - v0)
        mask |= np.abs(xs - root) < window
    return mask


def log_error(errors: np.ndarray) -> np.ndarray:
    """log10|err| floored at the smallest normal double so zeros stay finite."""
    return np.log10(np.maximum(np.abs(errors), np.finfo(float).tiny))


@dataclass
class SweepResult:
    """Truncation errors indexed [q, N, x] against a reference value per (q, x)."""
    function: str
    definition: Definition
    q_values: List[float]
    n_values: List[int]
    x_grid: np.ndarray
    reference: np.ndarray
    partial_sums: np.ndarray
    errors: np.ndarray
    excluded: np.ndarray
    reference_label: str = ""
    summary: pd.DataFrame = field(default_factory=pd.DataFrame)

    @property
    def log_errors(self) -> np.ndarray:
        return log_error(self.errors)

    def row_stats(self, q: float, n: int) -> Tuple[float, float]:
        """(mean, max) of |error| over points outside root neighbourhoods."""
        i, j = self.q_values.index(q), self.n_values.index(n)
        keep = ~self.excluded[i, j]
        values = np.abs(self.errors[i, j][keep])
        if values.size == 0:
            return 0.0, 0.0
        return float(np.mean(values)), float(np.max(values))

    def to_frame(self) -> pd.DataFrame:
        """Long table: q, N, x, reference, partial_sum, rel_error, log10_abs_error, excluded."""
        rows = []
        for i, q in enumerate(self.q_values):
            for j, n in enumerate(self.n_values):
                rows.append(pd.DataFrame({
                    "q": q,
                    "N": n,
                    "x": self.x_grid,
                    "reference": self.reference[i],
                    "partial_sum": self.partial_sums[i, j],
                    "rel_error": self.errors[i, j],
                    "log10_abs_error": log_error(self.errors[i, j]),
                    "excluded": self.excluded[i, j].astype(int),
                }))
        return pd.concat(rows, ignore_index=True)


class TruncationAnalyzer:
    """
    Truncation-error sweeps and summary claims for the integer-derivative series.
    """

    def __init__(self):
        self.logger = FracLogger("error_metrics")

    def truncation_sweep(self, f: CatalogFn, definition: Definition,
                         q_values: Sequence[float], n_values: Sequence[int],
                         x_grid: Sequence[float],
                         reference_n: int = FracConfig.REFERENCE_TERMS,
                         gl_grid: int = FracConfig.GL_REFERENCE_GRID) -> SweepResult:
        """
        Compare truncated partial sums against a reference on a grid.

        The reference is the partial sum at reference_n, except for the
        Gaussian, whose series diverges; there the GL sum is used.

        Args:
            f: Catalog function
            definition: GL, RL (base 0) or Caputo (base 0)
            q_values: Fractional orders
            n_values: Truncations, each below reference_n for series references
            x_grid: Evaluation points
            reference_n: Terms in the reference partial sum
            gl_grid: Gridpoints of the GL reference for the Gaussian

        Returns:
            SweepResult with errors, root exclusions and a per-row summary
        """
        start_time = datetime.now()
        q_values = [float(q) for q in q_values]
        n_values = [int(n) for n in n_values]
        xs = np.asarray(x_grid, dtype=float)
        use_gl = f.tag == "gaussian"

        if not use_gl and any(n > reference_n for n in n_values):
            raise ConfigurationError(
                f"truncations {n_values} exceed the reference of {reference_n} terms"
            )

        self.logger.info("Starting truncation sweep", {
            "function": f.label, "definition": definition.value, "q_values": q_values,
            "n_values": n_values, "points": len(xs), "reference_n": reference_n,
            "reference": "gl" if use_gl else "series"
        })

        try:
            top = max(n_values) if use_gl else reference_n
            reference = np.empty((len(q_values), len(xs)))
            partial = np.empty((len(q_values), len(n_values), len(xs)))
            for i, q in enumerate(q_values):
                cfg = ExpansionConfig(definition, Order(q), top, 0.0)
                cumulative = np.array([
                    np.cumsum([t.contribution for t in frac_derivative(f, float(x), cfg).terms])
                    for x in xs
                ])
                for j, n in enumerate(n_values):
                    partial[i, j] = cumulative[:, n - 1]
                if use_gl:
                    reference[i] = gl_reference_grid(f, definition, q, xs, gl_grid)
                else:
                    reference[i] = cumulative[:, reference_n - 1]

            errors = np.empty_like(partial)
            excluded = np.zeros(partial.shape, dtype=bool)
            for i in range(len(q_values)):
                ref_mask = root_mask(xs, reference[i])
                for j in range(len(n_values)):
                    errors[i, j] = rel_error_array(reference[i], partial[i, j])
                    excluded[i, j] = ref_mask | root_mask(xs, partial[i, j])

            result = SweepResult(
                f.label, definition, q_values, n_values, xs, reference, partial,
                errors, excluded, "gl" if use_gl else f"series N={reference_n}"
            )
            result.summary = self._summarize(result)

            self.logger.info("Truncation sweep complete", {
                "function": f.label,
                "excluded_points": int(excluded.sum()),
                "processing_time": (datetime.now() - start_time).total_seconds()
            })
            return result

        except Exception as e:
            self.logger.error(f"Truncation sweep failed: {str(e)}")
            raise

    def average_error_claim(self, f: CatalogFn, n_terms: int,
                            domain: Tuple[float, float] = FracConfig.AVERAGE_ERROR_DOMAIN,
                            points: int = FracConfig.AVERAGE_ERROR_POINTS,
                            q: float = 0.5, definition: Definition = Definition.CAPUTO,
                            reference_n: int = FracConfig.REFERENCE_TERMS) -> float:
        """Mean |error| of the n_terms truncation over a uniform grid on domain."""
        xs = np.linspace(domain[0], domain[1], points)
        sweep = self.truncation_sweep(f, definition, [q], [n_terms], xs, reference_n)
        return float(np.mean(np.abs(sweep.errors[0, 0])))

    def taylor_comparison(self, f: CatalogFn, definition: Definition, q: float,
                          n_terms: int, x_grid: Sequence[float],
                          reference_n: int = FracConfig.REFERENCE_TERMS) -> pd.DataFrame:
        """Integer-derivative series next to the Maclaurin power-rule series."""
        xs = np.asarray(x_grid, dtype=float)
        cfg = ExpansionConfig(definition, Order(q), n_terms, 0.0)
        ref_cfg = ExpansionConfig(definition, Order(q), reference_n, 0.0)
        series = np.array([frac_derivative(f, float(x), ref_cfg).value for x in xs])
        taylor = np.array([taylor_power_series_derivative(f, float(x), cfg) for x in xs])
        self.logger.info("Taylor comparison complete", {
            "function": f.label, "q": q, "n_terms": n_terms, "points": len(xs)
        })
        return pd.DataFrame({
            "x": xs,
            "series": series,
            "taylor": taylor,
            "rel_error": rel_error_array(series, taylor),
        })

    def _summarize(self, result: SweepResult) -> pd.DataFrame:
        rows: List[Dict[str, float]] = []
        for q in result.q_values:
            for n in result.n_values:
                mean, peak = result.row_stats(q, n)
                rows.append({"q": q, "N": n, "mean_abs_error": mean, "max_abs_error": peak})
        return pd.DataFrame(rows)
