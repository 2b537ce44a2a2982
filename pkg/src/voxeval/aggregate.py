"""Summary statistics for metric columns: mean, stddev, median, quartiles.

The percentile here is the single shared definition used across the
package, including by the 95th-percentile Hausdorff distance: linear
interpolation between the closest order statistics at position
(n - 1) * q / 100 on the sorted values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


def _checked_array(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValidationError(f"{what} requires at least one value")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what} received non-finite values")
    return arr


def percentile(values, q: float) -> float:
    """Percentile with linear interpolation between order statistics.

    Args:
        values: nonempty sequence of finite reals.
        q: percentile rank in [0, 100].

    Returns:
        The value at fractional position (n - 1) * q / 100 of the sorted
        input, interpolating linearly between neighbours.  q=0 gives the
        minimum, q=100 the maximum.
    """
    arr = _checked_array(values, "percentile")
    q = float(q)
    if not (0.0 <= q <= 100.0):
        raise ValidationError(f"percentile rank must lie in [0, 100], got {q}")
    return float(np.percentile(arr, q))


@dataclass(frozen=True)
class SummaryStats:
    """Location and spread of one metric column."""

    mean: float
    stddev: float
    median: float
    p25: float
    p75: float
    count: int


def summarize(values) -> SummaryStats:
    """Summarise a nonempty sequence of finite reals.

    The standard deviation is the population form (divide by n), and the
    median and quartiles use the shared linear-interpolation percentile.
    """
    arr = _checked_array(values, "summarize")
    return SummaryStats(
        mean=float(np.mean(arr)),
        stddev=float(np.std(arr)),
        median=float(np.percentile(arr, 50.0)),
        p25=float(np.percentile(arr, 25.0)),
        p75=float(np.percentile(arr, 75.0)),
        count=int(arr.size),
    )
