"""Error metrics: turn aligned (prediction, truth) vectors into an error vector.

Every metric is applied element-wise and fails loudly instead of producing
NaN or infinity, so downstream statistics never see undefined values.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import DataError


class ErrorMetric(Enum):
    """Supported definitions of the per-observation error."""

    DIFFERENCE = "difference"                      # pred - truth
    ABSOLUTE = "absolute"                          # |pred - truth|
    SQUARED_SIGNED = "squared_signed"              # (pred - truth) * |pred - truth|
    SQUARED = "squared"                            # (pred - truth)^2
    PERCENTAGE = "percentage"                      # (pred - truth) / truth
    SYMMETRIC_PERCENTAGE = "symmetric_percentage"  # 2 * (pred - truth) / (pred + truth)
    IDENTITY = "identity"                          # pred itself (equal-outcome mode)

    @property
    def is_percentage(self) -> bool:
        """True for the ratio-valued metrics that reports render as percent."""
        return self in (ErrorMetric.PERCENTAGE, ErrorMetric.SYMMETRIC_PERCENTAGE)


@dataclass(frozen=True)
class ErrorVector:
    """A finite error vector together with the metric that produced it.

    Callers with a domain-specific error definition can construct one
    directly and feed it to the partitioning/testing layers.
    """

    values: np.ndarray
    metric: ErrorMetric

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise DataError("an error vector must be one-dimensional and nonempty")
        if not np.all(np.isfinite(values)):
            row = int(np.flatnonzero(~np.isfinite(values))[0])
            raise DataError(f"error vector contains a non-finite value at row {row}")
        if not isinstance(self.metric, ErrorMetric):
            raise DataError(f"metric must be an ErrorMetric, got {self.metric!r}")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)


def _as_finite_floats(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise DataError(f"{name} contains a non-finite value at row {int(bad[0])}")
    return arr


def compute_errors(pred, truth, metric: ErrorMetric) -> ErrorVector:
    """Compute the error vector for `metric`.

    `pred` and `truth` must be aligned, nonempty and finite. The identity
    metric returns the raw predictions and ignores `truth` entirely, which
    is how prediction distributions (rather than errors) are compared.

    Raises DataError on length mismatch, non-finite inputs, a zero truth
    value under the percentage metric, or a zero pred+truth sum with a
    nonzero difference under the symmetric percentage metric.
    """
    p = _as_finite_floats(pred, "pred")
    if p.size == 0:
        raise DataError("pred is empty")
    if metric is ErrorMetric.IDENTITY:
        return ErrorVector(p.copy(), metric)

    t = _as_finite_floats(truth, "truth")
    if p.size != t.size:
        raise DataError(f"pred has {p.size} values but truth has {t.size}")

    d = p - t
    if metric is ErrorMetric.DIFFERENCE:
        out = d
    elif metric is ErrorMetric.ABSOLUTE:
        out = np.abs(d)
    elif metric is ErrorMetric.SQUARED_SIGNED:
        out = d * np.abs(d)
    elif metric is ErrorMetric.SQUARED:
        out = d * d
    elif metric is ErrorMetric.PERCENTAGE:
        zero = np.flatnonzero(t == 0.0)
        if zero.size:
            raise DataError(
                f"percentage error is undefined where truth is zero (row {int(zero[0])}); "
                "filter those rows or use the symmetric percentage metric"
            )
        out = d / t
    elif metric is ErrorMetric.SYMMETRIC_PERCENTAGE:
        s = p + t
        bad = np.flatnonzero((s == 0.0) & (d != 0.0))
        if bad.size:
            r = int(bad[0])
            raise DataError(
                f"symmetric percentage error has a zero denominator at row {r} "
                f"(pred={p[r]}, truth={t[r]})"
            )
        # 0/0 (pred == truth == 0) is defined as exactly zero
        out = np.where(s == 0.0, 0.0, 2.0 * d / np.where(s == 0.0, 1.0, s))
    else:
        raise DataError(f"unknown metric {metric!r}")

    bad = np.flatnonzero(~np.isfinite(out))
    if bad.size:
        raise DataError(f"error value overflows at row {int(bad[0])}")
    return ErrorVector(out, metric)
