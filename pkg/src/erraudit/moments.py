"""First four sample moments, population (1/n) convention.

Mean, variance, skewness (third standardized moment) and excess kurtosis
(fourth standardized moment minus 3, so a normal sample scores near zero).
Skewness and kurtosis are undefined for constant samples and are carried
as None rather than 0 or NaN so consumers must handle the degenerate case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DataError

STATISTICS = ("mean", "variance", "skewness", "kurtosis")


@dataclass(frozen=True)
class MomentSet:
    mean: float
    variance: float
    skewness: float | None
    kurtosis: float | None
    n: int

    def get(self, statistic: str) -> float | None:
        if statistic not in STATISTICS:
            raise KeyError(statistic)
        return getattr(self, statistic)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean,
            "variance": self.variance,
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
        }


def moment_set(sample) -> MomentSet:
    """Compute the four moments of a nonempty finite sample.

    Central moments use the 1/n normalization (no bias correction); the
    same estimator is applied to every group so cross-group comparisons
    stay consistent.
    """
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise DataError("moment_set requires at least one value")
    if not np.all(np.isfinite(x)):
        raise DataError("moment_set requires finite values")
    if np.all(x == x[0]):
        return MomentSet(float(x[0]), 0.0, None, None, int(x.size))
    mu = float(x.mean())
    d = x - mu
    dd = d * d
    m2 = float(dd.mean())
    if m2 == 0.0:
        return MomentSet(mu, 0.0, None, None, int(x.size))
    m3 = float((dd * d).mean())
    m4 = float((dd * dd).mean())
    return MomentSet(mu, m2, m3 / m2**1.5, m4 / (m2 * m2) - 3.0, int(x.size))
