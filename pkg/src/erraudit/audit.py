"""Two-stage fairness audit orchestration.

Stage one computes the error vector, partitions it by sensitive group and
runs the k-sample Anderson-Darling omnibus test. Only when that test
rejects does stage two run pairwise permutation tests on the four moments
for every unordered group pair, flagging significant differences at the
configured level (optionally with a multiple-comparison correction across
the whole pair x statistic family).
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .adtest import AdTestResult, ad_test, tabulated_alphas
from .exceptions import ConfigError, DataError
from .metrics import ErrorMetric, ErrorVector, compute_errors
from .moments import MomentSet, moment_set
from .permtest import MAX_SEED, PermutationResult, permutation_test

CORRECTIONS = ("none", "holm", "bonferroni")
LABEL_SEPARATOR = "|"


@dataclass(frozen=True)
class GroupedErrors:
    """Error values partitioned by sensitive group label."""

    groups: dict[str, np.ndarray]
    metric: ErrorMetric

    def __post_init__(self) -> None:
        if not self.groups:
            raise DataError("at least one group is required")
        for label, values in self.groups.items():
            if np.asarray(values).size == 0:
                raise DataError(f"group {label!r} is empty")

    @property
    def k(self) -> int:
        return len(self.groups)

    def labels(self) -> tuple[str, ...]:
        return tuple(self.groups)

    def sizes(self) -> dict[str, int]:
        return {label: int(np.asarray(v).size) for label, v in self.groups.items()}


@dataclass(frozen=True)
class AuditConfig:
    """Knobs of one audit run.

    Defaults follow the typical batch-audit setup: percentage errors,
    alpha 0.01, 100,000 permutations, and a minimum of 10 observations
    per group (the smallest size at which an equal-split pair can reach
    p <= 0.01 exactly).
    """

    metric: ErrorMetric = ErrorMetric.PERCENTAGE
    alpha: float = 0.01
    permutations: int = 100_000
    seed: int = 42
    tie_mode: str = "midrank"
    min_group_size: int = 10
    correction: str = "none"

    def __post_init__(self) -> None:
        if not any(abs(self.alpha - a) <= 1e-12 for a in tabulated_alphas()):
            raise ConfigError(f"alpha={self.alpha} is not a tabulated level")
        if self.permutations < 1:
            raise ConfigError("permutations must be >= 1")
        if not 0 <= int(self.seed) <= MAX_SEED:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.min_group_size < 1:
            raise ConfigError("min_group_size must be >= 1")
        if self.correction not in CORRECTIONS:
            raise ConfigError(f"correction must be one of {CORRECTIONS}")

    def as_dict(self) -> dict:
        return {
            "metric": self.metric.value,
            "alpha": self.alpha,
            "permutations": self.permutations,
            "seed": self.seed,
            "tie_mode": self.tie_mode,
            "min_group_size": self.min_group_size,
            "correction": self.correction,
        }


@dataclass(frozen=True)
class GroupSummary:
    n: int
    moments: MomentSet
    mean_abs_error: float


@dataclass(frozen=True)
class PosthocEntry:
    """One pair's permutation test plus its post-correction significance flags."""

    result: PermutationResult
    significant: dict[str, bool]


@dataclass(frozen=True)
class AuditReport:
    config: AuditConfig
    groups: dict[str, GroupSummary]
    ad: AdTestResult
    verdict: str  # "fair" | "unfair"
    posthoc: tuple[PosthocEntry, ...]
    warnings: tuple[str, ...] = field(default_factory=tuple)


def partition_errors(
    errors: ErrorVector, labels, min_group_size: int = 1
) -> tuple[GroupedErrors, list[str]]:
    """Partition an error vector by group label, preserving row order.

    Groups appear in order of first appearance. Groups smaller than
    `min_group_size` are excluded with a warning message rather than
    failing the audit. Returns (grouped, warnings).
    """
    label_arr = np.asarray(labels, dtype=str).ravel()
    values = errors.values
    if label_arr.size != values.size:
        raise DataError(
            f"got {label_arr.size} labels for {values.size} error values"
        )
    order = {}
    for lab in label_arr:
        if lab not in order:
            order[lab] = len(order)
    warnings: list[str] = []
    groups: dict[str, np.ndarray] = {}
    for lab in order:
        member = values[label_arr == lab]
        if member.size < min_group_size:
            warnings.append(
                f"group '{lab}' has only {member.size} observations "
                f"(min_group_size={min_group_size}); excluded from the audit"
            )
        else:
            groups[lab] = member
    if not groups:
        raise DataError("no group meets the minimum size; nothing to audit")
    return GroupedErrors(groups=groups, metric=errors.metric), warnings


def intersect_labels(columns, separator: str = LABEL_SEPARATOR) -> np.ndarray:
    """Join several label columns element-wise into intersectional labels."""
    cols = [np.asarray(c, dtype=str).ravel() for c in columns]
    if not cols:
        raise DataError("at least one label column is required")
    n = cols[0].size
    if any(c.size != n for c in cols):
        raise DataError("label columns have unequal lengths")
    if len(cols) == 1:
        return cols[0].copy()
    return np.array([separator.join(row) for row in zip(*cols)], dtype=str)


def _pair_seed(master_seed: int, a: np.ndarray, b: np.ndarray) -> int:
    # Derived from the master seed and the pair's pooled content (not its
    # labels), so renaming groups or adding new ones never perturbs an
    # existing pair's permutation stream.
    blobs = sorted(
        (arr.size, np.sort(arr).astype("<f8").tobytes()) for arr in (a, b)
    )
    digest = hashlib.sha256()
    digest.update(int(master_seed).to_bytes(8, "little"))
    for size, blob in blobs:
        digest.update(size.to_bytes(8, "little"))
        digest.update(blob)
    return int.from_bytes(digest.digest()[:8], "little")


def _holm_flags(pvalues: list[float], alpha: float) -> list[bool]:
    m = len(pvalues)
    order = sorted(range(m), key=lambda i: pvalues[i])
    flags = [False] * m
    for rank, idx in enumerate(order):
        if pvalues[idx] <= alpha / (m - rank):
            flags[idx] = True
        else:
            break
    return flags


def significance_flags(pvalues: list[float], alpha: float, correction: str) -> list[bool]:
    """Flag each p-value in the family as significant at `alpha`."""
    if correction not in CORRECTIONS:
        raise ConfigError(f"correction must be one of {CORRECTIONS}")
    if not pvalues:
        return []
    if correction == "none":
        return [p <= alpha for p in pvalues]
    if correction == "bonferroni":
        return [p <= alpha / len(pvalues) for p in pvalues]
    return _holm_flags(pvalues, alpha)


def run_posthoc(
    grouped: GroupedErrors, config: AuditConfig, threads: int = 1
) -> tuple[PosthocEntry, ...]:
    """Permutation tests for every unordered group pair, with flags."""
    labels = grouped.labels()
    pairs = list(combinations(labels, 2))

    def one_pair(pair):
        la, lb = pair
        a, b = grouped.groups[la], grouped.groups[lb]
        return permutation_test(
            a,
            b,
            config.permutations,
            _pair_seed(config.seed, a, b),
            group_a=la,
            group_b=lb,
        )
    if threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_pair, pairs))
    else:
        results = [one_pair(p) for p in pairs]

    family = [(i, s) for i, r in enumerate(results) for s in r.p_values]
    flags = significance_flags(
        [results[i].p_values[s] for i, s in family], config.alpha, config.correction
    )
    significant: list[dict[str, bool]] = [{} for _ in results]
    for (i, s), flag in zip(family, flags):
        significant[i][s] = flag
    return tuple(
        PosthocEntry(result=r, significant=significant[i])
        for i, r in enumerate(results)
    )


def run_audit(pred, truth, labels, config: AuditConfig, threads: int = 1) -> AuditReport:
    """Run the full two-stage audit and assemble the report.

    The post hoc stage runs only when the omnibus test rejects; a fair
    verdict therefore always comes with an empty posthoc list. The report
    is a pure function of (pred, truth, labels, config); `threads` only
    bounds parallelism across pairs and never changes the result.
    """
    errors = compute_errors(pred, truth, config.metric)
    grouped, warnings = partition_errors(errors, labels, config.min_group_size)
    if grouped.k < 2:
        raise DataError(
            f"auditing needs at least two groups with n >= {config.min_group_size}; "
            f"got {grouped.k}"
        )
    ad = ad_test(
        list(grouped.groups.values()), alpha=config.alpha, tie_mode=config.tie_mode
    )
    summaries = {
        label: GroupSummary(
            n=int(values.size),
            moments=moment_set(values),
            mean_abs_error=float(np.abs(values).mean()),
        )
        for label, values in grouped.groups.items()
    }
    posthoc: tuple[PosthocEntry, ...] = ()
    if ad.reject:
        posthoc = run_posthoc(grouped, config, threads=threads)
    return AuditReport(
        config=config,
        groups=summaries,
        ad=ad,
        verdict="unfair" if ad.reject else "fair",
        posthoc=posthoc,
        warnings=tuple(warnings),
    )
