"""Pairwise permutation tests on the first four moments.

Significance of the observed gap in mean, variance, skewness and excess
kurtosis between two samples is assessed by relabeling the pooled values:
randomized relabeling for realistic sizes, full enumeration of the
C(n_a + n_b, n_a) distinct assignments when that count is small enough.

All four statistics are evaluated in one pass per relabeling. A statistic
that is undefined in either observed group (skewness/kurtosis of a
constant sample, variance when both samples are constant) is skipped
rather than tested; a relabeling in which a tested statistic becomes
undefined counts toward the extreme tail, which is conservative.

Determinism contract: relabeling i is drawn from a counter-indexed Philox
substream of the master seed, so results are bit-identical for a given
(pool, sizes, l, seed) no matter how work is batched or parallelized, and
invariant under swapping the two arguments.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DataError
from .moments import STATISTICS, MomentSet, moment_set

MAX_SEED = 2**64 - 1
DEFAULT_MAX_ASSIGNMENTS = 1_000_000

_BATCH_ELEMENTS = 4_000_000  # cap on rows x pooled-size per evaluation batch


@dataclass(frozen=True)
class PermutationResult:
    """Outcome of one pairwise permutation test.

    `p_values` holds the tested statistics, `skipped` the ones excluded
    because they are undefined in the observed groups; each of the four
    statistics appears in exactly one of the two. `exact` distinguishes
    full enumeration (l = number of distinct assignments, seed None) from
    the randomized engine.
    """

    group_a: str
    group_b: str
    n_a: int
    n_b: int
    observed_a: MomentSet
    observed_b: MomentSet
    diffs: dict[str, float]
    p_values: dict[str, float]
    skipped: tuple[str, ...]
    l: int
    seed: int | None
    exact: bool


def _validate_sample(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size == 0:
        raise DataError(f"sample {name!r} is empty")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"sample {name!r} contains non-finite values")
    return arr


def _batch_stats(v: np.ndarray):
    """Moments of each row of `v`: (mean, variance, skew, kurt, degenerate).

    Rows flagged degenerate are constant; their skew/kurt entries are
    placeholders and must be ignored by the caller.
    """
    mu = v.mean(axis=1)
    const = v.min(axis=1) == v.max(axis=1)
    d = v - mu[:, None]
    dd = d * d
    m2 = np.where(const, 0.0, dd.mean(axis=1))
    m3 = (dd * d).mean(axis=1)
    m4 = (dd * dd).mean(axis=1)
    degenerate = const | (m2 == 0.0)
    safe = np.where(degenerate, 1.0, m2)
    skew = m3 / safe**1.5
    kurt = m4 / (safe * safe) - 3.0
    return mu, m2, skew, kurt, degenerate


def _batch_diffs(stats1, stats2):
    """Absolute per-statistic differences plus undefined-row masks."""
    mu1, v1, sk1, ku1, de1 = stats1
    mu2, v2, sk2, ku2, de2 = stats2
    diffs = {
        "mean": np.abs(mu1 - mu2),
        "variance": np.abs(v1 - v2),
        "skewness": np.abs(sk1 - sk2),
        "kurtosis": np.abs(ku1 - ku2),
    }
    zeros = np.zeros(mu1.shape, dtype=bool)
    undefined = {
        "mean": zeros,
        "variance": de1 & de2,
        "skewness": de1 | de2,
        "kurtosis": de1 | de2,
    }
    return diffs, undefined


class _PairSetup:
    """Shared preparation for both engines.

    The pooled values are sorted (a canonical representation of the pair,
    so argument order cannot influence the permutation stream) and the
    observed assignment is expressed as index rows into that pool; the
    observed differences are then computed through the same batched code
    path as the relabeled ones.
    """

    def __init__(self, a: np.ndarray, b: np.ndarray):
        raw = np.concatenate([a, b])
        order = np.argsort(raw, kind="stable")
        inverse = np.empty(raw.size, dtype=np.int64)
        inverse[order] = np.arange(raw.size, dtype=np.int64)
        pos_a = np.sort(inverse[: a.size])
        pos_b = np.sort(inverse[a.size :])
        if a.size <= b.size:
            first, second = pos_a, pos_b
        else:
            first, second = pos_b, pos_a
        self.pool = raw[order]
        self.n1 = int(first.size)
        self.n_total = int(raw.size)

        diffs, undefined = _batch_diffs(
            _batch_stats(self.pool[first][None, :]),
            _batch_stats(self.pool[second][None, :]),
        )
        self.observed_first = first
        self.observed = {s: float(diffs[s][0]) for s in STATISTICS}
        skipped = [s for s in STATISTICS if bool(undefined[s][0])]
        self.skipped = tuple(skipped)
        self.tested = tuple(s for s in STATISTICS if s not in skipped)

    def batch_rows(self) -> int:
        return max(1, min(1024, _BATCH_ELEMENTS // max(self.n_total, 1)))

    def count_extremes(self, idx1: np.ndarray, idx2: np.ndarray, counts: dict) -> None:
        diffs, undefined = _batch_diffs(
            _batch_stats(self.pool[idx1]), _batch_stats(self.pool[idx2])
        )
        for s in self.tested:
            counts[s] += int((undefined[s] | (diffs[s] >= self.observed[s])).sum())


def _philox_key(seed: int) -> int:
    words = np.random.SeedSequence(seed).generate_state(2, np.uint64)
    return int(words[0]) | (int(words[1]) << 64)


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) <= MAX_SEED:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def observed_diffs(a, b) -> tuple[dict[str, float], tuple[str, ...]]:
    """Absolute per-statistic differences |s(a) - s(b)|.

    Returns (diffs, skipped): `diffs` maps each tested statistic to its
    observed absolute difference, `skipped` names the statistics excluded
    because they are undefined in one of the samples.
    """
    a = _validate_sample(a, "a")
    b = _validate_sample(b, "b")
    setup = _PairSetup(a, b)
    return {s: setup.observed[s] for s in setup.tested}, setup.skipped


def permutation_test(
    a,
    b,
    l: int,
    seed: int,
    group_a: str = "a",
    group_b: str = "b",
) -> PermutationResult:
    """Randomized permutation test with `l` relabelings.

    p-values use the add-one estimator (1 + extreme) / (1 + l), which can
    never return zero and converges to the tail fraction as l grows.
    """
    if l < 1:
        raise ConfigError(f"the number of permutations must be >= 1, got {l}")
    seed = _check_seed(seed)
    a = _validate_sample(a, group_a)
    b = _validate_sample(b, group_b)
    setup = _PairSetup(a, b)
    key = _philox_key(seed)
    n, n1 = setup.n_total, setup.n1

    counts = {s: 0 for s in setup.tested}
    batch = setup.batch_rows()
    idx1 = np.empty((batch, n1), dtype=np.int64)
    idx2 = np.empty((batch, n - n1), dtype=np.int64)
    done = 0
    while done < l:
        rows = min(batch, l - done)
        for r in range(rows):
            bitgen = np.random.Philox(key=key, counter=(done + r) << 128)
            perm = np.random.Generator(bitgen).permutation(n)
            idx1[r] = perm[:n1]
            idx2[r] = perm[n1:]
        setup.count_extremes(idx1[:rows], idx2[:rows], counts)
        done += rows

    p_values = {s: (1 + counts[s]) / (1 + l) for s in setup.tested}
    return PermutationResult(
        group_a=group_a,
        group_b=group_b,
        n_a=int(a.size),
        n_b=int(b.size),
        observed_a=moment_set(np.sort(a)),
        observed_b=moment_set(np.sort(b)),
        diffs={s: setup.observed[s] for s in setup.tested},
        p_values=p_values,
        skipped=setup.skipped,
        l=l,
        seed=seed,
        exact=False,
    )


def assignment_count(n_a: int, n_b: int) -> int:
    """Number of distinct splits of n_a + n_b pooled values into the two sizes."""
    return math.comb(n_a + n_b, n_a)


def exact_permutation_test(
    a,
    b,
    max_assignments: int = DEFAULT_MAX_ASSIGNMENTS,
    group_a: str = "a",
    group_b: str = "b",
) -> PermutationResult:
    """Exact permutation test by full enumeration of distinct assignments.

    p-values are tail fractions over all C(n_a + n_b, n_a) assignments;
    the observed assignment is a member of the enumeration, so no p-value
    can be zero.
    """
    a = _validate_sample(a, group_a)
    b = _validate_sample(b, group_b)
    total = assignment_count(a.size, b.size)
    if total > max_assignments:
        raise DataError(
            f"exact enumeration needs {total} assignments which exceeds "
            f"max_assignments={max_assignments}; use the randomized test"
        )
    setup = _PairSetup(a, b)
    n, n1 = setup.n_total, setup.n1

    counts = {s: 0 for s in setup.tested}
    batch = setup.batch_rows()
    combos = itertools.combinations(range(n), n1)
    row_ids = np.arange(batch)[:, None]
    while True:
        chunk = list(itertools.islice(combos, batch))
        if not chunk:
            break
        idx1 = np.asarray(chunk, dtype=np.int64)
        rows = idx1.shape[0]
        keep = np.ones((rows, n), dtype=bool)
        keep[row_ids[:rows], idx1] = False
        idx2 = np.nonzero(keep)[1].reshape(rows, n - n1)
        setup.count_extremes(idx1, idx2, counts)

    p_values = {s: counts[s] / total for s in setup.tested}
    return PermutationResult(
        group_a=group_a,
        group_b=group_b,
        n_a=int(a.size),
        n_b=int(b.size),
        observed_a=moment_set(np.sort(a)),
        observed_b=moment_set(np.sort(b)),
        diffs={s: setup.observed[s] for s in setup.tested},
        p_values=p_values,
        skipped=setup.skipped,
        l=total,
        seed=None,
        exact=True,
    )
