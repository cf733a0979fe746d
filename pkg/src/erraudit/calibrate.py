"""Monte Carlo calibration of the audit pipeline on synthetic groups.

Measures the type-I error rate (identical generators) and power (shifted
or reshaped generators) of the full two-stage audit. Each trial draws
fresh group samples, feeds them through run_audit in equal-outcome mode
(the draws are treated as the quantity under test directly) and records
the verdict. Trial t uses the substream [seed, t], so any subset of
trials is reproducible in isolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audit import AuditConfig, run_audit
from .exceptions import ConfigError
from .metrics import ErrorMetric

FAMILIES = ("normal", "lognormal", "uniform", "student_t")


@dataclass(frozen=True)
class GroupSpec:
    """One synthetic group: value = loc + scale * draw(family, shape)."""

    family: str = "normal"
    loc: float = 0.0
    scale: float = 1.0
    shape: float | None = None  # sigma of the log for lognormal, df for student_t
    size: int = 100

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not self.scale > 0:
            raise ConfigError("scale must be positive")
        if self.size < 1:
            raise ConfigError("group size must be >= 1")
        if self.family == "student_t" and not (self.shape or 0) > 0:
            raise ConfigError("student_t needs shape (degrees of freedom) > 0")

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        if self.family == "normal":
            draw = rng.standard_normal(self.size)
        elif self.family == "lognormal":
            draw = rng.lognormal(0.0, self.shape or 1.0, self.size)
        elif self.family == "uniform":
            draw = rng.uniform(0.0, 1.0, self.size)
        else:
            draw = rng.standard_t(self.shape, self.size)
        return self.loc + self.scale * draw


@dataclass(frozen=True)
class GeneratorSpec:
    groups: tuple[GroupSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "groups", tuple(self.groups))
        if len(self.groups) < 2:
            raise ConfigError("a calibration spec needs at least two groups")


def two_group_spec(
    family: str = "normal",
    shift: float = 0.0,
    n: int = 100,
    scale: float = 1.0,
    shape: float | None = None,
) -> GeneratorSpec:
    """Convenience spec: two same-family groups, the second mean-shifted."""
    return GeneratorSpec(
        groups=(
            GroupSpec(family=family, loc=0.0, scale=scale, shape=shape, size=n),
            GroupSpec(family=family, loc=shift, scale=scale, shape=shape, size=n),
        )
    )


@dataclass(frozen=True)
class TrialOutcome:
    reject: bool
    a2: float
    t: float
    p_value: float
    # pair label -> statistic -> p-value; None when the omnibus test did not reject
    posthoc_p: dict[str, dict[str, float]] | None


def simulate_rejection_rate(
    spec: GeneratorSpec,
    trials: int,
    alpha: float,
    l: int,
    seed: int,
    tie_mode: str = "midrank",
) -> tuple[float, tuple[TrialOutcome, ...]]:
    """Rejection rate of the audit over independent synthetic trials.

    Returns (rate, per-trial outcomes). Deterministic for a fixed seed.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    labels = np.concatenate(
        [np.full(g.size, f"g{i}") for i, g in enumerate(spec.groups)]
    )
    outcomes = []
    for trial in range(trials):
        data_rng = np.random.default_rng(np.random.SeedSequence([seed, trial, 0]))
        audit_seed = int(
            np.random.SeedSequence([seed, trial, 1]).generate_state(1, np.uint64)[0]
        )
        values = np.concatenate([g.sample(data_rng) for g in spec.groups])
        config = AuditConfig(
            metric=ErrorMetric.IDENTITY,
            alpha=alpha,
            permutations=l,
            seed=audit_seed,
            tie_mode=tie_mode,
            min_group_size=1,
        )
        report = run_audit(values, np.zeros_like(values), labels, config)
        posthoc_p = None
        if report.posthoc:
            posthoc_p = {
                f"{e.result.group_a}|{e.result.group_b}": dict(e.result.p_values)
                for e in report.posthoc
            }
        outcomes.append(
            TrialOutcome(
                reject=report.ad.reject,
                a2=report.ad.a2,
                t=report.ad.t,
                p_value=report.ad.p_value,
                posthoc_p=posthoc_p,
            )
        )
    rate = sum(o.reject for o in outcomes) / trials
    return rate, tuple(outcomes)
