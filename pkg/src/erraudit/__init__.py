"""Group-fairness auditing for regression models.

Tests whether a model's prediction errors are distributed identically
across sensitive groups: a k-sample Anderson-Darling omnibus test decides
fair/unfair, and on rejection pairwise permutation tests on the first four
moments locate and characterize the disparity.
"""

from .adtest import (
    AdTestResult,
    ad_pvalue,
    ad_statistic,
    ad_test,
    critical_value,
    tabulated_alphas,
)
from .audit import (
    AuditConfig,
    AuditReport,
    GroupedErrors,
    GroupSummary,
    PosthocEntry,
    intersect_labels,
    partition_errors,
    run_audit,
    significance_flags,
)
from .calibrate import (
    GeneratorSpec,
    GroupSpec,
    TrialOutcome,
    simulate_rejection_rate,
    two_group_spec,
)
from .exceptions import ConfigError, DataError
from .ingest import (
    CsvSchema,
    Dataset,
    derive_binary_labels,
    filter_min_truth,
    load_csv,
    serialize_csv,
)
from .metrics import ErrorMetric, ErrorVector, compute_errors
from .moments import STATISTICS, MomentSet, moment_set
from .permtest import (
    PermutationResult,
    assignment_count,
    exact_permutation_test,
    observed_diffs,
    permutation_test,
)
from .report import ReportDocument, export_distribution_data, render_report, report_to_dict

__version__ = "0.1.0"

__all__ = [
    "AdTestResult",
    "AuditConfig",
    "AuditReport",
    "ConfigError",
    "CsvSchema",
    "DataError",
    "Dataset",
    "ErrorMetric",
    "ErrorVector",
    "GeneratorSpec",
    "GroupSpec",
    "GroupSummary",
    "GroupedErrors",
    "MomentSet",
    "PermutationResult",
    "PosthocEntry",
    "ReportDocument",
    "STATISTICS",
    "TrialOutcome",
    "ad_pvalue",
    "ad_statistic",
    "ad_test",
    "assignment_count",
    "compute_errors",
    "critical_value",
    "derive_binary_labels",
    "exact_permutation_test",
    "export_distribution_data",
    "filter_min_truth",
    "intersect_labels",
    "load_csv",
    "moment_set",
    "observed_diffs",
    "partition_errors",
    "permutation_test",
    "render_report",
    "report_to_dict",
    "run_audit",
    "serialize_csv",
    "significance_flags",
    "simulate_rejection_rate",
    "tabulated_alphas",
    "two_group_spec",
]
