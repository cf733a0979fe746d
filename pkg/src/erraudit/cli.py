"""Command-line front end.

Subcommands: `audit` runs the full methodology on a CSV and writes a JSON
or markdown report, `simulate` measures rejection rates on synthetic
groups, `exact` runs the small-sample enumeration test.

Exit codes: 0 success, 1 unfair verdict under --fail-on-unfair, 2 usage or
configuration error, 3 data error (parse failure, missing column,
degenerate input).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .adtest import tabulated_alphas
from .audit import AuditConfig, intersect_labels, partition_errors, run_audit
from .calibrate import FAMILIES, simulate_rejection_rate, two_group_spec
from .exceptions import ConfigError, DataError
from .ingest import CsvSchema, derive_binary_labels, filter_min_truth, load_csv
from .metrics import ErrorMetric, compute_errors
from .permtest import exact_permutation_test
from .report import export_distribution_data, render_report, report_to_dict

METRIC_NAMES = {
    "difference": ErrorMetric.DIFFERENCE,
    "absolute": ErrorMetric.ABSOLUTE,
    "squared-signed": ErrorMetric.SQUARED_SIGNED,
    "squared": ErrorMetric.SQUARED,
    "percentage": ErrorMetric.PERCENTAGE,
    "symmetric-percentage": ErrorMetric.SYMMETRIC_PERCENTAGE,
    "identity": ErrorMetric.IDENTITY,
}

PLOT_BINS = 50


@dataclass(frozen=True)
class ThresholdSpec:
    column: str
    threshold: float
    above: str
    below: str


def _parse_threshold(text: str) -> ThresholdSpec:
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError(
            f"--label-threshold expects <column>:<threshold>:<above>:<below>, got {text!r}"
        )
    column, raw, above, below = parts
    try:
        threshold = float(raw)
    except ValueError:
        raise ConfigError(f"--label-threshold threshold {raw!r} is not a number") from None
    if not column or not above or not below:
        raise ConfigError("--label-threshold column and labels must be nonempty")
    return ThresholdSpec(column, threshold, above, below)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="erraudit",
        description="Audit whether a regression model's errors are distributed "
        "identically across sensitive groups.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    audit = sub.add_parser("audit", help="audit a CSV of predictions and truths")
    audit.add_argument("--input", required=True, help="input CSV path")
    audit.add_argument("--pred-col", action="append", required=True,
                       help="prediction column (repeat for several models)")
    audit.add_argument("--truth-col", required=True, help="ground-truth column")
    audit.add_argument("--group-col", action="append", default=[],
                       help="sensitive label column (repeatable)")
    audit.add_argument("--intersect", action="store_true",
                       help="also audit the intersection of all groupings")
    audit.add_argument("--metric", choices=sorted(METRIC_NAMES), default="percentage")
    audit.add_argument("--alpha", type=float, choices=list(tabulated_alphas()),
                       default=0.01)
    audit.add_argument("--permutations", type=int, default=100_000)
    audit.add_argument("--seed", type=int, default=42)
    audit.add_argument("--min-truth", type=float, default=None,
                       help="drop rows whose truth value is below this")
    audit.add_argument("--label-threshold", action="append", default=[],
                       metavar="COL:T:ABOVE:BELOW",
                       help="derive binary labels from a numeric column")
    audit.add_argument("--correction", choices=["none", "holm", "bonferroni"],
                       default="none")
    audit.add_argument("--format", choices=["json", "markdown"], default="json")
    audit.add_argument("--plot-data", default=None,
                       help="write per-group histogram/ECDF CSV here")
    audit.add_argument("--clip", type=float, default=None,
                       help="exclude errors above this value from plot data")
    audit.add_argument("--fail-on-unfair", action="store_true",
                       help="exit 1 when any audit's verdict is unfair")
    audit.add_argument("--threads", type=int, default=1,
                       help="bound pair-level parallelism (never affects results)")
    audit.add_argument("--output", required=True, help="report path")
    audit.set_defaults(func=cmd_audit)

    simulate = sub.add_parser("simulate", help="Monte Carlo calibration run")
    simulate.add_argument("--family", choices=list(FAMILIES), default="normal")
    simulate.add_argument("--shift", type=float, default=0.0,
                          help="location shift of the second group")
    simulate.add_argument("--n", type=int, default=100, help="per-group sample size")
    simulate.add_argument("--trials", type=int, default=1000)
    simulate.add_argument("--alpha", type=float, choices=list(tabulated_alphas()),
                          default=0.05)
    simulate.add_argument("--permutations", type=int, default=1000)
    simulate.add_argument("--seed", type=int, default=42)
    simulate.set_defaults(func=cmd_simulate)

    exact = sub.add_parser("exact", help="exact enumeration test for small samples")
    exact.add_argument("--input", required=True)
    exact.add_argument("--pred-col", required=True)
    exact.add_argument("--truth-col", required=True)
    exact.add_argument("--group-col", default=None)
    exact.add_argument("--label-threshold", default=None, metavar="COL:T:ABOVE:BELOW")
    exact.add_argument("--metric", choices=sorted(METRIC_NAMES), default="percentage")
    exact.add_argument("--min-group-size", type=int, default=1)
    exact.add_argument("--max-assignments", type=int, default=1_000_000)
    exact.add_argument("--output", default=None, help="JSON path (default: stdout)")
    exact.set_defaults(func=cmd_exact)
    return parser


def _groupings(dataset, group_cols, thresholds, intersect):
    groupings: dict[str, object] = {}
    for col in group_cols:
        groupings[col] = dataset.labels[col]
    for spec in thresholds:
        groupings[spec.column] = derive_binary_labels(
            dataset.numeric[spec.column], spec.threshold, spec.above, spec.below
        )
    if intersect and len(groupings) >= 2:
        name = "|".join(groupings)
        groupings[name] = intersect_labels(list(groupings.values()))
    return groupings


def _plot_path(base: str, model: str, grouping: str, multiple: bool) -> Path:
    path = Path(base)
    if not multiple:
        return path
    safe = f"{model}.{grouping}".replace("/", "_").replace("|", "+")
    return path.with_name(f"{path.stem}.{safe}{path.suffix or '.csv'}")


def cmd_audit(args) -> int:
    thresholds = [_parse_threshold(t) for t in args.label_threshold]
    if not args.group_col and not thresholds:
        raise ConfigError("provide at least one --group-col or --label-threshold")
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    schema = CsvSchema(
        pred=tuple(args.pred_col),
        truth=args.truth_col,
        labels=tuple(args.group_col),
        numeric=tuple(t.column for t in thresholds),
    )
    dataset = load_csv(args.input, schema)
    data_warnings: list[str] = []
    if args.min_truth is not None:
        dataset, removed = filter_min_truth(dataset, args.min_truth)
        data_warnings.append(
            f"removed {removed} rows with {args.truth_col} < {args.min_truth}"
        )
        if dataset.n == 0:
            raise DataError("the --min-truth filter removed every row")

    groupings = _groupings(dataset, args.group_col, thresholds, args.intersect)
    config = AuditConfig(
        metric=METRIC_NAMES[args.metric],
        alpha=args.alpha,
        permutations=args.permutations,
        seed=args.seed,
        correction=args.correction,
    )

    audits = []
    any_unfair = False
    multiple = len(args.pred_col) * len(groupings) > 1
    for model in args.pred_col:
        for gname, glabels in groupings.items():
            report = run_audit(
                dataset.pred[model], dataset.truth, glabels, config,
                threads=args.threads,
            )
            any_unfair = any_unfair or report.verdict == "unfair"
            audits.append((model, gname, report))
            if args.plot_data:
                errors = compute_errors(dataset.pred[model], dataset.truth, config.metric)
                grouped, _ = partition_errors(errors, glabels, config.min_group_size)
                csv_text = export_distribution_data(
                    grouped, bins=PLOT_BINS, clip=args.clip
                )
                _plot_path(args.plot_data, model, gname, multiple).write_text(
                    csv_text, encoding="utf-8"
                )

    if args.format == "json":
        doc = {
            "input": args.input,
            "warnings": data_warnings,
            "audits": [
                {"model": model, "grouping": gname, "report": report_to_dict(report)}
                for model, gname, report in audits
            ],
        }
        content = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    else:
        sections = []
        for model, gname, report in audits:
            sections.append(f"# Audit: {model} by {gname}\n")
            sections.append(render_report(report, "markdown").content)
        if data_warnings:
            sections.append("# Dataset warnings\n")
            sections.extend(f"- {w}\n" for w in data_warnings)
        content = "\n".join(sections)
    Path(args.output).write_text(content, encoding="utf-8")

    if any_unfair and args.fail_on_unfair:
        return 1
    return 0


def cmd_simulate(args) -> int:
    spec = two_group_spec(family=args.family, shift=args.shift, n=args.n)
    rate, outcomes = simulate_rejection_rate(
        spec, args.trials, args.alpha, args.permutations, args.seed
    )
    doc = {
        "family": args.family,
        "shift": args.shift,
        "n": args.n,
        "trials": args.trials,
        "alpha": args.alpha,
        "permutations": args.permutations,
        "seed": args.seed,
        "rejection_rate": rate,
        "rejecting_trials": sum(o.reject for o in outcomes),
        "mean_a2": sum(o.a2 for o in outcomes) / len(outcomes),
    }
    print(json.dumps(doc, indent=2))
    return 0


def cmd_exact(args) -> int:
    threshold = _parse_threshold(args.label_threshold) if args.label_threshold else None
    if (args.group_col is None) == (threshold is None):
        raise ConfigError("provide exactly one of --group-col or --label-threshold")
    schema = CsvSchema(
        pred=(args.pred_col,),
        truth=args.truth_col,
        labels=(args.group_col,) if args.group_col else (),
        numeric=(threshold.column,) if threshold else (),
    )
    dataset = load_csv(args.input, schema)
    if threshold:
        labels = derive_binary_labels(
            dataset.numeric[threshold.column], threshold.threshold,
            threshold.above, threshold.below,
        )
    else:
        labels = dataset.labels[args.group_col]
    errors = compute_errors(
        dataset.pred[args.pred_col], dataset.truth, METRIC_NAMES[args.metric]
    )
    grouped, warnings = partition_errors(errors, labels, args.min_group_size)
    if grouped.k < 2:
        raise DataError("exact testing needs at least two groups")
    names = grouped.labels()
    pairs = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            res = exact_permutation_test(
                grouped.groups[names[i]],
                grouped.groups[names[j]],
                max_assignments=args.max_assignments,
                group_a=names[i],
                group_b=names[j],
            )
            pairs.append(
                {
                    "group_a": res.group_a,
                    "group_b": res.group_b,
                    "n_a": res.n_a,
                    "n_b": res.n_b,
                    "assignments": res.l,
                    "diffs": dict(res.diffs),
                    "p_values": dict(res.p_values),
                    "skipped": list(res.skipped),
                }
            )
    doc = {"input": args.input, "metric": args.metric, "warnings": warnings,
           "pairs": pairs}
    content = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if args.output:
        Path(args.output).write_text(content, encoding="utf-8")
    else:
        sys.stdout.write(content)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
