"""Rendering audit reports as JSON or markdown, plus plot-data export.

JSON output is byte-stable: keys are emitted in a fixed order and floats
use repr, so identical reports serialize identically and every numeric
field survives a parse round-trip exactly. The markdown table mirrors the
JSON significance flags one-to-one (bold = significant) and renders
ratio-valued metrics as percentages; the spread column shows the standard
deviation so it shares the mean's unit.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np

from .audit import AuditReport, GroupedErrors
from .exceptions import ConfigError, DataError
from .moments import MomentSet

FORMATS = ("json", "markdown")


@dataclass(frozen=True)
class ReportDocument:
    format: str
    content: str


def _moments_dict(m: MomentSet) -> dict:
    return m.as_dict()


def report_to_dict(report: AuditReport) -> dict:
    """Plain-python representation with a fixed key order."""
    return {
        "config": report.config.as_dict(),
        "groups": {
            label: {
                "n": s.n,
                "mean": s.moments.mean,
                "variance": s.moments.variance,
                "skewness": s.moments.skewness,
                "kurtosis": s.moments.kurtosis,
                "mean_abs_error": s.mean_abs_error,
            }
            for label, s in report.groups.items()
        },
        "ad_test": {
            "a2": report.ad.a2,
            "sigma_n": report.ad.sigma_n,
            "t": report.ad.t,
            "k": report.ad.k,
            "n_total": report.ad.n_total,
            "group_sizes": list(report.ad.group_sizes),
            "p_value": report.ad.p_value,
            "p_floored": report.ad.p_floored,
            "p_capped": report.ad.p_capped,
            "alpha": report.ad.alpha,
            "reject": report.ad.reject,
            "tie_mode": report.ad.tie_mode,
        },
        "verdict": report.verdict,
        "posthoc": [
            {
                "group_a": e.result.group_a,
                "group_b": e.result.group_b,
                "n_a": e.result.n_a,
                "n_b": e.result.n_b,
                "observed": {
                    "a": _moments_dict(e.result.observed_a),
                    "b": _moments_dict(e.result.observed_b),
                },
                "diffs": dict(e.result.diffs),
                "p_values": dict(e.result.p_values),
                "significant": dict(e.significant),
                "skipped": list(e.result.skipped),
                "l": e.result.l,
                "seed": e.result.seed,
                "exact": e.result.exact,
            }
            for e in report.posthoc
        ],
        "warnings": list(report.warnings),
    }


def _fmt(value: float | None, percent: bool = False) -> str:
    if value is None:
        return "n/a"
    if percent:
        return f"{value * 100:.4g}%"
    return f"{value:.4g}"


def _cell(text: str, bold: bool) -> str:
    return f"**{text}**" if bold else text


def _markdown(report: AuditReport) -> str:
    percent = report.config.metric.is_percentage
    ad = report.ad
    lines = []
    lines.append(f"Verdict: **{report.verdict}** "
                 f"(metric: {report.config.metric.value}, alpha: {ad.alpha})")
    lines.append("")
    lines.append("## Omnibus test (k-sample Anderson-Darling)")
    lines.append("")
    p_note = " (capped)" if ad.p_capped else " (floored)" if ad.p_floored else ""
    lines.append(f"- A2 = {_fmt(ad.a2)}, sigma_N = {_fmt(ad.sigma_n)}, T = {_fmt(ad.t)}")
    lines.append(f"- k = {ad.k} groups, N = {ad.n_total} pooled observations")
    lines.append(f"- p = {_fmt(ad.p_value)}{p_note}; "
                 f"{'rejects' if ad.reject else 'fails to reject'} equal error "
                 f"distributions at alpha = {ad.alpha}")
    lines.append("")
    lines.append("## Groups")
    lines.append("")
    lines.append("| group | n | mean abs error | mean | std | skewness | kurtosis |")
    lines.append("| --- | --- | --- | --- | --- | --- | --- |")
    for label, s in report.groups.items():
        std = float(np.sqrt(s.moments.variance))
        lines.append(
            f"| {label} | {s.n} | {_fmt(s.mean_abs_error, percent)} "
            f"| {_fmt(s.moments.mean, percent)} | {_fmt(std, percent)} "
            f"| {_fmt(s.moments.skewness)} | {_fmt(s.moments.kurtosis)} |"
        )
    lines.append("")
    if not report.posthoc:
        lines.append("No post hoc analysis: the omnibus test did not reject.")
    else:
        lines.append("## Post hoc pairwise permutation tests")
        lines.append("")
        lines.append(f"Bold marks a group difference significant at alpha = "
                     f"{report.config.alpha} (correction: {report.config.correction}); "
                     "std is reported instead of variance so it shares the mean's unit.")
        lines.append("")
        lines.append("| pair | mean A | mean B | std A | std B | skew A | skew B | kurt A | kurt B |")
        lines.append("| --- | --- | --- | --- | --- | --- | --- | --- | --- |")
        for entry in report.posthoc:
            r = entry.result
            ma, mb = r.observed_a, r.observed_b
            cells = [f"{r.group_a} vs {r.group_b}"]
            for stat, va, vb, pct in (
                ("mean", ma.mean, mb.mean, percent),
                ("variance", float(np.sqrt(ma.variance)), float(np.sqrt(mb.variance)), percent),
                ("skewness", ma.skewness, mb.skewness, False),
                ("kurtosis", ma.kurtosis, mb.kurtosis, False),
            ):
                flag = entry.significant.get(stat, False)
                cells.append(_cell(_fmt(va, pct), flag))
                cells.append(_cell(_fmt(vb, pct), flag))
            lines.append("| " + " | ".join(cells) + " |")
        lines.append("")
        lines.append("| pair | p mean | p variance | p skewness | p kurtosis |")
        lines.append("| --- | --- | --- | --- | --- |")
        for entry in report.posthoc:
            r = entry.result
            ps = [
                _cell(_fmt(r.p_values[s]), entry.significant.get(s, False))
                if s in r.p_values
                else "skipped"
                for s in ("mean", "variance", "skewness", "kurtosis")
            ]
            lines.append(f"| {r.group_a} vs {r.group_b} | " + " | ".join(ps) + " |")
    if report.warnings:
        lines.append("")
        lines.append("## Warnings")
        lines.append("")
        for w in report.warnings:
            lines.append(f"- {w}")
    return "\n".join(lines) + "\n"


def render_report(report: AuditReport, format: str = "json") -> ReportDocument:
    """Render an AuditReport as a json or markdown document."""
    if format not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}, got {format!r}")
    if format == "json":
        content = json.dumps(report_to_dict(report), indent=2, allow_nan=False) + "\n"
    else:
        content = _markdown(report)
    return ReportDocument(format=format, content=content)


def export_distribution_data(
    grouped: GroupedErrors, bins: int = 50, clip: float | None = None
) -> str:
    """Per-group histogram and ECDF series as CSV text.

    Bin edges are shared across groups and span the retained (non-clipped)
    pooled values. Values above `clip` are excluded from both series; each
    group gets an `excluded` summary row with the excluded count, fraction
    and mean. ECDF fractions are relative to the group's total size, so
    the series ends at the retained fraction (exactly 1.0 with no clip).

    Columns: series,group,x,x_hi,count,fraction
      histogram rows: x/x_hi are the bin edges, count and fraction filled
      ecdf rows:      x is the value, fraction is the cumulative fraction
      excluded rows:  x is the mean of excluded values (empty when none)
    """
    if bins < 2:
        raise ConfigError("bins must be >= 2")
    retained = {}
    excluded = {}
    for label, values in grouped.groups.items():
        v = np.asarray(values, dtype=float)
        if clip is None:
            keep = np.ones(v.size, dtype=bool)
        else:
            keep = v <= clip
        retained[label] = v[keep]
        excluded[label] = v[~keep]
    pooled = np.concatenate(list(retained.values()))
    if pooled.size == 0:
        raise DataError("the clip threshold excludes every value")
    lo, hi = float(pooled.min()), float(pooled.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)

    buf = io.StringIO()
    buf.write("series,group,x,x_hi,count,fraction\n")
    for label, values in grouped.groups.items():
        total = int(np.asarray(values).size)
        counts, _ = np.histogram(retained[label], bins=edges)
        for i, c in enumerate(counts):
            buf.write(
                f"histogram,{label},{edges[i]!r},{edges[i + 1]!r},{int(c)},{int(c) / total!r}\n"
            )
        kept_sorted = np.sort(retained[label])
        distinct, last_index = np.unique(kept_sorted, return_index=True)
        # right-continuous ECDF: at each distinct value, the fraction <= it
        cumulative = np.concatenate((last_index[1:], [kept_sorted.size]))
        for x, c in zip(distinct, cumulative):
            buf.write(f"ecdf,{label},{float(x)!r},,{int(c)},{int(c) / total!r}\n")
        n_exc = int(excluded[label].size)
        mean_exc = repr(float(excluded[label].mean())) if n_exc else ""
        buf.write(f"excluded,{label},{mean_exc},,{n_exc},{n_exc / total!r}\n")
    return buf.getvalue()
