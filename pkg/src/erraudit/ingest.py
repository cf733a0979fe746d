"""Loading delimited prediction/truth/group data.

Files are UTF-8, headered, comma-delimited by default. Numeric cells must
parse as finite decimal reals; rows with missing or unparseable required
cells are rejected with the offending row and column named, never imputed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError


@dataclass(frozen=True)
class CsvSchema:
    """Column roles for load_csv.

    `numeric` names additional real-valued columns (e.g. a population
    proportion used to derive binary labels); everything not named is
    carried verbatim as text in `aux`.
    """

    pred: tuple[str, ...]
    truth: str
    labels: tuple[str, ...] = ()
    numeric: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "pred", tuple(self.pred))
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "numeric", tuple(self.numeric))
        if not self.pred:
            raise DataError("schema needs at least one prediction column")
        if not self.truth:
            raise DataError("schema needs a truth column")
        if not self.labels and not self.numeric:
            raise DataError("schema needs at least one label or label-source column")


@dataclass(frozen=True)
class Dataset:
    """Aligned columns of one audit input file.

    Prediction and truth columns are finite float vectors; label columns
    are text; `numeric` holds declared real-valued non-model columns and
    `aux` carries every remaining column untouched.
    """

    pred: dict[str, np.ndarray]
    truth: np.ndarray
    labels: dict[str, np.ndarray]
    numeric: dict[str, np.ndarray] = field(default_factory=dict)
    aux: dict[str, tuple[str, ...]] = field(default_factory=dict)
    column_order: tuple[str, ...] = ()
    truth_column: str = "truth"

    @property
    def n(self) -> int:
        return int(self.truth.size)


def _parse_number(cell: str, column: str, row: int) -> float:
    text = cell.strip()
    if not text:
        raise DataError(f"empty cell in required column '{column}' at data row {row}")
    try:
        value = float(text)
    except ValueError:
        raise DataError(
            f"cannot parse '{text}' as a number in column '{column}' at data row {row}"
        ) from None
    if not math.isfinite(value):
        raise DataError(
            f"non-finite value '{text}' in column '{column}' at data row {row}"
        )
    return value


def load_csv(path, schema: CsvSchema, delimiter: str = ",") -> Dataset:
    """Load a headered delimited file according to `schema`.

    Row indices in error messages are 0-based over data rows (the header
    is row -1, so to speak). Raises DataError for a missing column, an
    empty file, or any unparseable required cell.
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh, delimiter=delimiter))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    data = rows[1:]
    if not data:
        raise DataError(f"{path} has a header but no data rows")

    index = {}
    for pos, name in enumerate(header):
        if name in index:
            raise DataError(f"duplicate column '{name}' in {path}")
        index[name] = pos
    required = (*schema.pred, schema.truth, *schema.labels, *schema.numeric)
    missing = [c for c in required if c not in index]
    if missing:
        raise DataError(f"{path} is missing column(s): {', '.join(missing)}")

    width = len(header)
    for r, row in enumerate(data):
        if len(row) != width:
            raise DataError(
                f"data row {r} has {len(row)} cells, expected {width}"
            )

    def number_column(name: str) -> np.ndarray:
        pos = index[name]
        return np.array(
            [_parse_number(row[pos], name, r) for r, row in enumerate(data)]
        )

    def text_column(name: str) -> np.ndarray:
        pos = index[name]
        out = []
        for r, row in enumerate(data):
            cell = row[pos].strip()
            if not cell:
                raise DataError(
                    f"empty cell in required column '{name}' at data row {r}"
                )
            out.append(cell)
        return np.array(out, dtype=str)

    typed = set(required)
    return Dataset(
        pred={c: number_column(c) for c in schema.pred},
        truth=number_column(schema.truth),
        labels={c: text_column(c) for c in schema.labels},
        numeric={c: number_column(c) for c in schema.numeric},
        aux={
            c: tuple(row[index[c]].strip() for row in data)
            for c in header
            if c not in typed
        },
        column_order=tuple(header),
        truth_column=schema.truth,
    )


def serialize_csv(dataset: Dataset, delimiter: str = ",") -> str:
    """Render a Dataset back to delimited text, preserving column order.

    Numeric cells use repr, so reloading reproduces every value bit-exactly.
    """
    columns: dict[str, list[str]] = {}
    for name, values in dataset.pred.items():
        columns[name] = [repr(float(v)) for v in values]
    columns[dataset.truth_column] = [repr(float(v)) for v in dataset.truth]
    for name, values in dataset.labels.items():
        columns[name] = [str(v) for v in values]
    for name, values in dataset.numeric.items():
        columns[name] = [repr(float(v)) for v in values]
    for name, values in dataset.aux.items():
        columns[name] = list(values)
    order = dataset.column_order or tuple(columns)
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(order)
    for r in range(dataset.n):
        writer.writerow([columns[name][r] for name in order])
    return buf.getvalue()


def derive_binary_labels(
    values, threshold: float, above_label: str, at_or_below_label: str
) -> np.ndarray:
    """Label each value by strict comparison against a threshold."""
    arr = np.asarray(values, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise DataError("threshold labeling requires finite values")
    return np.where(arr > threshold, above_label, at_or_below_label).astype(str)


def filter_min_truth(dataset: Dataset, min_truth: float) -> tuple[Dataset, int]:
    """Drop rows whose truth value is below `min_truth`.

    Returns (filtered dataset, number of removed rows). Pass -inf to
    disable filtering. The empty result is allowed; downstream validation
    rejects it with a clear message.
    """
    keep = dataset.truth >= min_truth
    removed = int(dataset.n - keep.sum())
    if removed == 0:
        return dataset, 0
    kept_rows = np.flatnonzero(keep)
    return (
        Dataset(
            pred={c: v[keep] for c, v in dataset.pred.items()},
            truth=dataset.truth[keep],
            labels={c: v[keep] for c, v in dataset.labels.items()},
            numeric={c: v[keep] for c, v in dataset.numeric.items()},
            aux={
                c: tuple(v[i] for i in kept_rows) for c, v in dataset.aux.items()
            },
            column_order=dataset.column_order,
            truth_column=dataset.truth_column,
        ),
        removed,
    )
