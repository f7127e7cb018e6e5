"""Dataset ingestion, splitting, and validation against published stats.

Two on-disk formats are supported:

* ARFF in the MULAN/KEEL multi-label convention: ``@relation``,
  ``@attribute <name> <numeric|{v1,v2,...}>``, ``@data``, dense or sparse
  (``{index value, ...}``) rows, ``%`` comments, case-insensitive keywords.
  The trailing (or leading) ``label_count`` attributes are the labels and
  must be binary.
* Plain delimited text (UTF-8, configurable single-character delimiter)
  whose last ``label_count`` columns are binary labels; a non-numeric
  first row is treated as a header.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from ._validation import as_label_matrix, as_matrix
from .errors import DataFormatError, ParseError
from .metrics import DatasetStats, dataset_stats


@dataclass(frozen=True)
class MultiLabelDataset:
    """Feature matrix paired with a binary label matrix.

    ``source_feature_count`` is the number of feature attributes in the
    source file before any one-hot expansion; published dataset tables
    count attributes that way.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    label_names: tuple[str, ...]
    name: str = ""
    source_feature_count: int | None = None

    def __post_init__(self):
        features = as_matrix(self.features, "features")
        labels = as_label_matrix(self.labels, "labels")
        if features.shape[0] != labels.shape[0]:
            raise ValueError(
                f"features have {features.shape[0]} rows but labels have "
                f"{labels.shape[0]}"
            )
        if len(self.feature_names) != features.shape[1]:
            raise ValueError("feature_names length does not match feature columns")
        if len(self.label_names) != labels.shape[1]:
            raise ValueError("label_names length does not match label columns")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "label_names", tuple(self.label_names))
        if self.source_feature_count is None:
            object.__setattr__(self, "source_feature_count", features.shape[1])

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_labels(self) -> int:
        return self.labels.shape[1]

    def stats(self) -> DatasetStats:
        return dataset_stats(self.labels, self.source_feature_count)


def subset(dataset: MultiLabelDataset, indices, name: str | None = None) -> MultiLabelDataset:
    """Row subset of a dataset (copying, order taken from ``indices``)."""
    idx = np.asarray(indices, dtype=np.intp)
    return replace(
        dataset,
        features=dataset.features[idx].copy(),
        labels=dataset.labels[idx].copy(),
        name=dataset.name if name is None else name,
    )


class _ArffAttribute:
    __slots__ = ("name", "kind", "values")

    def __init__(self, name, kind, values=None):
        self.name = name
        self.kind = kind  # "numeric" or "nominal"
        self.values = values  # tuple of nominal values, in declared order


def _strip_quotes(token: str) -> str:
    token = token.strip()
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "'\"":
        return token[1:-1]
    return token


def _parse_attribute(rest: str, path, lineno) -> _ArffAttribute:
    rest = rest.strip()
    if not rest:
        raise ParseError("@attribute without a name", path, lineno)
    if rest[0] in "'\"":
        quote = rest[0]
        end = rest.find(quote, 1)
        if end < 0:
            raise ParseError("unterminated quoted attribute name", path, lineno)
        name = rest[1:end]
        type_part = rest[end + 1 :].strip()
    else:
        split = rest.split(None, 1)
        if len(split) != 2:
            raise ParseError("@attribute needs a name and a type", path, lineno)
        name, type_part = split[0], split[1].strip()
    if not type_part:
        raise ParseError(f"attribute {name!r} has no type", path, lineno)
    if type_part.startswith("{"):
        if not type_part.endswith("}"):
            raise ParseError(f"unterminated nominal domain for {name!r}", path, lineno)
        values = tuple(_strip_quotes(v) for v in type_part[1:-1].split(","))
        if any(not v for v in values):
            raise ParseError(f"empty nominal value in {name!r}", path, lineno)
        return _ArffAttribute(name, "nominal", values)
    if type_part.lower() in ("numeric", "real", "integer"):
        return _ArffAttribute(name, "numeric")
    raise ParseError(
        f"unsupported attribute type {type_part!r} for {name!r}", path, lineno
    )


def _parse_sparse_row(text: str, n_attrs: int, path, lineno) -> list:
    row = ["0"] * n_attrs
    inner = text[1:-1].strip()
    if not inner:
        return row
    for pair in inner.split(","):
        parts = pair.strip().split(None, 1)
        if len(parts) != 2:
            raise ParseError(f"bad sparse entry {pair.strip()!r}", path, lineno)
        try:
            index = int(parts[0])
        except ValueError:
            raise ParseError(f"bad sparse index {parts[0]!r}", path, lineno) from None
        if not 0 <= index < n_attrs:
            raise ParseError(f"sparse index {index} out of range", path, lineno)
        row[index] = _strip_quotes(parts[1])
    return row


def load_arff(path, label_count: int, labels_at_end: bool = True, name: str | None = None) -> MultiLabelDataset:
    """Load a MULAN/KEEL-convention multi-label ARFF file.

    The last ``label_count`` attributes (first, with ``labels_at_end`` off)
    form the label matrix; they must be numeric 0/1 or nominal with domain
    within {0, 1}. Remaining numeric attributes become features and nominal
    ones are one-hot expanded. Missing numeric values (``?``) are imputed
    with the attribute mean; a missing nominal value expands to all zeros.
    """
    if label_count < 1:
        raise ValueError(f"label_count must be >= 1, got {label_count}")
    attributes: list[_ArffAttribute] = []
    rows: list[list] = []
    relation = ""
    in_data = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            if not in_data:
                lowered = line.lower()
                if lowered.startswith("@relation"):
                    relation = _strip_quotes(line[len("@relation") :])
                elif lowered.startswith("@attribute"):
                    attributes.append(
                        _parse_attribute(line[len("@attribute") :], path, lineno)
                    )
                elif lowered.startswith("@data"):
                    if not attributes:
                        raise ParseError("@data before any @attribute", path, lineno)
                    in_data = True
                else:
                    raise ParseError(f"unrecognized header line {line!r}", path, lineno)
                continue
            if line.startswith("{"):
                if not line.endswith("}"):
                    raise ParseError("unterminated sparse row", path, lineno)
                rows.append(_parse_sparse_row(line, len(attributes), path, lineno))
            else:
                values = [_strip_quotes(v) for v in line.split(",")]
                if len(values) != len(attributes):
                    raise ParseError(
                        f"row has {len(values)} values, expected {len(attributes)}",
                        path,
                        lineno,
                    )
                rows.append(values)
    if not in_data:
        raise ParseError("no @data section found", path, None)
    if label_count >= len(attributes):
        raise ValueError(
            f"label_count {label_count} must be smaller than the "
            f"{len(attributes)} attributes"
        )

    if labels_at_end:
        feature_attrs = attributes[:-label_count]
        label_attrs = attributes[-label_count:]
        label_offset = len(feature_attrs)
        feature_offset = 0
    else:
        feature_attrs = attributes[label_count:]
        label_attrs = attributes[:label_count]
        label_offset = 0
        feature_offset = label_count

    n = len(rows)
    labels = np.zeros((n, label_count), dtype=np.int8)
    for j, attr in enumerate(label_attrs):
        if attr.kind == "nominal" and not set(attr.values) <= {"0", "1"}:
            raise DataFormatError(
                f"label attribute {attr.name!r} has non-binary domain {attr.values}",
                path,
            )
        column = [row[label_offset + j] for row in rows]
        for i, cell in enumerate(column):
            if cell == "0":
                continue
            if cell == "1":
                labels[i, j] = 1
            else:
                raise DataFormatError(
                    f"label attribute {attr.name!r} has value {cell!r}, "
                    "expected 0 or 1",
                    path,
                )

    feature_columns: list[np.ndarray] = []
    feature_names: list[str] = []
    for j, attr in enumerate(feature_attrs):
        column = [row[feature_offset + j] for row in rows]
        if attr.kind == "numeric":
            feature_columns.append(_numeric_column(column, attr.name, path))
            feature_names.append(attr.name)
        else:
            for value in attr.values:
                feature_columns.append(
                    np.fromiter(
                        (1.0 if cell == value else 0.0 for cell in column),
                        dtype=np.float64,
                        count=n,
                    )
                )
                feature_names.append(f"{attr.name}={value}")
    features = (
        np.column_stack(feature_columns)
        if feature_columns
        else np.empty((n, 0), dtype=np.float64)
    )

    return MultiLabelDataset(
        features=features,
        labels=labels,
        feature_names=tuple(feature_names),
        label_names=tuple(attr.name for attr in label_attrs),
        name=name or relation,
        source_feature_count=len(feature_attrs),
    )


def _numeric_column(column, attr_name, path) -> np.ndarray:
    out = np.empty(len(column), dtype=np.float64)
    missing = []
    for i, cell in enumerate(column):
        if cell == "?":
            missing.append(i)
            out[i] = np.nan
            continue
        try:
            out[i] = float(cell)
        except ValueError:
            raise DataFormatError(
                f"attribute {attr_name!r} has non-numeric value {cell!r}", path
            ) from None
    if missing:
        present = np.delete(out, missing)
        fill = float(present.mean()) if present.size else 0.0
        out[missing] = fill
    return out


def load_delimited(path, label_count: int, delimiter: str = ",", name: str | None = None) -> MultiLabelDataset:
    """Load a delimited text file whose last ``label_count`` columns are
    binary labels; ``label_count`` 0 loads a feature-only dataset."""
    if label_count < 0:
        raise ValueError(f"label_count must be >= 0, got {label_count}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh, delimiter=delimiter) if row]
    if not rows:
        raise ParseError("file contains no data rows", path)

    header: list[str] | None = None
    if not _all_numeric(rows[0]):
        header = [cell.strip() for cell in rows[0]]
        rows = rows[1:]
        if not rows:
            raise ParseError("file contains only a header row", path)

    width = len(rows[0])
    if label_count >= width and label_count > 0:
        raise ValueError(
            f"label_count {label_count} must be smaller than the {width} columns"
        )
    feature_count = width - label_count

    features = np.empty((len(rows), feature_count), dtype=np.float64)
    labels = np.zeros((len(rows), label_count), dtype=np.int8)
    for i, row in enumerate(rows):
        row_index = i + (2 if header else 1)
        if len(row) != width:
            raise ParseError(
                f"row has {len(row)} columns, expected {width}", path, row_index
            )
        try:
            for j in range(feature_count):
                features[i, j] = float(row[j])
        except ValueError:
            raise ParseError(
                f"non-numeric feature value {row[j]!r}", path, row_index
            ) from None
        for j in range(label_count):
            cell = row[feature_count + j].strip()
            if cell in ("0", "0.0"):
                continue
            if cell in ("1", "1.0"):
                labels[i, j] = 1
            else:
                raise DataFormatError(
                    f"label value {cell!r} is not 0 or 1", path, row_index
                )

    if header:
        feature_names = tuple(header[:feature_count])
        label_names = tuple(header[feature_count:])
    else:
        feature_names = tuple(f"feature_{j}" for j in range(feature_count))
        label_names = tuple(f"label_{j}" for j in range(label_count))
    return MultiLabelDataset(
        features=features,
        labels=labels,
        feature_names=feature_names,
        label_names=label_names,
        name=name or "",
    )


def _all_numeric(row) -> bool:
    for cell in row:
        try:
            float(cell)
        except ValueError:
            return False
    return bool(row)


def save_delimited(dataset: MultiLabelDataset, path, delimiter: str = ",", header: bool = True) -> None:
    """Write a dataset as delimited text; floats use shortest-roundtrip
    formatting so save/load is bit-exact."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            fh.write(delimiter.join(dataset.feature_names + dataset.label_names))
            fh.write("\n")
        for i in range(dataset.n_samples):
            cells = [repr(v) for v in dataset.features[i].tolist()]
            cells.extend(str(v) for v in dataset.labels[i].tolist())
            fh.write(delimiter.join(cells))
            fh.write("\n")


def split(dataset: MultiLabelDataset, test_fraction: float, seed: int = 0):
    """Seeded shuffle-and-split into (train, test); the test side gets
    ``ceil(n * test_fraction)`` samples."""
    n = dataset.n_samples
    if n < 2:
        raise ValueError("need at least 2 samples to split")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n_test = math.ceil(n * test_fraction)
    if n_test >= n:
        raise ValueError(
            f"test_fraction {test_fraction} leaves no training samples"
        )
    order = np.random.default_rng(seed).permutation(n)
    return (
        subset(dataset, order[n_test:]),
        subset(dataset, order[:n_test]),
    )


@dataclass(frozen=True)
class FieldCheck:
    field: str
    expected: float
    actual: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class VerificationReport:
    dataset: str
    checks: tuple[FieldCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


# Count fields compare exactly; the two statistics get the tolerance that
# published tables round to.
_VERIFY_TOLERANCES = {
    "samples": 0.0,
    "features": 0.0,
    "labels": 0.0,
    "label_cardinality": 0.01,
    "label_density": 0.002,
}


def verify_against_spec(dataset: MultiLabelDataset, expected) -> VerificationReport:
    """Compare the dataset's statistics against expected values.

    ``expected`` is a :class:`DatasetStats` or a mapping holding any of
    samples / features / labels (exact) and label_cardinality (+/-0.01) /
    label_density (+/-0.002). Only the fields present are checked; the
    report carries one pass/fail entry per field.
    """
    if isinstance(expected, DatasetStats):
        expected = {
            "samples": expected.samples,
            "features": expected.features,
            "labels": expected.labels,
            "label_cardinality": expected.label_cardinality,
            "label_density": expected.label_density,
        }
    stats = dataset.stats()
    actual = {
        "samples": stats.samples,
        "features": stats.features,
        "labels": stats.labels,
        "label_cardinality": stats.label_cardinality,
        "label_density": stats.label_density,
    }
    checks = []
    for field, tolerance in _VERIFY_TOLERANCES.items():
        if field not in expected:
            continue
        want = float(expected[field])
        got = float(actual[field])
        checks.append(
            FieldCheck(
                field=field,
                expected=want,
                actual=got,
                tolerance=tolerance,
                passed=abs(got - want) <= tolerance,
            )
        )
    return VerificationReport(dataset=dataset.name, checks=tuple(checks))
