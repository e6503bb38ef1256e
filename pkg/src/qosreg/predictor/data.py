"""Feature CSV ingestion and train/test splitting."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import BadHeader, NonNumericCell, TooFewRows
from ..qos import PROPERTIES, canonical_property

ID_COLUMN = "ws_id"
URL_COLUMN = "url"
MISSING = frozenset({"", "na", "nan", "null", "?"})


@dataclass
class FeatureMatrix:
    ids: list[str]
    feature_names: list[str]
    X: np.ndarray
    target_names: list[str]
    Y: np.ndarray
    constant_columns: list[str] = field(default_factory=list)
    urls: Optional[list[str]] = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float).reshape(len(self.ids), len(self.feature_names))
        self.Y = np.asarray(self.Y, dtype=float).reshape(len(self.ids), len(self.target_names))

    def __len__(self) -> int:
        return len(self.ids)

    def take(self, index: Sequence[int]) -> "FeatureMatrix":
        index = list(index)
        return FeatureMatrix(
            ids=[self.ids[i] for i in index],
            feature_names=list(self.feature_names),
            X=self.X[index],
            target_names=list(self.target_names),
            Y=self.Y[index],
            constant_columns=list(self.constant_columns),
            urls=None if self.urls is None else [self.urls[i] for i in index],
        )


def ingest_csv(source: str | os.PathLike | io.TextIOBase) -> FeatureMatrix:
    """Read a feature CSV: ``ws_id``, feature columns, then QoS target columns.

    Target columns are recognized by name (``response_time``,
    ``Availability``, ...); an optional ``url`` column is carried along for
    link validation. Empty or NA cells are replaced by the column mean.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return _ingest(fh)
    return _ingest(source)


def ingest_csv_text(text: str) -> FeatureMatrix:
    return _ingest(io.StringIO(text))


def _ingest(fh) -> FeatureMatrix:
    reader = csv.reader(fh)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise BadHeader("empty CSV") from None
    if len(set(header)) != len(header):
        raise BadHeader("duplicate column names")
    if ID_COLUMN not in header:
        raise BadHeader(f"header lacks {ID_COLUMN!r}")

    targets = {}
    features = []
    for j, name in enumerate(header):
        if name in (ID_COLUMN, URL_COLUMN):
            continue
        prop = canonical_property(name)
        if prop is not None:
            if prop in targets:
                raise BadHeader(f"target {prop!r} appears twice")
            targets[prop] = j
        else:
            features.append(j)
    if not targets:
        raise BadHeader("no QoS target columns (" + ", ".join(PROPERTIES) + ")")
    if not features:
        raise BadHeader("no feature columns")
    target_names = [p for p in PROPERTIES if p in targets]
    numeric_cols = features + [targets[p] for p in target_names]

    ids, urls, rows = [], [], []
    id_col = header.index(ID_COLUMN)
    url_col = header.index(URL_COLUMN) if URL_COLUMN in header else None
    for rowno, row in enumerate(reader, start=2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise BadHeader(f"row {rowno} has {len(row)} cells, header has {len(header)}")
        ids.append(row[id_col].strip())
        if url_col is not None:
            urls.append(row[url_col].strip())
        values = []
        for j in numeric_cols:
            cell = row[j].strip()
            if cell.lower() in MISSING:
                values.append(math.nan)
                continue
            try:
                v = float(cell)
            except ValueError:
                raise NonNumericCell(rowno, header[j], cell) from None
            if not math.isfinite(v):
                raise NonNumericCell(rowno, header[j], cell)
            values.append(v)
        rows.append(values)

    data = np.array(rows, dtype=float).reshape(len(rows), len(numeric_cols))
    constant = []
    for c, j in enumerate(numeric_cols):
        col = data[:, c]
        present = ~np.isnan(col)
        if len(col) and not present.any():
            raise BadHeader(f"column {header[j]!r} has no values")
        if not present.all():
            col[~present] = col[present].mean()
        if c < len(features) and len(col) and np.ptp(col) == 0:
            constant.append(header[j])

    return FeatureMatrix(
        ids=ids,
        feature_names=[header[j] for j in features],
        X=data[:, : len(features)],
        target_names=target_names,
        Y=data[:, len(features):],
        constant_columns=constant,
        urls=urls if url_col is not None else None,
    )


def write_csv(m: FeatureMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([ID_COLUMN] + m.feature_names + m.target_names)
    for i, ws_id in enumerate(m.ids):
        w.writerow([ws_id] + [repr(float(v)) for v in m.X[i]] + [repr(float(v)) for v in m.Y[i]])
    return buf.getvalue()


def split(m: FeatureMatrix, ratio: float = 0.8, seed: int = 0) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Seeded shuffle, then the first ``round(ratio * n)`` rows train and the rest test."""
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie strictly between 0 and 1")
    n = len(m)
    if n < 5:
        raise TooFewRows(f"need at least 5 rows to split, got {n}")
    n_train = min(max(int(math.floor(ratio * n + 0.5)), 1), n - 1)
    perm = np.random.default_rng(seed).permutation(n)
    return m.take(perm[:n_train]), m.take(perm[n_train:])
