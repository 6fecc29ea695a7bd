"""Reading labeled tables and edge lists; writing result files.

Tables are CSV or TSV with a header row of column labels and a first
column of row labels; the delimiter is sniffed from the first line
unless forced.  Output files are tab-separated with full-precision
decimal floats (17 significant digits, so a write/read round trip is
exact) and are written atomically: to a temporary file first, then
renamed into place.
"""

from __future__ import annotations

import csv
import os
import tempfile
import warnings
from dataclasses import dataclass

import numpy as np

from .graph import Graph, make_graph

__all__ = [
    "Dataset",
    "read_table",
    "read_edges",
    "read_weights",
    "write_scree",
    "write_coordinates",
    "write_manifest",
]

KINDS = ("measurements", "contingency", "groups", "edges")

# Header pairs recognized at the top of an edge list.
_EDGE_HEADERS = {("source", "target"), ("from", "to"), ("node1", "node2")}


@dataclass(frozen=True)
class Dataset:
    """A labeled numeric table plus the kind of data it claims to hold."""

    matrix: np.ndarray
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    kind: str


def _sniff_delimiter(line: str, forced: str | None) -> str:
    if forced is not None:
        if len(forced) != 1:
            raise ValueError(f"delimiter must be a single character, got {forced!r}")
        return forced
    if "\t" in line:
        return "\t"
    if "," in line:
        return ","
    raise ValueError("could not detect delimiter (no tab or comma in first line)")


def _read_rows(path: str, delimiter: str | None) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            raise ValueError(f"{path}: empty file")
        sep = _sniff_delimiter(first, delimiter)
        fh.seek(0)
        rows = [row for row in csv.reader(fh, delimiter=sep) if any(c.strip() for c in row)]
    if not rows:
        raise ValueError(f"{path}: empty file")
    return rows


def _unique(labels: list[str], what: str, path: str) -> tuple[str, ...]:
    if len(set(labels)) != len(labels):
        dupes = sorted({x for x in labels if labels.count(x) > 1})
        raise ValueError(f"{path}: duplicate {what} labels: {dupes}")
    return tuple(labels)


def read_table(path: str, kind: str, delimiter: str | None = None) -> Dataset:
    """Parse a labeled numeric table.

    The first row holds column labels (its first cell, the corner, is
    ignored); the first column holds row labels.  Cells that fail float
    parsing are reported with their row and column label.

    ``kind`` selects validation: "measurements" accepts any finite
    numbers, "contingency" requires nonnegative entries and drops
    all-zero rows and columns with a warning, "groups" requires 0/1
    entries.  Edge lists have their own reader, :func:`read_edges`.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    if kind == "edges":
        raise ValueError("use read_edges for edge lists")
    rows = _read_rows(path, delimiter)
    header = rows[0]
    if len(header) < 2:
        raise ValueError(f"{path}: need at least one data column after the label column")
    col_labels = _unique([c.strip() for c in header[1:]], "column", path)
    if len(rows) < 2:
        raise ValueError(f"{path}: no data rows")
    row_labels: list[str] = []
    data = np.empty((len(rows) - 1, len(col_labels)))
    for i, row in enumerate(rows[1:]):
        label = row[0].strip()
        row_labels.append(label)
        if len(row) - 1 != len(col_labels):
            raise ValueError(
                f"{path}: row '{label}' has {len(row) - 1} cells, expected {len(col_labels)}"
            )
        for j, cell in enumerate(row[1:]):
            try:
                value = float(cell)
            except ValueError:
                raise ValueError(
                    f"{path}: cell at row '{label}', column '{col_labels[j]}' "
                    f"is not numeric: {cell.strip()!r}"
                ) from None
            if not np.isfinite(value):
                raise ValueError(
                    f"{path}: cell at row '{label}', column '{col_labels[j]}' "
                    f"is not finite"
                )
            data[i, j] = value
    row_tuple = _unique(row_labels, "row", path)
    if kind == "contingency":
        neg = np.argwhere(data < 0)
        if neg.size:
            i, j = neg[0]
            raise ValueError(
                f"{path}: negative count at row '{row_tuple[i]}', "
                f"column '{col_labels[j]}'"
            )
        keep_r = data.sum(axis=1) > 0
        keep_c = data.sum(axis=0) > 0
        if not (keep_r.all() and keep_c.all()):
            dropped = [row_tuple[i] for i in np.flatnonzero(~keep_r)]
            dropped += [col_labels[j] for j in np.flatnonzero(~keep_c)]
            warnings.warn(
                f"{path}: dropping all-zero rows/columns: {dropped}", stacklevel=2
            )
            data = data[keep_r][:, keep_c]
            row_tuple = tuple(lab for lab, k in zip(row_tuple, keep_r) if k)
            col_labels = tuple(lab for lab, k in zip(col_labels, keep_c) if k)
        if data.size == 0 or data.sum() == 0:
            raise ValueError(f"{path}: table has no positive counts")
    elif kind == "groups":
        bad = np.argwhere(~np.isin(data, (0.0, 1.0)))
        if bad.size:
            i, j = bad[0]
            raise ValueError(
                f"{path}: group coding must be 0/1; offending cell at row "
                f"'{row_tuple[i]}', column '{col_labels[j]}'"
            )
    return Dataset(matrix=data, row_labels=row_tuple, col_labels=col_labels, kind=kind)


def read_edges(path: str, delimiter: str | None = None) -> Graph:
    """Parse a two-column edge list of node labels into a Graph.

    A first line like "source,target" (or from/to, node1/node2) is
    treated as a header.  Repeated edges, in either order, collapse to
    one; a self loop is an error.  Nodes are numbered in order of first
    appearance.
    """
    rows = _read_rows(path, delimiter)
    if rows and tuple(c.strip().lower() for c in rows[0][:2]) in _EDGE_HEADERS:
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no edges")
    nodes: list[str] = []
    index: dict[str, int] = {}
    pairs: set[tuple[int, int]] = set()
    for lineno, row in enumerate(rows, start=1):
        cells = [c.strip() for c in row if c.strip()]
        if len(cells) != 2:
            raise ValueError(
                f"{path}: line {lineno}: expected two node labels, got {len(cells)}"
            )
        u, v = cells
        if u == v:
            raise ValueError(f"{path}: line {lineno}: self loop at node '{u}'")
        for lab in (u, v):
            if lab not in index:
                index[lab] = len(nodes)
                nodes.append(lab)
        a, b = sorted((index[u], index[v]))
        pairs.add((a, b))
    M = np.zeros((len(nodes), len(nodes)))
    for a, b in pairs:
        M[a, b] = M[b, a] = 1.0
    return make_graph(M, node_labels=nodes)


def read_weights(path: str) -> np.ndarray:
    """Read a one-number-per-line weight vector."""
    values: list[float] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno} is not a number: {text!r}"
                ) from None
    if not values:
        raise ValueError(f"{path}: no weights found")
    return np.array(values)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_scree(path: str, scree) -> None:
    """Full-precision TSV of a ScreeTable."""
    lines = ["axis\teigenvalue\tinertia_pct\tcumulative_pct"]
    for row in scree:
        lines.append(
            f"{row.index}\t{_fmt(row.eigenvalue)}\t"
            f"{_fmt(row.inertia_pct)}\t{_fmt(row.cumulative_pct)}"
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def write_coordinates(path: str, labels, coords, axis_names=None) -> None:
    """Labeled coordinate matrix as full-precision TSV."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim != 2 or coords.shape[0] != len(labels):
        raise ValueError(
            f"coordinates shape {coords.shape} does not match {len(labels)} labels"
        )
    if axis_names is None:
        axis_names = [f"axis_{j + 1}" for j in range(coords.shape[1])]
    lines = ["label\t" + "\t".join(axis_names)]
    for lab, row in zip(labels, coords):
        lines.append(str(lab) + "\t" + "\t".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_manifest(path: str, entries: dict) -> None:
    """Plain key: value run manifest."""
    lines = [f"{key}: {value}" for key, value in entries.items()]
    _atomic_write(path, "\n".join(lines) + "\n")
