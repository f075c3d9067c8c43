"""Delimited numeric files and text corpora."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .core import LabeledDataset
from .errors import InputError


def _sniff_delimiter(first_line: str) -> str:
    for cand in (",", "\t", ";"):
        if cand in first_line:
            return cand
    return " "


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _read_rows(path: Path, delimiter: str | None):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InputError(f"{path} is empty")
    delim = delimiter or _sniff_delimiter(lines[0])
    if delim == " ":
        rows = [ln.split() for ln in lines]
    else:
        rows = [[c.strip() for c in r] for r in csv.reader(lines, delimiter=delim)]
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header, rows = rows[0], rows[1:]
    if not rows:
        raise InputError(f"{path} has a header but no data rows")
    return header, rows


def _to_matrix(rows, path) -> np.ndarray:
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise InputError(f"{path}: rows have differing column counts {sorted(widths)}")
    try:
        arr = np.array(rows, dtype=np.float64)
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric entry ({exc})") from exc
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{path}: NaN or infinite entry")
    return arr


def read_matrix(path, delimiter: str | None = None) -> np.ndarray:
    """Numeric table with an optional header row; delimiter sniffed if not given."""
    _, rows = _read_rows(path, delimiter)
    return _to_matrix(rows, path)


def read_labeled_file(path, label_col, delimiter: str | None = None) -> LabeledDataset:
    """Numeric table with a 0/1 label column given by header name or 0-based index."""
    header, rows = _read_rows(path, delimiter)
    if header is not None and label_col in header:
        j = header.index(label_col)
    else:
        try:
            j = int(label_col)
        except (TypeError, ValueError):
            raise InputError(f"{path}: no label column {label_col!r}") from None
    arr = _to_matrix(rows, path)
    if not -arr.shape[1] <= j < arr.shape[1]:
        raise InputError(f"{path}: label column {j} out of range for {arr.shape[1]} columns")
    j %= arr.shape[1]
    labels = arr[:, j]
    if not np.all((labels == 0) | (labels == 1)):
        raise InputError(f"{path}: label column must contain only 0 and 1")
    names = None if header is None else tuple(h for k, h in enumerate(header) if k != j)
    return LabeledDataset(np.delete(arr, j, axis=1), labels.astype(np.int64), names)


def write_matrix(path, x, header=None) -> None:
    """Comma-separated, full float precision, ``\\n`` line endings."""
    x = np.asarray(x, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if header is not None:
            writer.writerow(header)
        writer.writerows([repr(float(v)) for v in row] for row in x)


def load_corpus(corpus_file=None, dir1=None, dir0=None, delimiter=None) -> list[tuple[int, str]]:
    """Labelled documents from a ``label,text`` file or two class directories.

    In directory mode every regular file directly inside ``dir1`` (label 1)
    and ``dir0`` (label 0) is one document, read in sorted filename order.
    """
    if corpus_file is not None:
        try:
            with open(corpus_file, encoding="utf-8", newline="") as fh:
                rows = list(csv.reader(fh, delimiter=delimiter or ","))
        except OSError as exc:
            raise InputError(f"cannot read {corpus_file}: {exc}") from exc
        docs = []
        for num, row in enumerate(rows, 1):
            if not row:
                continue
            if len(row) < 2:
                raise InputError(f"{corpus_file}:{num}: expected label and text")
            label = row[0].strip()
            if num == 1 and label not in ("0", "1"):
                continue  # header
            if label not in ("0", "1"):
                raise InputError(f"{corpus_file}:{num}: label must be 0 or 1, got {label!r}")
            docs.append((int(label), delimiter.join(row[1:]) if delimiter else ",".join(row[1:])))
        return docs
    if dir1 is None or dir0 is None:
        raise InputError("corpus directories must be given for both classes")
    docs = []
    for label, folder in ((1, Path(dir1)), (0, Path(dir0))):
        if not folder.is_dir():
            raise InputError(f"{folder} is not a directory")
        for f in sorted(p for p in folder.iterdir() if p.is_file()):
            docs.append((label, f.read_text(encoding="utf-8", errors="replace")))
    return docs
