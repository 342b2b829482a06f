"""Reading labelled CSV data, writing outputs atomically, and config files."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, MissingLabel, NonNumericFeature, ParseError


@dataclass(frozen=True)
class Dataset:
    """Features, integer labels and the label names they map to.

    Labels are numbered in order of first appearance in the file.  ``y`` is
    None for unlabelled data.
    """

    X: np.ndarray
    y: np.ndarray | None
    class_names: list[str]
    feature_names: list[str]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv(path, label_col: int | str | None = -1, header: bool | None = None) -> Dataset:
    """Load a CSV file of numeric features and an optional label column.

    Blank lines and lines starting with ``#`` are skipped.

    Parameters
    ----------
    path : path-like
    label_col : int, str or None
        Label column index (negative counts from the end) or header name;
        None for unlabelled data.
    header : bool or None
        Whether the first row is a header.  None guesses: the first row is a
        header when any of its feature fields is not a number.

    Raises
    ------
    ParseError
        Ragged rows or an empty file (with 1-based row and column).
    MissingLabel
        An empty label field.
    NonNumericFeature
        A feature that is not a finite number.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh)]
    numbered = [(i + 1, [f.strip() for f in row]) for i, row in enumerate(rows)
                if any(f.strip() for f in row) and not row[0].lstrip().startswith("#")]
    if not numbered:
        raise ParseError("file contains no data", row=1)
    width = len(numbered[0][1])
    names = [f"x{j}" for j in range(width)]
    first_line, first = numbered[0]
    lab = _label_index(label_col, first, width, first_line)
    if header is None:
        header = isinstance(label_col, str) or any(
            not _is_number(f) for j, f in enumerate(first) if j != lab
        )
    if header:
        names = first
        numbered = numbered[1:]
    feat_cols = [j for j in range(width) if j != lab]
    X = np.empty((len(numbered), len(feat_cols)))
    labels: list[str] = []
    for r, (line, row) in enumerate(numbered):
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", row=line, col=min(len(row), width) + 1)
        for c, j in enumerate(feat_cols):
            try:
                v = float(row[j])
            except ValueError:
                raise NonNumericFeature(f"feature value {row[j]!r} is not a number", row=line, col=j + 1) from None
            if not math.isfinite(v):
                raise NonNumericFeature(f"feature value {row[j]!r} is not finite", row=line, col=j + 1)
            X[r, c] = v
        if lab is not None:
            if row[lab] == "":
                raise MissingLabel("label is empty", row=line, col=lab + 1)
            labels.append(row[lab])
    if not numbered:
        raise ParseError("file has a header but no data rows", row=first_line + 1)
    feature_names = [names[j] for j in feat_cols]
    if lab is None:
        return Dataset(X, None, [], feature_names)
    class_names = list(dict.fromkeys(labels))
    code = {name: i for i, name in enumerate(class_names)}
    y = np.array([code[s] for s in labels], dtype=np.int64)
    return Dataset(X, y, class_names, feature_names)


def _label_index(label_col, first_row, width, line) -> int | None:
    if label_col is None:
        return None
    if isinstance(label_col, str):
        if label_col not in first_row:
            raise ParseError(f"no column named {label_col!r} in the header", row=line)
        return first_row.index(label_col)
    j = int(label_col)
    if not -width <= j < width:
        raise ParseError(f"label column {j} out of range for {width} columns", row=line)
    return j % width


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_json(obj) -> str:
    """Deterministic JSON text (sorted keys, trailing newline)."""
    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def csv_text(header: list[str], rows: list[list], comments: list[str] = ()) -> str:
    """CSV text with optional leading ``#`` comment lines."""
    lines = [f"# {c}" for c in comments]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return "".join(line + "\n" for line in lines) + buf.getvalue()


def load_config(path) -> dict:
    """Read a run configuration.

    Accepts ``key = value`` lines (``#`` comments allowed), a JSON object,
    a JSON output of this package (its ``meta.config`` is used), or a CSV
    output whose ``# config:`` comment line holds the JSON config.
    """
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        first = stripped.splitlines()[0]
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError:
            data = json.loads(first)  # NDJSON output: the first line carries meta
        if isinstance(data, dict) and "meta" in data and isinstance(data["meta"], dict):
            data = data["meta"].get("config", {})
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: JSON config must be an object")
        return data
    out = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("# config:"):
            return json.loads(line[len("# config:"):])
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: line {n} is not 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out
