"""Reading data matrices and writing result documents.

Two input formats are understood:

* CSV: comma separated, '.' decimal point, optional single header row.
* f64le: the 4-byte magic ``FWSR``, little-endian ``u32`` rows and cols, then
  ``rows * cols`` little-endian float64 values in row-major order.

Whatever the file orientation, :func:`load_matrix` returns the data with one
point per column.
"""

import csv
import json
import math
import re
import struct
from dataclasses import asdict, dataclass, field

import numpy as np

from .matrix import ConfigurationError

MAGIC = b"FWSR"
SCHEMA_VERSION = "1"

_FLOAT = re.compile(r"^\s*[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\s*$")
_NONFINITE = re.compile(r"^\s*[+-]?(nan|inf|infinity)\s*$", re.IGNORECASE)


class InputError(ConfigurationError):
    """Base class for unreadable input files."""


class EmptyInputError(InputError):
    pass


class RowLengthError(InputError):
    pass


class NonNumericError(InputError):
    pass


class NonFiniteError(InputError):
    pass


class TruncatedInputError(InputError):
    pass


class BadMagicError(InputError):
    pass


@dataclass(frozen=True)
class InputSpec:
    path: str
    format: str = "csv"
    orientation: str = "points_as_rows"
    has_header: bool = False
    label_column: object = None

    def __post_init__(self):
        if self.format not in ("csv", "f64le"):
            raise ConfigurationError(f"unknown format {self.format!r}")
        if self.orientation not in ("points_as_rows", "points_as_cols"):
            raise ConfigurationError(f"unknown orientation {self.orientation!r}")
        if self.label_column is not None and self.orientation != "points_as_rows":
            raise ConfigurationError("a label column requires orientation points_as_rows")
        if self.label_column is not None and self.format != "csv":
            raise ConfigurationError("labels are only supported for CSV input")


def _parse_cell(text, line, col):
    if _FLOAT.match(text):
        return float(text)
    if _NONFINITE.match(text):
        raise NonFiniteError(f"line {line}, column {col}: non-finite value {text.strip()!r}")
    raise NonNumericError(f"line {line}, column {col}: cannot parse {text!r} as a number")


def _resolve_label_column(label_column, header, width):
    if label_column is None:
        return None
    if header is not None and str(label_column) in header:
        return header.index(str(label_column))
    try:
        idx = int(label_column)
    except (TypeError, ValueError):
        raise ConfigurationError(f"label column {label_column!r} not found in header") from None
    if not 0 <= idx < width:
        raise ConfigurationError(f"label column index {idx} out of range for {width} columns")
    return idx


def read_csv(path, has_header=False, label_column=None):
    """Parse a CSV file into ``(rows, labels)`` with rows as a 2-D array."""
    with open(path, newline="", encoding="utf-8") as fh:
        records = [(i + 1, rec) for i, rec in enumerate(csv.reader(fh)) if rec != []]
    header = None
    if has_header and records:
        header = [h.strip() for h in records[0][1]]
        records = records[1:]
    if not records:
        raise EmptyInputError(f"{path}: no data rows")

    width = len(records[0][1])
    lab = _resolve_label_column(label_column, header, width)
    rows, labels = [], []
    for line, rec in records:
        if len(rec) != width:
            raise RowLengthError(f"line {line}: expected {width} fields, found {len(rec)}")
        values = []
        for col, cell in enumerate(rec):
            if col == lab:
                labels.append(cell.strip())
            else:
                values.append(_parse_cell(cell, line, col + 1))
        rows.append(values)
    data = np.array(rows, dtype=np.float64)
    if data.shape[1] == 0:
        raise EmptyInputError(f"{path}: no numeric columns")
    return data, (np.array(labels) if lab is not None else None)


def read_f64le(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) == 0:
        raise EmptyInputError(f"{path}: empty file")
    if len(blob) < 12:
        raise TruncatedInputError(f"{path}: header truncated at byte {len(blob)} (need 12)")
    if blob[:4] != MAGIC:
        raise BadMagicError(f"{path}: bad magic {blob[:4]!r} at offset 0, expected {MAGIC!r}")
    rows, cols = struct.unpack("<II", blob[4:12])
    if rows == 0 or cols == 0:
        raise EmptyInputError(f"{path}: matrix has shape ({rows}, {cols})")
    need = 12 + 8 * rows * cols
    if len(blob) < need:
        have = (len(blob) - 12) // 8
        raise TruncatedInputError(
            f"{path}: expected {rows * cols} values, file ends at byte offset {len(blob)} "
            f"after {have} values"
        )
    if len(blob) > need:
        raise TruncatedInputError(f"{path}: {len(blob) - need} unexpected trailing bytes at offset {need}")
    data = np.frombuffer(blob, dtype="<f8", count=rows * cols, offset=12).reshape(rows, cols)
    bad = np.argwhere(~np.isfinite(data))
    if len(bad):
        r, c = bad[0]
        offset = 12 + 8 * (r * cols + c)
        raise NonFiniteError(f"{path}: non-finite value at row {r}, column {c} (byte offset {offset})")
    return data.astype(np.float64)


def write_f64le(path, M):
    M = np.asarray(M, dtype="<f8")
    if M.ndim != 2:
        raise ValueError("f64le holds 2-D matrices only")
    with open(path, "wb") as fh:
        fh.write(MAGIC + struct.pack("<II", *M.shape))
        fh.write(np.ascontiguousarray(M).tobytes())


def load_matrix(spec):
    """Load ``spec.path``; returns ``(A, labels)`` with ``A`` of shape ``(d, n)``."""
    if spec.format == "csv":
        data, labels = read_csv(spec.path, spec.has_header, spec.label_column)
    else:
        data, labels = read_f64le(spec.path), None
    A = data.T if spec.orientation == "points_as_rows" else data
    return np.asfortranarray(A), labels


@dataclass
class ResultDocument:
    command: list
    config: dict
    exemplar_indices: object
    status: str
    iterations: int
    objective_trace: object = field(default_factory=list)
    gap_trace: object = field(default_factory=list)
    elapsed_ms: float = 0.0
    seed: int = None
    schema_version: str = SCHEMA_VERSION

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text):
        payload = json.loads(text)
        if payload.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {payload.get('schema_version')!r}")
        return cls(**payload)

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())

    @classmethod
    def read(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def write_rows_csv(path_or_file, rows, columns):
    """Write dict rows as CSV with LF line endings."""
    def emit(fh):
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(row[k]) for k in columns})

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", encoding="utf-8", newline="") as fh:
            emit(fh)


def _fmt(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return v
