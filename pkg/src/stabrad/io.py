"""Matrix ingestion, generators and report serialization.

Matrix Market files are parsed here rather than through ``scipy.io.mmread``
so that parse errors carry line numbers and explicitly stored zeros survive
as members of the sparsity pattern.
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, UnsupportedField

__all__ = [
    "MatrixMarketHeader",
    "MatrixMarket",
    "read_matrix_market",
    "write_matrix_market",
    "read_pattern",
    "grcar",
    "toeplitz_band",
    "trace_to_dict",
    "format_trace_table",
    "write_json",
    "write_field_csv",
    "write_contours_csv",
    "write_clouds_csv",
    "SCHEMA",
]

SCHEMA = "stabrad/1"

FORMATS = ("coordinate", "array")
FIELDS = ("real", "complex", "integer", "pattern")
SYMMETRIES = ("general", "symmetric", "skew-symmetric", "hermitian")


@dataclass(frozen=True)
class MatrixMarketHeader:
    object: str
    format: str
    field: str
    symmetry: str


@dataclass
class MatrixMarket:
    header: MatrixMarketHeader
    matrix: np.ndarray
    pattern: list  # 0-based (row, col) pairs, symmetric counterparts included

    @property
    def nnz(self):
        return len(self.pattern)


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, encoding="ascii", errors="replace"), True
    if isinstance(source, (bytes, bytearray)):
        return _io.StringIO(source.decode("ascii", errors="replace")), True
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("ascii", errors="replace")
        return _io.StringIO(data), True
    raise TypeError("source must be a path, bytes or a file object")


def _parse_header(line, lineno):
    parts = line.strip().split()
    if not parts or parts[0].lower() != "%%matrixmarket":
        raise ParseError("missing '%%MatrixMarket' banner", lineno)
    if len(parts) != 5:
        raise ParseError("banner must read '%%MatrixMarket matrix <format> <field> <symmetry>'", lineno)
    obj, fmt, fld, sym = (p.lower() for p in parts[1:])
    if obj != "matrix":
        raise ParseError(f"unsupported object {obj!r}", lineno)
    if fmt not in FORMATS:
        raise ParseError(f"unknown format {fmt!r}", lineno)
    if fld not in FIELDS:
        raise ParseError(f"unknown field {fld!r}", lineno)
    if sym not in SYMMETRIES:
        raise ParseError(f"unknown symmetry {sym!r}", lineno)
    if fmt == "array" and fld == "pattern":
        raise ParseError("array format cannot have field 'pattern'", lineno)
    return MatrixMarketHeader(obj, fmt, fld, sym)


def _value(tokens, fld, lineno):
    try:
        if fld == "complex":
            return complex(float(tokens[0]), float(tokens[1]))
        if fld == "integer":
            return float(int(tokens[0]))
        return float(tokens[0])
    except (ValueError, IndexError) as exc:
        raise ParseError(f"bad {fld} value {' '.join(tokens)!r}", lineno) from exc


def read_matrix_market(source, allow_pattern=False) -> MatrixMarket:
    """Read a Matrix Market file into a dense matrix and its pattern.

    Symmetric, skew-symmetric and Hermitian storage is expanded. The pattern
    is the set of stored coordinates (and their mirrored counterparts),
    explicit zeros included. Pattern-only files are rejected with
    :class:`UnsupportedField` unless ``allow_pattern`` is set, in which case
    the stored entries are read as ones.
    """
    fh, close = _open_text(source)
    try:
        lines = fh.read().splitlines()
    finally:
        if close:
            fh.close()
    if not lines:
        raise ParseError("empty input", 1)
    header = _parse_header(lines[0], 1)
    if header.field == "pattern" and not allow_pattern:
        raise UnsupportedField("pattern-only Matrix Market file has no values")

    body = [(i + 1, ln) for i, ln in enumerate(lines[1:], start=1) if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise ParseError("missing size line", len(lines))
    size_no, size_line = body[0]
    try:
        dims = [int(t) for t in size_line.split()]
    except ValueError as exc:
        raise ParseError(f"bad size line {size_line!r}", size_no) from exc

    fld, sym = header.field, header.symmetry
    dtype = complex if fld == "complex" else float
    entries = body[1:]

    if header.format == "coordinate":
        if len(dims) != 3:
            raise ParseError("coordinate size line needs 'rows cols nnz'", size_no)
        nrows, ncols, nnz = dims
        if len(entries) != nnz:
            raise ParseError(f"declared {nnz} entries but found {len(entries)}", entries[-1][0] if entries else size_no)
        A = np.zeros((nrows, ncols), dtype=dtype)
        pattern = set()
        want = {"pattern": 2, "complex": 4}.get(fld, 3)
        for lineno, ln in entries:
            tok = ln.split()
            if len(tok) != want:
                raise ParseError(f"expected {want} fields, got {len(tok)}", lineno)
            try:
                i, j = int(tok[0]) - 1, int(tok[1]) - 1
            except ValueError as exc:
                raise ParseError("bad index", lineno) from exc
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise ParseError(f"index ({i + 1}, {j + 1}) out of range", lineno)
            val = 1.0 if fld == "pattern" else _value(tok[2:], fld, lineno)
            if sym != "general" and i < j:
                raise ParseError("entry above the diagonal in a symmetric-storage file", lineno)
            if sym == "skew-symmetric" and i == j:
                raise ParseError("diagonal entry in a skew-symmetric file", lineno)
            A[i, j] = val
            pattern.add((i, j))
            if sym != "general" and i != j:
                A[j, i] = {"symmetric": val, "skew-symmetric": -val, "hermitian": np.conj(val)}[sym]
                pattern.add((j, i))
        return MatrixMarket(header, A, sorted(pattern))

    if len(dims) != 2:
        raise ParseError("array size line needs 'rows cols'", size_no)
    nrows, ncols = dims
    if sym == "general":
        slots = [(i, j) for j in range(ncols) for i in range(nrows)]
    elif sym == "skew-symmetric":
        slots = [(i, j) for j in range(ncols) for i in range(j + 1, nrows)]
    else:
        slots = [(i, j) for j in range(ncols) for i in range(j, nrows)]
    if len(entries) != len(slots):
        raise ParseError(f"expected {len(slots)} array entries, found {len(entries)}", entries[-1][0] if entries else size_no)
    A = np.zeros((nrows, ncols), dtype=dtype)
    for (i, j), (lineno, ln) in zip(slots, entries):
        val = _value(ln.split(), fld, lineno)
        A[i, j] = val
        if sym != "general" and i != j:
            A[j, i] = {"symmetric": val, "skew-symmetric": -val, "hermitian": np.conj(val)}[sym]
    pattern = sorted(zip(*(int_arr.tolist() for int_arr in np.nonzero(A))))
    return MatrixMarket(header, A, pattern)


def _fmt(x):
    return f"{x:.17g}"


def write_matrix_market(target, A, pattern=None, comment=None):
    """Write ``A`` in coordinate general format with 17 significant digits.

    Entries on ``pattern`` (0-based pairs) are written even when zero; by
    default the nonzero entries are written.
    """
    A = np.asarray(A)
    is_complex = np.iscomplexobj(A) and np.any(A.imag != 0)
    fld = "complex" if is_complex else "real"
    if pattern is None:
        pattern = list(zip(*(a.tolist() for a in np.nonzero(A))))
    lines = [f"%%MatrixMarket matrix coordinate {fld} general"]
    if comment:
        lines.extend(f"% {c}" for c in comment.splitlines())
    lines.append(f"{A.shape[0]} {A.shape[1]} {len(pattern)}")
    for i, j in pattern:
        v = A[i, j]
        if is_complex:
            lines.append(f"{i + 1} {j + 1} {_fmt(v.real)} {_fmt(v.imag)}")
        else:
            lines.append(f"{i + 1} {j + 1} {_fmt(np.real(v))}")
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w", encoding="ascii") as fh:
            fh.write(text)


def read_pattern(source):
    """Read a coordinate list ("i j" per line, 1-based) into 0-based pairs."""
    fh, close = _open_text(source)
    try:
        lines = fh.read().splitlines()
    finally:
        if close:
            fh.close()
    pairs = []
    for lineno, ln in enumerate(lines, start=1):
        s = ln.strip()
        if not s or s[0] in "#%":
            continue
        tok = s.split()
        if len(tok) != 2:
            raise ParseError("expected 'i j'", lineno)
        try:
            i, j = int(tok[0]), int(tok[1])
        except ValueError as exc:
            raise ParseError("bad index", lineno) from exc
        if i < 1 or j < 1:
            raise ParseError("indices are 1-based", lineno)
        pairs.append((i - 1, j - 1))
    return pairs


# ----------------------------------------------------------------------------
# generators


def toeplitz_band(n, p, q, coefficients):
    """Banded Toeplitz matrix with diagonals ``-p..q``.

    ``coefficients`` are ordered by increasing diagonal index, i.e. the
    lowest subdiagonal first.
    """
    coefficients = list(coefficients)
    if len(coefficients) != p + q + 1:
        raise ValueError(f"need {p + q + 1} coefficients for band ({p}, {q}), got {len(coefficients)}")
    dtype = complex if any(isinstance(c, complex) for c in coefficients) else float
    T = np.zeros((n, n), dtype=dtype)
    for c, d in zip(coefficients, range(-p, q + 1)):
        T += c * np.eye(n, k=d)
    return T


def grcar(n, shift=1.0):
    """``-Grcar(n) - shift I``: subdiagonal 1, diagonal ``-1 - shift``, three superdiagonals -1."""
    if n < 5:
        raise ValueError("grcar needs n >= 5")
    return toeplitz_band(n, 1, 3, [1.0, -1.0 - shift, -1.0, -1.0, -1.0])


# ----------------------------------------------------------------------------
# reports


def _num(x):
    x = float(x)
    return x if np.isfinite(x) else str(x)


def trace_to_dict(trace, structure=None, extra=None):
    d = {
        "schema": SCHEMA,
        "mode": trace.mode,
        "fixed": {"eps" if trace.mode == "delta" else "delta": _num(trace.fixed)},
        "structure": structure,
        "rows": [
            {"k": r.k, "value": _num(r.value), "re_lambda": _num(r.re_lambda), "steps": r.steps}
            for r in trace.rows
        ],
        "final": _num(trace.final),
        "bracket": [_num(trace.bracket[0]), _num(trace.bracket[1])],
        "status": trace.status,
    }
    if extra:
        d.update(extra)
    return d


def format_trace_table(trace):
    """Aligned text table: k, delta_k (or eps_k), Re lambda_k, # steps."""
    name = "delta_k" if trace.mode == "delta" else "eps_k"
    head = f"{'k':>3}  {name:>22}  {'Re lambda_k':>22}  {'# steps':>8}"
    lines = [head, "-" * len(head)]
    for r in trace.rows:
        lines.append(f"{r.k:>3}  {r.value:>22.14e}  {r.re_lambda:>22.10e}  {r.steps:>8d}")
    return "\n".join(lines)


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_field_csv(path, field):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im", "sigma_min"])
        for i, re in enumerate(field.grid.re):
            for j, im in enumerate(field.grid.im):
                w.writerow([_fmt(re), _fmt(im), _fmt(field.values[i, j])])


def write_contours_csv(path, contours_by_level):
    """``contours_by_level`` maps a level to a list of complex polylines."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "segment_id", "re", "im"])
        for level, curves in contours_by_level.items():
            for sid, c in enumerate(curves):
                for z in c:
                    w.writerow([_fmt(level), sid, _fmt(z.real), _fmt(z.imag)])


def write_clouds_csv(path, clouds):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample_id", "re", "im"])
        for sid, cloud in enumerate(clouds):
            for z in cloud:
                w.writerow([sid, _fmt(z.real), _fmt(z.imag)])
