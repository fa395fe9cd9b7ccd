"""Plain-text matrix, subspace and tensor files.

A matrix block is a header line ``matrix m n`` followed by ``m`` lines of
``n`` whitespace-separated decimals. A subspace file starts with
``subspace m n d`` and holds ``d`` matrix blocks; a tensor file is the same
with the header ``tensor m n d``. Blank lines and lines starting with ``#``
are ignored. Values are written with 17 significant digits, so a
write/read round trip is exact.
"""
import numpy as np

from .exceptions import MatrixFileError

__all__ = [
    "format_matrix",
    "format_collection",
    "write_matrices",
    "read_matrices",
    "parse_matrices",
    "read_comments",
]

KINDS = ("matrix", "subspace", "tensor")


def _fmt(x):
    return format(float(x), ".17g")


def format_matrix(M):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {M.shape}")
    lines = [f"matrix {M.shape[0]} {M.shape[1]}"]
    lines += [" ".join(_fmt(x) for x in row) for row in M]
    return "\n".join(lines) + "\n"


def format_collection(matrices, kind="subspace", comments=()):
    mats = [np.asarray(M, dtype=float) for M in matrices]
    if kind not in ("subspace", "tensor"):
        raise ValueError(f"collection kind must be 'subspace' or 'tensor', got {kind!r}")
    if not mats:
        raise ValueError("need at least one matrix")
    m, n = mats[0].shape
    for M in mats:
        if M.shape != (m, n):
            raise ValueError(f"matrix of shape {M.shape} in a {m} x {n} collection")
    head = [f"# {c}" for c in comments] + [f"{kind} {m} {n} {len(mats)}"]
    return "\n".join(head) + "\n" + "".join(format_matrix(M) for M in mats)


def write_matrices(path, matrices, kind="subspace", comments=()):
    text = format_matrix(matrices) if kind == "matrix" else format_collection(matrices, kind, comments)
    with open(path, "w") as fh:
        fh.write(text)


def _content_lines(text):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield no, line


def _dims(no, parts, count):
    if len(parts) != count + 1:
        raise MatrixFileError(f"header '{parts[0]}' needs {count} dimensions, got {len(parts) - 1}", no)
    try:
        dims = [int(p) for p in parts[1:]]
    except ValueError:
        raise MatrixFileError(f"non-integer dimension in header: {' '.join(parts)}", no) from None
    if any(v < 1 for v in dims):
        raise MatrixFileError(f"dimensions must be positive: {' '.join(parts)}", no)
    return dims


def _read_block(lines, m, n, header_no):
    try:
        no, line = next(lines)
    except StopIteration:
        raise MatrixFileError("missing 'matrix' block", header_no) from None
    parts = line.split()
    if parts[0] != "matrix":
        raise MatrixFileError(f"expected 'matrix {m} {n}', got '{line}'", no)
    bm, bn = _dims(no, parts, 2)
    if (bm, bn) != (m, n):
        raise MatrixFileError(f"block is {bm} x {bn}, header declared {m} x {n}", no)
    M = np.empty((m, n))
    last = no
    for i in range(m):
        try:
            last, row = next(lines)
        except StopIteration:
            raise MatrixFileError(f"matrix block ended after {i} of {m} rows", last) from None
        vals = row.split()
        if len(vals) != n:
            raise MatrixFileError(f"expected {n} entries, got {len(vals)}", last)
        try:
            M[i] = [float(v) for v in vals]
        except ValueError:
            raise MatrixFileError(f"non-numeric entry in '{row}'", last) from None
        if not np.all(np.isfinite(M[i])):
            raise MatrixFileError("non-finite entry", last)
    return M


def parse_matrices(text):
    """Parse file contents; returns ``(kind, matrices)``."""
    lines = _content_lines(text)
    try:
        no, line = next(lines)
    except StopIteration:
        raise MatrixFileError("empty file", 1) from None
    parts = line.split()
    kind = parts[0]
    if kind not in KINDS:
        raise MatrixFileError(f"unknown header '{kind}'; expected one of {', '.join(KINDS)}", no)
    if kind == "matrix":
        m, n = _dims(no, parts, 2)
        # re-read the header as part of the block
        lines = _content_lines(text)
        mats = [_read_block(lines, m, n, no)]
    else:
        m, n, d = _dims(no, parts, 3)
        mats = [_read_block(lines, m, n, no) for _ in range(d)]
    for extra_no, extra in lines:
        raise MatrixFileError(f"unexpected content after the last block: '{extra}'", extra_no)
    return kind, mats


def read_matrices(path):
    with open(path) as fh:
        return parse_matrices(fh.read())


def read_comments(path):
    """Comment lines (without the leading ``#``) of a file."""
    with open(path) as fh:
        return [line.strip()[1:].strip() for line in fh if line.strip().startswith("#")]
