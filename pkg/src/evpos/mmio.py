"""Matrix Market reader and writer for dense real square operators.

Reads ``array`` and ``coordinate`` files with field ``real`` (``integer`` is
accepted too) and symmetry ``general``. Writes the ``array`` format with 17
significant digits, so a write/read cycle is bit-exact.
"""

from __future__ import annotations

import io
import os
from pathlib import Path
from typing import Union

import numpy as np

from .errors import MatrixMarketError

PathLike = Union[str, os.PathLike]

_BANNER = "%%MatrixMarket"


def _parse_float(tok: str, line: int, col: int) -> float:
    try:
        x = float(tok)
    except ValueError:
        raise MatrixMarketError(f"cannot parse {tok!r} as a real number", line, col) from None
    if not np.isfinite(x):
        raise MatrixMarketError(f"non-finite value {tok!r}", line, col)
    return x


def _parse_int(tok: str, line: int, col: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise MatrixMarketError(f"expected an integer, got {tok!r}", line, col) from None


def _tokens(text: str):
    """Yield ``(line_no, [(col, token), ...])`` for non-comment, non-blank lines."""
    for ln, raw in enumerate(text.splitlines(), start=1):
        if ln == 1 or raw.lstrip().startswith("%") or not raw.strip():
            continue
        toks = []
        pos = 0
        for tok in raw.split():
            pos = raw.index(tok, pos)
            toks.append((pos + 1, tok))
            pos += len(tok)
        yield ln, toks


def loads(text: str) -> np.ndarray:
    """Parse Matrix Market text into a square float matrix."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith(_BANNER):
        raise MatrixMarketError("missing %%MatrixMarket banner", 1, 1)
    header = lines[0].split()
    if len(header) != 5:
        raise MatrixMarketError("banner must read '%%MatrixMarket matrix <format> <field> <symmetry>'", 1, 1)
    _, obj, fmt, fld, sym = (h.lower() for h in header)
    if obj != "matrix":
        raise MatrixMarketError(f"unsupported object {obj!r}", 1, lines[0].lower().index(obj) + 1)
    if fmt not in ("array", "coordinate"):
        raise MatrixMarketError(f"unsupported format {fmt!r}", 1, lines[0].lower().index(fmt) + 1)
    if fld not in ("real", "integer", "double"):
        raise MatrixMarketError(f"unsupported field {fld!r}; only real data is accepted", 1, lines[0].lower().index(fld) + 1)
    if sym != "general":
        raise MatrixMarketError(f"unsupported symmetry {sym!r}", 1, lines[0].lower().rindex(sym) + 1)

    rows = _tokens(text)
    try:
        ln, size = next(rows)
    except StopIteration:
        raise MatrixMarketError("missing size line", len(lines) + 1, 1) from None
    want = 2 if fmt == "array" else 3
    if len(size) != want:
        raise MatrixMarketError(f"size line needs {want} integers, got {len(size)}", ln, 1)
    dims = [_parse_int(t, ln, c) for c, t in size]
    m, n = dims[0], dims[1]
    if m <= 0 or n <= 0:
        raise MatrixMarketError("dimensions must be positive", ln, 1)
    if m != n:
        raise MatrixMarketError(f"operator must be square, got {m}x{n}", ln, size[1][0])

    A = np.zeros((n, n))
    if fmt == "array":
        vals = []
        for ln, toks in rows:
            for c, t in toks:
                vals.append(_parse_float(t, ln, c))
                if len(vals) > n * n:
                    raise MatrixMarketError(f"more than {n * n} entries", ln, c)
        if len(vals) != n * n:
            raise MatrixMarketError(f"expected {n * n} entries, found {len(vals)}", len(lines), 1)
        A[:, :] = np.array(vals).reshape((n, n), order="F")
        return A

    nnz = dims[2]
    if nnz < 0:
        raise MatrixMarketError("negative entry count", ln, size[2][0])
    count = 0
    for ln, toks in rows:
        if len(toks) != 3:
            raise MatrixMarketError(f"coordinate entry needs 3 fields, got {len(toks)}", ln, toks[0][0])
        (ci, ti), (cj, tj), (cv, tv) = toks
        i, j = _parse_int(ti, ln, ci), _parse_int(tj, ln, cj)
        if not 1 <= i <= n:
            raise MatrixMarketError(f"row index {i} out of range 1..{n}", ln, ci)
        if not 1 <= j <= n:
            raise MatrixMarketError(f"column index {j} out of range 1..{n}", ln, cj)
        A[i - 1, j - 1] += _parse_float(tv, ln, cv)
        count += 1
        if count > nnz:
            raise MatrixMarketError(f"more than the declared {nnz} entries", ln, ci)
    if count != nnz:
        raise MatrixMarketError(f"declared {nnz} entries, found {count}", len(lines), 1)
    return A


def read(path: PathLike) -> np.ndarray:
    with open(path, "r", encoding="ascii", newline="") as fh:
        return loads(fh.read())


def dumps(A: np.ndarray, comment: str = "") -> str:
    """Array-format text with entries in column-major order."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    out = io.StringIO()
    out.write("%%MatrixMarket matrix array real general\n")
    for line in comment.splitlines():
        out.write(f"% {line}\n")
    out.write(f"{A.shape[0]} {A.shape[1]}\n")
    for x in A.ravel(order="F"):
        # +0.0 normalizes negative zero so the text is canonical
        out.write("%.17g\n" % (x + 0.0))
    return out.getvalue()


def atomic_write_text(path: PathLike, text: str) -> None:
    """Write via a temporary sibling file and rename it into place."""
    path = Path(path)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write(path: PathLike, A: np.ndarray, comment: str = "") -> None:
    atomic_write_text(path, dumps(A, comment))
