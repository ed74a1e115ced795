"""Matrix CSV format shared by every file the package reads or writes.

The first line is ``# rows=<r> cols=<c>``; then ``r`` lines of ``c``
comma-separated decimal values. Vectors are stored as single-column
matrices. Values are written with ``repr`` so files round-trip exactly.
"""

import re
from pathlib import Path

import numpy as np

from .errors import MalformedMatrixError

_HEADER = re.compile(r"^#\s*rows=(\d+)\s+cols=(\d+)\s*$")


def format_matrix(M) -> str:
    A = np.asarray(M, dtype=float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    lines = [f"# rows={A.shape[0]} cols={A.shape[1]}"]
    lines.extend(",".join(repr(float(v)) for v in row) for row in A)
    return "\n".join(lines) + "\n"


def write_matrix(path, M) -> None:
    Path(path).write_text(format_matrix(M))


def parse_matrix(text: str, source="<string>") -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedMatrixError(f"{source}: empty file")
    head = _HEADER.match(lines[0].strip())
    if head is None:
        raise MalformedMatrixError(f"{source}: missing '# rows=<r> cols=<c>' header")
    rows, cols = int(head.group(1)), int(head.group(2))
    body = lines[1:]
    if len(body) != rows:
        raise MalformedMatrixError(f"{source}: header says {rows} rows, found {len(body)}")
    out = np.empty((rows, cols))
    for i, line in enumerate(body):
        fields = line.split(",")
        if len(fields) != cols:
            raise MalformedMatrixError(
                f"{source}: line {i + 2} has {len(fields)} values, expected {cols}"
            )
        try:
            out[i] = [float(f) for f in fields]
        except ValueError as exc:
            raise MalformedMatrixError(f"{source}: line {i + 2}: {exc}") from None
    if not np.all(np.isfinite(out)):
        raise MalformedMatrixError(f"{source}: non-finite value")
    return out


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    return parse_matrix(path.read_text(), source=str(path))


def read_vector(path) -> np.ndarray:
    A = read_matrix(path)
    if A.shape[1] != 1:
        raise MalformedMatrixError(f"{path}: expected a single-column vector, got {A.shape[1]} columns")
    return A[:, 0]
