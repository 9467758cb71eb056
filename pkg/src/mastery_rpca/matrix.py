"""Dense matrix container, SVD and norms.

All numerical routines in the package accept either a :class:`DenseMatrix`
or anything ``numpy.asarray`` turns into a 2-D float array, and return plain
``numpy.ndarray`` objects.  :class:`DenseMatrix` exists to carry row/column
labels through CSV input and output.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np


class NumericalError(RuntimeError):
    """Raised when a factorization fails to converge."""


@dataclass(frozen=True)
class DenseMatrix:
    """Immutable real ``n_rows x n_cols`` matrix with optional labels.

    Rows are students and columns are knowledge topics.
    """

    values: np.ndarray
    row_labels: Optional[tuple] = None
    col_labels: Optional[tuple] = None

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            bad = np.argwhere(~np.isfinite(arr))
            raise ValueError(f"matrix has non-finite entries at {bad[:5].tolist()}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        for name, size in (("row_labels", arr.shape[0]), ("col_labels", arr.shape[1])):
            labels = getattr(self, name)
            if labels is None:
                continue
            labels = tuple(str(x) for x in labels)
            if len(labels) != size:
                raise ValueError(f"{name} has {len(labels)} entries, expected {size}")
            object.__setattr__(self, name, labels)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple:
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def with_values(self, values) -> "DenseMatrix":
        """Same labels, new values of the same shape."""
        return DenseMatrix(values, self.row_labels, self.col_labels)


MatrixLike = Union[DenseMatrix, np.ndarray, Sequence[Sequence[float]]]


def as_array(M: MatrixLike) -> np.ndarray:
    """Return ``M`` as a 2-D float64 array (no copy when possible)."""
    if isinstance(M, DenseMatrix):
        return M.values
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``M = U diag(s) V^T`` with ``r = min(n, m)``."""

    left_vectors: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray

    @property
    def rank(self) -> int:
        return self.singular_values.size

    def reconstruct(self, s: Optional[np.ndarray] = None) -> np.ndarray:
        """Rebuild the matrix, optionally with replacement singular values."""
        s = self.singular_values if s is None else s
        return (self.left_vectors * s) @ self.right_vectors.T


def svd(M: MatrixLike) -> SvdFactors:
    """Thin singular value decomposition with canonical signs.

    Each left singular vector is flipped (together with its right partner)
    so that its largest-magnitude entry is positive.

    Raises
    ------
    NumericalError
        If LAPACK fails to converge.
    """
    A = as_array(M)
    n, m = A.shape
    if n == 0 or m == 0:
        return SvdFactors(np.zeros((n, 0)), np.zeros(0), np.zeros((m, 0)))
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError:
        try:
            # the gesvd driver is slower but more forgiving than gesdd
            from scipy.linalg import svd as _scipy_svd

            U, s, Vt = _scipy_svd(A, full_matrices=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD did not converge for a {n}x{m} matrix") from exc
    V = Vt.T
    pivot = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[pivot, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return SvdFactors(U * signs, s, V * signs)


def frobenius_norm(M: MatrixLike) -> float:
    return float(np.sqrt(np.sum(np.square(as_array(M)))))


def l1_norm(M: MatrixLike) -> float:
    return float(np.sum(np.abs(as_array(M))))


def nuclear_norm(M: MatrixLike) -> float:
    """Sum of singular values."""
    return float(np.sum(svd(M).singular_values))


def numerical_rank(M: MatrixLike, rtol: float = 1e-8) -> int:
    """Count singular values above ``rtol * sigma_1``."""
    s = svd(M).singular_values
    if s.size == 0 or s[0] <= 0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


# -- CSV -------------------------------------------------------------------


def read_csv(path, header: bool = False, row_labels: bool = False) -> DenseMatrix:
    """Read a comma-separated matrix.

    ``header`` and ``row_labels`` say whether the first row holds column
    labels and whether the first column holds row labels.  Nothing is
    auto-detected.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    return _parse_rows(rows, header, row_labels, source=str(path))


def _parse_rows(rows, header, row_labels, source="<csv>") -> DenseMatrix:
    cols = None
    if header:
        if not rows:
            raise ValueError(f"{source}: header requested but file is empty")
        cols = rows[0][1:] if row_labels else rows[0]
        rows = rows[1:]
    rlabels = [] if row_labels else None
    data = []
    for lineno, r in enumerate(rows, start=2 if header else 1):
        if row_labels:
            rlabels.append(r[0])
            r = r[1:]
        try:
            data.append([float(x) for x in r])
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: {exc}") from None
    widths = {len(r) for r in data}
    if len(widths) > 1:
        raise ValueError(f"{source}: ragged rows with widths {sorted(widths)}")
    width = widths.pop() if widths else (len(cols) if cols else 0)
    values = np.array(data, dtype=np.float64).reshape(len(data), width)
    return DenseMatrix(values, rlabels, cols)


def format_float(x: float) -> str:
    """Round-trip decimal text for a float."""
    return repr(float(x))


def to_csv_text(M: MatrixLike) -> str:
    rlab = M.row_labels if isinstance(M, DenseMatrix) else None
    clab = M.col_labels if isinstance(M, DenseMatrix) else None
    A = as_array(M)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if clab is not None:
        w.writerow(([""] if rlab is not None else []) + list(clab))
    for i, row in enumerate(A):
        cells = [format_float(v) for v in row]
        w.writerow(([rlab[i]] if rlab is not None else []) + cells)
    return buf.getvalue()


def write_csv(path, M: MatrixLike) -> None:
    """Write ``M`` as CSV; labels are written when ``M`` carries them."""
    Path(path).write_text(to_csv_text(M))
