"""
Split complex storage.

A complex column is kept as two real columns (real parts, imaginary parts),
each zero-padded to a multiple of the lane count s. A matrix is held as an
(n, m_tilde) array whose row j is column j, i.e. column-major storage of the
m_tilde x n matrix. Real matrices use the same container with im = None.
"""

from typing import Optional, Tuple

import numpy as np

from .constants import DEFAULT_LANES, MERGE_PERMUTATION, SPLIT_PERMUTATION
from .errors import FormatError, NonFiniteInputError
from .lanes import LaneBackend, get_backend, high_to_low

# 4 interleaved complex values -> 4 real parts, 4 imaginary parts
SPLIT_LANES = high_to_low(SPLIT_PERMUTATION)
MERGE_LANES = high_to_low(MERGE_PERMUTATION)


def pad_length(m: int, s: int) -> int:
    if m % s == 0:
        return m
    return m + (s - m % s)


class SplitMatrix:
    """Column-major split-form matrix with zero padding rows."""

    def __init__(self, re: np.ndarray, im: Optional[np.ndarray], m: int, s: int = DEFAULT_LANES):
        re = np.ascontiguousarray(re, dtype=np.float64)
        if re.ndim != 2:
            raise FormatError(f"split planes must be 2-D, got shape {re.shape}")
        if im is not None:
            im = np.ascontiguousarray(im, dtype=np.float64)
            if im.shape != re.shape:
                raise FormatError(f"re/im shape mismatch: {re.shape} vs {im.shape}")
        if re.shape[1] % s or m > re.shape[1]:
            raise FormatError(f"padded length {re.shape[1]} is not a multiple of {s} holding {m} rows")
        self.re = re
        self.im = im
        self.m = m
        self.s = s

    @property
    def n(self) -> int:
        return self.re.shape[0]

    @property
    def m_tilde(self) -> int:
        return self.re.shape[1]

    @property
    def is_complex(self) -> bool:
        return self.im is not None

    def planes(self):
        return (self.re,) if self.im is None else (self.re, self.im)

    def copy(self) -> "SplitMatrix":
        return SplitMatrix(self.re.copy(), None if self.im is None else self.im.copy(), self.m, self.s)

    def padding_is_zero(self) -> bool:
        return all(not np.any(p[:, self.m:]) for p in self.planes())

    def all_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(p))) for p in self.planes())

    def to_dense(self) -> np.ndarray:
        return merge_columns(self)

    def __repr__(self) -> str:
        kind = "complex" if self.is_complex else "real"
        return f"SplitMatrix({kind}, m={self.m}, m_tilde={self.m_tilde}, n={self.n}, s={self.s})"


def identity(n: int, s: int = DEFAULT_LANES, is_complex: bool = False) -> SplitMatrix:
    mt = pad_length(n, s)
    re = np.zeros((n, mt))
    re[np.arange(n), np.arange(n)] = 1.0
    return SplitMatrix(re, np.zeros((n, mt)) if is_complex else None, n, s)


def _check_finite(a: np.ndarray) -> None:
    bad = ~np.isfinite(a)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise NonFiniteInputError(f"non-finite entry {a[i, j]} at row {i}, column {j}")


def split_columns(
    matrix: np.ndarray,
    s: int = DEFAULT_LANES,
    is_complex: Optional[bool] = None,
    backend: Optional[LaneBackend] = None,
) -> SplitMatrix:
    """
    Convert an m x n (interleaved complex or real) matrix into split form.

    Args:
        matrix: dense 2-D array
        s: lane count the padding is derived from
        is_complex: force complex (True) or real (False) storage; by default
            follows the dtype of matrix

    Returns:
        SplitMatrix with zero padding rows
    """
    a = np.asarray(matrix)
    if a.ndim != 2:
        raise FormatError(f"expected a 2-D matrix, got shape {a.shape}")
    _check_finite(a)
    if is_complex is None:
        is_complex = np.iscomplexobj(a)
    m, n = a.shape
    mt = pad_length(m, s)
    if not is_complex:
        if np.iscomplexobj(a):
            raise FormatError("complex input cannot be stored as a real matrix")
        re = np.zeros((n, mt))
        re[:, :m] = a.T
        return SplitMatrix(re, None, m, s)

    L = backend or get_backend()
    width = pad_length(mt, 4)
    inter = np.zeros((n, 2 * width))
    inter[:, :2 * m] = np.ascontiguousarray(a.astype(np.complex128).T).view(np.float64)
    lanes = L.permute(SPLIT_LANES, inter.reshape(n, -1, 8))
    re = lanes[..., :4].reshape(n, width)[:, :mt]
    im = lanes[..., 4:].reshape(n, width)[:, :mt]
    return SplitMatrix(re, im, m, s)


def merge_columns(sm: SplitMatrix, backend: Optional[LaneBackend] = None) -> np.ndarray:
    """Inverse of split_columns on the logical m x n block."""
    if sm.im is None:
        return sm.re[:, :sm.m].T.copy()
    L = backend or get_backend()
    width = pad_length(sm.m_tilde, 4)
    re = np.zeros((sm.n, width))
    im = np.zeros((sm.n, width))
    re[:, :sm.m_tilde] = sm.re
    im[:, :sm.m_tilde] = sm.im
    halves = np.concatenate([re.reshape(sm.n, -1, 4), im.reshape(sm.n, -1, 4)], axis=-1)
    inter = np.ascontiguousarray(L.permute(MERGE_LANES, halves).reshape(sm.n, 2 * width))
    return inter.view(np.complex128)[:, :sm.m].T.copy()


def border(sm: SplitMatrix, multiple: int) -> Tuple[SplitMatrix, int]:
    """
    Widen sm to a column count divisible by `multiple`.

    The appended columns are canonical unit vectors supported only in
    appended zero rows, so they are exactly orthogonal to every data column.

    Returns:
        (bordered matrix, number of data columns)
    """
    n = sm.n
    n_tilde = pad_length(n, multiple)
    extra = n_tilde - n
    if extra == 0:
        return sm, n
    m = sm.m + extra
    mt = pad_length(m, sm.s)
    planes = []
    for p in sm.planes():
        q = np.zeros((n_tilde, mt))
        q[:n, :sm.m] = p[:, :sm.m]
        planes.append(q)
    planes[0][np.arange(n, n_tilde), sm.m + np.arange(extra)] = 1.0
    return SplitMatrix(planes[0], planes[1] if sm.is_complex else None, m, sm.s), n
