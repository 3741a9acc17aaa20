"""
Overflow-free magnitudes in (e, f) form.

A magnitude is a pair (e, f) standing for 2**e * f with 1 <= f < 2; zero is
(-inf, 1). Exponents are integral binary64 values, so neither norms nor
singular values can overflow or underflow.

Column norms are computed by:
- accumulating s lane-wise partial sums of squares in (e, f) form
- sorting the final partial sums with a bitonic network
- reducing them (sequentially by default, or pairwise)
- taking an (e, f) square root
"""

import math
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .batched_evd import naive_hypot
from .constants import DEFAULT_LANES
from .errors import NonFiniteInputError
from .lanes import LaneBackend, get_backend
from .splitform import SplitMatrix, pad_length

NEG_INF = -math.inf


class EFNumber(NamedTuple):
    """2**e * f; tuple comparison is the lexicographic order on (e, f)."""
    e: float
    f: float

    def to_float(self) -> float:
        if self.e == NEG_INF:
            return 0.0
        try:
            return math.ldexp(self.f, int(self.e))
        except OverflowError:
            return math.inf

    @classmethod
    def from_float(cls, x: float) -> "EFNumber":
        if x == 0:
            return ZERO
        m, k = math.frexp(abs(x))
        return cls(float(k - 1), 2.0 * m)


ZERO = EFNumber(NEG_INF, 1.0)


class EFVec:
    """Lane-paired exponent and fraction arrays."""

    def __init__(self, e, f):
        self.e = np.asarray(e, dtype=np.float64)
        self.f = np.asarray(f, dtype=np.float64)

    def numbers(self) -> List[EFNumber]:
        return [EFNumber(float(e), float(f)) for e, f in zip(self.e.ravel(), self.f.ravel())]

    def __repr__(self) -> str:
        return f"EFVec(e={self.e!r}, f={self.f!r})"


def _odd_bit(e: np.ndarray) -> np.ndarray:
    """Lowest bit of an integral exponent as 0.0/1.0; 0 for infinities."""
    e = np.asarray(e, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        return np.where(np.isfinite(e) & (np.fmod(e, 2.0) != 0), 1.0, 0.0)


def ef_less(ae, af, be, bf) -> np.ndarray:
    return (np.less(ae, be)) | ((np.equal(ae, be)) & np.less(af, bf))


def ef_normalize(e, f, backend: Optional[LaneBackend] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Bring a non-normalized (e, f >= 0) back to f in [1, 2)."""
    L = backend or get_backend()
    return L.add(e, L.getexp(f)), L.getmant(f)


def ef_add_vec(ae, af, be, bf, backend: Optional[LaneBackend] = None) -> Tuple[np.ndarray, np.ndarray]:
    L = backend or get_backend()
    ae, af, be, bf = (np.asarray(v, dtype=np.float64) for v in (ae, af, be, bf))
    swap = ef_less(be, bf, ae, af)
    ae, be = np.where(swap, be, ae), np.where(swap, ae, be)
    af, bf = np.where(swap, bf, af), np.where(swap, af, bf)
    # max filters the NaN of (-inf) - (-inf)
    scale = L.scalef(1.0, L.vmax(L.sub(ae, be), NEG_INF))
    return ef_normalize(be, L.fmadd(scale, af, bf), L)


def ef_add(a: EFNumber, b: EFNumber, backend: Optional[LaneBackend] = None) -> EFNumber:
    e, f = ef_add_vec(a.e, a.f, b.e, b.f, backend)
    return EFNumber(float(e), float(f))


def ef_sqrt_vec(e, f, backend: Optional[LaneBackend] = None) -> Tuple[np.ndarray, np.ndarray]:
    L = backend or get_backend()
    lsb = _odd_bit(e)
    even_e = L.sub(e, lsb)
    return L.scalef(even_e, -1.0), L.sqrt(L.scalef(f, lsb))


def ef_sqrt(x: EFNumber, backend: Optional[LaneBackend] = None) -> EFNumber:
    e, f = ef_sqrt_vec(x.e, x.f, backend)
    return EFNumber(float(e), float(f))


def ef_from_float(x, backend: Optional[LaneBackend] = None) -> Tuple[np.ndarray, np.ndarray]:
    L = backend or get_backend()
    return L.getexp(x), L.getmant(x)


def ef_to_float(e, f, backend: Optional[LaneBackend] = None) -> np.ndarray:
    L = backend or get_backend()
    return L.scalef(f, e)


# -- bitonic sorting -----------------------------------------------------------


def bitonic_network(s: int) -> List[Tuple[Tuple[int, ...], np.ndarray]]:
    """
    Stages of the bitonic sorting network for s lanes.

    Each stage is (partner lane of every lane, lanes that keep the maximum).
    """
    if s < 2 or s & (s - 1):
        raise ValueError(f"bitonic network needs a power of two, got {s}")
    lanes = np.arange(s)
    stages = []
    k = 2
    while k <= s:
        stages.append((tuple(int(p) for p in lanes ^ (k - 1)), (lanes & (k // 2)) != 0))
        j = k // 4
        while j >= 1:
            stages.append((tuple(int(p) for p in lanes ^ j), (lanes & j) != 0))
            j //= 2
        k *= 2
    return stages


def bitonic_sort_ef(v: EFVec, backend: Optional[LaneBackend] = None) -> EFVec:
    """Sort (e, f) lanes non-decreasingly in the lexicographic order."""
    L = backend or get_backend()
    e, f = v.e, v.f
    for partner, keep_max in bitonic_network(e.shape[-1]):
        pe, pf = L.permute(partner, e), L.permute(partner, f)
        le = (pe > e) | ((pe == e) & (f <= pf))
        min_e, min_f = np.where(le, e, pe), np.where(le, f, pf)
        max_e, max_f = np.where(le, pe, e), np.where(le, pf, f)
        e, f = L.blend(keep_max, min_e, max_e), L.blend(keep_max, min_f, max_f)
    return EFVec(e, f)


# -- reductions ------------------------------------------------------------------


def reduce_sequential_ef(v: EFVec, backend: Optional[LaneBackend] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Sum the lanes from lane 0 upwards."""
    L = backend or get_backend()
    e, f = v.e[..., 0], v.f[..., 0]
    for lane in range(1, v.e.shape[-1]):
        e, f = ef_add_vec(e, f, v.e[..., lane], v.f[..., lane], L)
    return e, f


def reduce_pairwise_ef(v: EFVec, backend: Optional[LaneBackend] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Halve the lane count repeatedly by adding even lanes to odd lanes."""
    L = backend or get_backend()
    e, f = v.e, v.f
    width = e.shape[-1]
    while width > 1:
        evens = [lane % 2 == 0 for lane in range(width)]
        odds = [not b for b in evens]
        half = width // 2
        ae, af = L.compress(evens, e)[..., :half], L.compress(evens, f)[..., :half]
        be, bf = L.compress(odds, e)[..., :half], L.compress(odds, f)[..., :half]
        e, f = ef_add_vec(ae, af, be, bf, L)
        width = half
    return e[..., 0], f[..., 0]


# -- norms ----------------------------------------------------------------------------


def _require_finite(x: np.ndarray) -> None:
    if not np.all(np.isfinite(x)):
        raise NonFiniteInputError("non-finite element in a norm computation")


def _padded(x: np.ndarray, s: int) -> np.ndarray:
    m = x.shape[-1]
    mt = pad_length(m, s)
    if mt == m:
        return x
    out = np.zeros(x.shape[:-1] + (mt,))
    out[..., :m] = x
    return out


def accumulate_ef(x, s: int = DEFAULT_LANES, backend: Optional[LaneBackend] = None) -> EFVec:
    """Lane-wise partial sums of squares of the rows of x, in (e, f) form."""
    L = backend or get_backend()
    x = _padded(np.asarray(x, dtype=np.float64), s)
    shape = x.shape[:-1] + (s,)
    e = np.full(shape, NEG_INF)
    f = np.ones(shape)
    for start in range(0, x.shape[-1], s):
        y = x[..., start:start + s]
        lsb = _odd_bit(e)
        e1 = L.sub(e, lsb)
        f1 = L.scalef(f, lsb)
        e_sq = L.scalef(L.getexp(y), 1.0)
        e_max = L.vmax(e_sq, e1)
        d_sq = L.scalef(L.vmax(L.sub(e_sq, e_max), NEG_INF), -1.0)
        d_acc = L.vmax(L.sub(e1, e_max), NEG_INF)
        fy = L.scalef(L.getmant(y), d_sq)
        facc = L.scalef(f1, d_acc)
        total = L.fmadd(fy, fy, facc)
        e, f = ef_normalize(e_max, total, L)
    return EFVec(e, f)


def frob_norms_ef(
    x,
    s: int = DEFAULT_LANES,
    reduction: str = "sequential",
    backend: Optional[LaneBackend] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """(e, f) Frobenius norms of every row of x (the trailing axis is summed)."""
    L = backend or get_backend()
    x = np.asarray(x, dtype=np.float64)
    _require_finite(x)
    partial = bitonic_sort_ef(accumulate_ef(x, s, L), L)
    if reduction == "pairwise":
        e, f = reduce_pairwise_ef(partial, L)
    elif reduction == "sequential":
        e, f = reduce_sequential_ef(partial, L)
    else:
        raise ValueError(f"Unknown reduction: {reduction}. Available: ['sequential', 'pairwise']")
    return ef_sqrt_vec(e, f, L)


def frob_norm_ef(x, s: int = DEFAULT_LANES, reduction: str = "sequential",
                 backend: Optional[LaneBackend] = None) -> EFNumber:
    e, f = frob_norms_ef(np.asarray(x, dtype=np.float64)[None, :], s, reduction, backend)
    return EFNumber(float(e[0]), float(f[0]))


def combine_complex(e_re, f_re, e_im, f_im, backend: Optional[LaneBackend] = None) -> Tuple[np.ndarray, np.ndarray]:
    """hypot of two (e, f) magnitudes, brought to a common exponent first."""
    L = backend or get_backend()
    e = L.vmax(e_re, e_im)
    x = L.scalef(f_re, L.vmax(L.sub(e_re, e), NEG_INF))
    y = L.scalef(f_im, L.vmax(L.sub(e_im, e), NEG_INF))
    return ef_normalize(e, naive_hypot(x, y, L), L)


def frob_norms_complex(re, im, s: int = DEFAULT_LANES, reduction: str = "sequential",
                       backend: Optional[LaneBackend] = None) -> Tuple[np.ndarray, np.ndarray]:
    L = backend or get_backend()
    e_re, f_re = frob_norms_ef(re, s, reduction, L)
    e_im, f_im = frob_norms_ef(im, s, reduction, L)
    return combine_complex(e_re, f_re, e_im, f_im, L)


def frob_norm_complex(re, im, s: int = DEFAULT_LANES, reduction: str = "sequential",
                      backend: Optional[LaneBackend] = None) -> EFNumber:
    e, f = frob_norms_complex(np.asarray(re)[None, :], np.asarray(im)[None, :], s, reduction, backend)
    return EFNumber(float(e[0]), float(f[0]))


def frob_norms_dot(x, s: int = DEFAULT_LANES, backend: Optional[LaneBackend] = None) -> np.ndarray:
    """Plain sum of squares by fma and one square root; overflows to inf."""
    L = backend or get_backend()
    x = _padded(np.asarray(x, dtype=np.float64), s)
    ssq = np.zeros(x.shape[:-1] + (s,))
    for start in range(0, x.shape[-1], s):
        y = x[..., start:start + s]
        ssq = L.fmadd(y, y, ssq)
    return L.sqrt(L.reduce_add(ssq))


def frob_norm_dot(x, s: int = DEFAULT_LANES, backend: Optional[LaneBackend] = None) -> float:
    return float(frob_norms_dot(np.asarray(x, dtype=np.float64)[None, :], s, backend)[0])


def max_norm(planes: Sequence[np.ndarray], backend: Optional[LaneBackend] = None) -> float:
    """Largest |entry| over all planes; NaN counts as infinity, empty input as 0."""
    L = backend or get_backend()
    best = 0.0
    for p in planes:
        p = np.asarray(p, dtype=np.float64)
        if p.size:
            # vmin returns inf where abs(y) is NaN
            best = max(best, float(np.max(L.vmin(L.abs(p), math.inf))))
    return best


def max_norm_split(sm: SplitMatrix, backend: Optional[LaneBackend] = None) -> float:
    return max_norm(sm.planes(), backend)


# -- column-norm engines for the SVD driver ------------------------------------------


class EFNormEngine:
    """Default column-norm engine: (e, f) norms that cannot overflow."""

    def __init__(self, s: int = DEFAULT_LANES, reduction: str = "sequential",
                 backend: Optional[LaneBackend] = None):
        self.s = s
        self.reduction = reduction
        self.backend = backend

    def __call__(self, re: np.ndarray, im: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
        if im is None:
            return frob_norms_ef(re, self.s, self.reduction, self.backend)
        return frob_norms_complex(re, im, self.s, self.reduction, self.backend)


class DotNormEngine:
    """Baseline engine; an overflowed norm is reported as e = +inf."""

    def __init__(self, s: int = DEFAULT_LANES, backend: Optional[LaneBackend] = None):
        self.s = s
        self.backend = backend

    def __call__(self, re: np.ndarray, im: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
        L = self.backend or get_backend()
        v = frob_norms_dot(re, self.s, L)
        if im is not None:
            v = naive_hypot(v, frob_norms_dot(im, self.s, L), L)
        return ef_from_float(v, L)


def norm_overflowed(e: np.ndarray, f: np.ndarray) -> np.ndarray:
    return (np.asarray(e) == math.inf) | ~np.isfinite(f)
