"""
Whole-array numpy backend.

numpy has no fused multiply-add, so fmadd is emulated: an exact product
(Dekker splitting) and an exact sum feed a round-to-odd addition, and the
final round-to-nearest then equals the single rounding of a*b + c. Lanes
whose magnitudes fall outside the window where the error-free
transformations are exact are first shifted by 2**-512 or 2**512; the few
that still do not qualify take the exact rational path.
"""

from functools import wraps

import numpy as np

from . import register_backend
from .base import LaneBackend, ArrayLike, as_lanes, exact_fma

_SPLITTER = 134217729.0  # 2**27 + 1
_SHIFTS = (0, -512, 512)
_TINY = 2.0 ** -1022


def _quiet(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        with np.errstate(all="ignore"):
            return fn(*args, **kwargs)
    return wrapper


def _two_sum(a: np.ndarray, b: np.ndarray):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a: np.ndarray):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a: np.ndarray, b: np.ndarray):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _round_to_odd_sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    s, err = _two_sum(a, b)
    even = (s.view(np.uint64) & np.uint64(1)) == 0
    toward = np.where(err > 0, np.inf, -np.inf)
    return np.where((err != 0) & even, np.nextafter(s, toward), s)


def _exponent(x: np.ndarray) -> np.ndarray:
    _, k = np.frexp(x)
    return np.where(x == 0, -4096, k - 1)


def _safe(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    finite = np.isfinite(a) & np.isfinite(b) & np.isfinite(c)
    ea, eb = _exponent(a), _exponent(b)
    small = (np.abs(a) < 2.0 ** 995) & (np.abs(b) < 2.0 ** 995) & (np.abs(c) < 2.0 ** 1020)
    zero_product = (a == 0) | (b == 0)
    window = zero_product | ((ea + eb > -900) & (ea + eb < 1020))
    return finite & small & window


def _fma_kernel(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    uh, ul = _two_prod(a, b)
    th, tl = _two_sum(c, uh)
    return th + _round_to_odd_sum(tl, ul)


@register_backend("vector")
class VectorBackend(LaneBackend):
    """numpy evaluation of whole lane arrays at once."""

    @_quiet
    def add(self, a, b):
        return np.add(as_lanes(a), as_lanes(b))

    @_quiet
    def sub(self, a, b):
        return np.subtract(as_lanes(a), as_lanes(b))

    @_quiet
    def mul(self, a, b):
        return np.multiply(as_lanes(a), as_lanes(b))

    @_quiet
    def div(self, a, b):
        return np.divide(as_lanes(a), as_lanes(b))

    @_quiet
    def sqrt(self, a):
        return np.sqrt(as_lanes(a))

    @_quiet
    def vmin(self, a, b):
        a, b = as_lanes(a), as_lanes(b)
        return np.where(a < b, a, b)

    @_quiet
    def vmax(self, a, b):
        a, b = as_lanes(a), as_lanes(b)
        return np.where(a > b, a, b)

    @_quiet
    def scalef(self, x, e):
        x, e = np.broadcast_arrays(as_lanes(x), as_lanes(e))
        k = np.clip(np.floor(np.where(np.isnan(e), 0.0, e)), -2200, 2200).astype(np.int32)
        r = np.ldexp(x, k)
        invalid = np.isnan(e) | (np.isinf(x) & (e == -np.inf)) | ((x == 0) & (e == np.inf))
        return np.where(invalid, np.nan, r)

    @_quiet
    def getexp(self, x):
        x = np.abs(as_lanes(x))
        _, k = np.frexp(x)
        r = (k - 1).astype(np.float64)
        r = np.where(x == 0, -np.inf, r)
        r = np.where(np.isinf(x), np.inf, r)
        return np.where(np.isnan(x), np.nan, r)

    @_quiet
    def getmant(self, x):
        x = np.abs(as_lanes(x))
        m, _ = np.frexp(x)
        return np.where((x == 0) | np.isinf(x), 1.0, 2.0 * m)

    @_quiet
    def fmadd(self, a, b, c):
        a, b, c = (np.array(v, dtype=np.float64) for v in np.broadcast_arrays(as_lanes(a), as_lanes(b), as_lanes(c)))
        # only a and c get shifted, so keep the larger factor in a
        swap = np.abs(b) > np.abs(a)
        a, b = np.where(swap, b, a), np.where(swap, a, b)
        out = np.empty_like(a)
        todo = np.ones(a.shape, dtype=bool)
        for shift in _SHIFTS:
            if not todo.any():
                break
            if shift == 0:
                sa, sc, scale = a, c, 1.0
                ok = todo & _safe(a, b, c)
            else:
                scale = 2.0 ** shift
                sa, sc = a * scale, c * scale
                # the shift must be exact on the way in and on the way out
                exact_in = (sa / scale == a) & (sc / scale == c)
                ok = todo & exact_in & _safe(sa, b, sc)
            if ok.all():
                # common case: no gather/scatter
                r = _fma_kernel(sa, b, sc)
                back = r / scale
                normal = (r == 0) | ((np.abs(r) >= _TINY) & (np.abs(back) >= _TINY))
                out = np.where(normal, np.where(r == 0, a * b + c, back), out)
                todo = ~normal
                continue
            if not ok.any():
                continue
            r = _fma_kernel(sa[ok], b[ok], sc[ok])
            back = r / scale
            # results in the subnormal range would be rounded twice
            normal = (r == 0) | ((np.abs(r) >= _TINY) & (np.abs(back) >= _TINY))
            idx = np.flatnonzero(ok)
            good = idx[normal]
            out.flat[good] = np.where(r[normal] == 0, a.flat[good] * b.flat[good] + c.flat[good], back[normal])
            todo.flat[good] = False
        for i in np.flatnonzero(todo):
            out.flat[i] = exact_fma(float(a.flat[i]), float(b.flat[i]), float(c.flat[i]))
        return out

    @_quiet
    def reduce_add(self, x):
        x = as_lanes(x)
        acc = x[..., 0].copy()
        for lane in range(1, x.shape[-1]):
            acc = acc + x[..., lane]
        return acc

    @_quiet
    def reduce_max(self, x):
        x = as_lanes(x)
        acc = x[..., 0].copy()
        for lane in range(1, x.shape[-1]):
            acc = self.vmax(acc, x[..., lane])
        return acc
