"""
Base Lane Backend Interface

A backend evaluates lane-wise binary64 arithmetic on numpy arrays. The
trailing axis of every array holds the s lanes of one vector; leading axes
are batches of independent vectors. All backends must implement:
- add/sub/mul/div/sqrt with IEEE-754 non-stop, round-to-nearest-even semantics
- fmadd (fl(a*b + c) with a single rounding)
- vmin/vmax that return their second argument when the first one is NaN
- scalef/getexp/getmant
- reduce_add (fixed left-to-right lane order) and reduce_max

Sign-bit manipulation, comparisons, masks and data movement never round,
so they are shared here by every backend.
"""

import math
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

ArrayLike = Union[np.ndarray, float]
MaskLike = Union[int, np.ndarray, Sequence[bool]]

SIGN_BIT = np.uint64(0x8000000000000000)
ONE_BIT = np.uint64(1)


def as_lanes(x: ArrayLike) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


def exact_fma(a: float, b: float, c: float) -> float:
    """Correctly rounded a*b + c on Python floats, via exact rationals."""
    if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(c)):
        if math.isfinite(a) and math.isfinite(b):
            return c
        return a * b + c
    exact = Fraction(a) * Fraction(b) + Fraction(c)
    if exact == 0:
        # a*b == -c exactly; the plain expression yields the IEEE zero sign
        return a * b + c
    try:
        return float(exact)
    except OverflowError:
        return math.copysign(math.inf, exact)


class LaneBackend(ABC):
    """Base class for lane arithmetic backends."""

    _backend_name: str = ""

    @property
    def name(self) -> str:
        return self._backend_name

    # -- rounding arithmetic -------------------------------------------------

    @abstractmethod
    def add(self, a: ArrayLike, b: ArrayLike) -> np.ndarray:
        pass

    @abstractmethod
    def sub(self, a: ArrayLike, b: ArrayLike) -> np.ndarray:
        pass

    @abstractmethod
    def mul(self, a: ArrayLike, b: ArrayLike) -> np.ndarray:
        pass

    @abstractmethod
    def div(self, a: ArrayLike, b: ArrayLike) -> np.ndarray:
        pass

    @abstractmethod
    def sqrt(self, a: ArrayLike) -> np.ndarray:
        pass

    @abstractmethod
    def fmadd(self, a: ArrayLike, b: ArrayLike, c: ArrayLike) -> np.ndarray:
        """
        Fused multiply-add.

        Args:
            a, b, c: lane arrays (broadcastable)

        Returns:
            fl(a*b + c) rounded once per lane
        """
        pass

    def fmsub(self, a: ArrayLike, b: ArrayLike, c: ArrayLike) -> np.ndarray:
        """fl(a*b - c)."""
        return self.fmadd(a, b, self.neg(c))

    def fnmadd(self, a: ArrayLike, b: ArrayLike, c: ArrayLike) -> np.ndarray:
        """fl(-(a*b) + c)."""
        return self.fmadd(self.neg(a), b, c)

    @abstractmethod
    def vmin(self, a: ArrayLike, b: ArrayLike) -> np.ndarray:
        """a < b ? a : b, so a NaN in a yields b."""
        pass

    @abstractmethod
    def vmax(self, a: ArrayLike, b: ArrayLike) -> np.ndarray:
        """a > b ? a : b, so a NaN in a yields b."""
        pass

    @abstractmethod
    def scalef(self, x: ArrayLike, e: ArrayLike) -> np.ndarray:
        """
        x * 2**floor(e) with one rounding.

        scalef(x, -inf) is a signed zero for finite x, overflow gives a
        signed infinity; NaN results for NaN e, for (inf, -inf) and (0, +inf).
        """
        pass

    @abstractmethod
    def getexp(self, x: ArrayLike) -> np.ndarray:
        """floor(lg|x|) as a float; -inf for zeros, +inf for infinities."""
        pass

    @abstractmethod
    def getmant(self, x: ArrayLike) -> np.ndarray:
        """Significand of |x| in [1, 2); 1 for zeros and infinities."""
        pass

    @abstractmethod
    def reduce_add(self, x: ArrayLike) -> np.ndarray:
        """Sum over the lane axis, strictly lane 0 first."""
        pass

    @abstractmethod
    def reduce_max(self, x: ArrayLike) -> np.ndarray:
        pass

    # -- sign bits ------------------------------------------------------------

    @staticmethod
    def _bits(x: ArrayLike) -> np.ndarray:
        return np.array(x, dtype=np.float64).view(np.uint64)

    @staticmethod
    def _float(bits: np.ndarray) -> np.ndarray:
        return np.array(bits, dtype=np.uint64).view(np.float64)

    def abs(self, x: ArrayLike) -> np.ndarray:
        return self._float(self._bits(x) & ~SIGN_BIT)

    def sign(self, x: ArrayLike) -> np.ndarray:
        """Signed zero carrying the sign bit of x."""
        return self._float(self._bits(x) & SIGN_BIT)

    def or_sign(self, x: ArrayLike, s: ArrayLike) -> np.ndarray:
        """Bitwise or; with s from sign() and x >= 0 this transfers the sign."""
        return self._float(np.bitwise_or(self._bits(x), self._bits(s)))

    def xor_sign(self, x: ArrayLike, s: ArrayLike) -> np.ndarray:
        """Bitwise xor; flips the sign of x where s carries a sign bit."""
        return self._float(np.bitwise_xor(self._bits(x), self._bits(s)))

    def neg(self, x: ArrayLike) -> np.ndarray:
        return self._float(self._bits(x) ^ SIGN_BIT)

    # -- comparisons -------------------------------------------------------------

    @staticmethod
    def lt(a: ArrayLike, b: ArrayLike) -> np.ndarray:
        return np.less(as_lanes(a), as_lanes(b))

    @staticmethod
    def le(a: ArrayLike, b: ArrayLike) -> np.ndarray:
        return np.less_equal(as_lanes(a), as_lanes(b))

    @staticmethod
    def eq(a: ArrayLike, b: ArrayLike) -> np.ndarray:
        return np.equal(as_lanes(a), as_lanes(b))

    # -- masks --------------------------------------------------------------------

    @staticmethod
    def pack_mask(bits: np.ndarray) -> np.ndarray:
        """Pack booleans over the lane axis into uint64 words (bit l = lane l)."""
        bits = np.asarray(bits, dtype=bool)
        weights = np.left_shift(ONE_BIT, np.arange(bits.shape[-1], dtype=np.uint64))
        return np.sum(np.where(bits, weights, np.uint64(0)), axis=-1, dtype=np.uint64)

    @staticmethod
    def unpack_mask(words: MaskLike, s: int) -> np.ndarray:
        if isinstance(words, np.ndarray) and words.dtype == bool:
            return words
        if isinstance(words, (list, tuple)) and words and isinstance(words[0], (bool, np.bool_)):
            return np.asarray(words, dtype=bool)
        w = np.asarray(words, dtype=np.uint64)
        shifts = np.arange(s, dtype=np.uint64)
        return (np.right_shift(w[..., None], shifts) & ONE_BIT).astype(bool)

    @staticmethod
    def popcount(words: MaskLike) -> np.ndarray:
        w = np.array(words, dtype=np.uint64)
        count = np.zeros(w.shape, dtype=np.int64)
        while np.any(w):
            count += (w & ONE_BIT).astype(np.int64)
            w = np.right_shift(w, ONE_BIT)
        return count

    # -- data movement ------------------------------------------------------------

    def compress(self, mask: MaskLike, x: ArrayLike) -> np.ndarray:
        """Pack the lanes selected by mask to the low end, zero the rest."""
        x = as_lanes(x)
        sel = self.unpack_mask(mask, x.shape[-1])
        out = np.zeros_like(x)
        k = int(np.count_nonzero(sel))
        out[..., :k] = x[..., sel]
        return out

    @staticmethod
    def permute(idx: Sequence[int], x: ArrayLike) -> np.ndarray:
        """Lane l of the result is lane idx[l] of x."""
        return as_lanes(x)[..., np.asarray(idx, dtype=np.intp)]

    def blend(self, mask: MaskLike, a: ArrayLike, b: ArrayLike) -> np.ndarray:
        """mask ? b : a, lane-wise."""
        a = as_lanes(a)
        sel = self.unpack_mask(mask, a.shape[-1])
        return np.where(sel, as_lanes(b), a)


def high_to_low(p: Sequence[int]) -> tuple:
    """Convert a lane list written from the highest lane down into lane order."""
    return tuple(reversed(p))
