"""
Per-lane emulation backend.

Every lane is evaluated by a plain Python loop with the IEEE-754 special
cases spelled out, the way a scalar fallback on hardware without vector
units would run. Results are bit-identical to the vector backend.
"""

import math
from typing import Callable

import numpy as np

from . import register_backend
from .base import LaneBackend, as_lanes, exact_fma

_hw_fma = getattr(math, "fma", None)


def _fma(a: float, b: float, c: float) -> float:
    if _hw_fma is not None:
        try:
            return _hw_fma(a, b, c)
        except (OverflowError, ValueError):
            pass
    return exact_fma(a, b, c)


def _map(fn: Callable, *arrays) -> np.ndarray:
    parts = np.broadcast_arrays(*(as_lanes(a) for a in arrays))
    shape = parts[0].shape
    flat = [p.ravel() for p in parts]
    out = np.fromiter((fn(*(float(v) for v in vals)) for vals in zip(*flat)), dtype=np.float64, count=flat[0].size)
    return out.reshape(shape)


def _div(a: float, b: float) -> float:
    if b == 0.0:
        if a == 0.0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)
    return a / b


def _sqrt(a: float) -> float:
    if math.isnan(a) or a < 0.0:
        return math.nan
    if a == 0.0 or math.isinf(a):
        return a
    return math.sqrt(a)


def _scalef(x: float, e: float) -> float:
    if math.isnan(e) or (math.isinf(x) and e == -math.inf) or (x == 0.0 and e == math.inf):
        return math.nan
    k = int(min(max(math.floor(e) if math.isfinite(e) else e, -2200.0), 2200.0))
    try:
        return math.ldexp(x, k)
    except OverflowError:
        return math.copysign(math.inf, x)


def _getexp(x: float) -> float:
    if math.isnan(x):
        return math.nan
    if math.isinf(x):
        return math.inf
    if x == 0.0:
        return -math.inf
    return float(math.frexp(abs(x))[1] - 1)


def _getmant(x: float) -> float:
    if math.isnan(x):
        return math.nan
    if x == 0.0 or math.isinf(x):
        return 1.0
    return 2.0 * math.frexp(abs(x))[0]


@register_backend("scalar")
class ScalarBackend(LaneBackend):
    """One lane at a time, in Python floats."""

    def add(self, a, b):
        return _map(lambda x, y: x + y, a, b)

    def sub(self, a, b):
        return _map(lambda x, y: x - y, a, b)

    def mul(self, a, b):
        return _map(lambda x, y: x * y, a, b)

    def div(self, a, b):
        return _map(_div, a, b)

    def sqrt(self, a):
        return _map(_sqrt, a)

    def fmadd(self, a, b, c):
        return _map(_fma, a, b, c)

    def vmin(self, a, b):
        return _map(lambda x, y: x if x < y else y, a, b)

    def vmax(self, a, b):
        return _map(lambda x, y: x if x > y else y, a, b)

    def scalef(self, x, e):
        return _map(_scalef, x, e)

    def getexp(self, x):
        return _map(_getexp, x)

    def getmant(self, x):
        return _map(_getmant, x)

    def reduce_add(self, x):
        x = as_lanes(x)
        rows = x.reshape(-1, x.shape[-1])
        out = np.empty(rows.shape[0])
        for i, row in enumerate(rows):
            acc = float(row[0])
            for v in row[1:]:
                acc = acc + float(v)
            out[i] = acc
        return out.reshape(x.shape[:-1])

    def reduce_max(self, x):
        x = as_lanes(x)
        rows = x.reshape(-1, x.shape[-1])
        out = np.empty(rows.shape[0])
        for i, row in enumerate(rows):
            acc = float(row[0])
            for v in row[1:]:
                v = float(v)
                acc = acc if acc > v else v
            out[i] = acc
        return out.reshape(x.shape[:-1])
