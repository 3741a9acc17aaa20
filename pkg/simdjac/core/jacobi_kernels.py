"""
Per-step building blocks of the one-sided Jacobi SVD.

All kernels work on a batch of k pivot pairs at once: column arrays have
shape (k, length) and per-pair scalars have shape (k,). One-dimensional
columns are accepted as a batch of one.
"""

from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .batched_evd import naive_hypot
from .constants import ETA_HAT
from .efnorm import ef_less
from .errors import ZeroNormError
from .lanes import LaneBackend, get_backend

Planes = Sequence[np.ndarray]


class RotationParams(NamedTuple):
    """Per-pair rotation: c = cos(phi), C = cos(alpha) tan(phi), S = sin(alpha) tan(phi)."""
    cos_phi: np.ndarray
    cosalpha_tanphi: np.ndarray
    sinalpha_tanphi: Optional[np.ndarray]
    swap: np.ndarray

    @classmethod
    def single(cls, cos_phi: float, C: float, S: Optional[float] = None, swap: bool = False) -> "RotationParams":
        return cls(np.array([cos_phi]), np.array([C]), None if S is None else np.array([S]), np.array([swap]))


class ScaledDot(NamedTuple):
    re_z: np.ndarray
    im_z: Optional[np.ndarray]


def _batch(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x[None, :] if x.ndim == 1 else x


def _pair_scalars(*xs):
    return [np.atleast_1d(np.asarray(x, dtype=np.float64)) for x in xs]


def _require_nonzero_norms(*exponents: np.ndarray) -> None:
    for e in exponents:
        if np.any(np.asarray(e) == -np.inf):
            raise ZeroNormError("zero column norm; the matrix is not of full column rank")


# -- scaled dot products -------------------------------------------------------------


def zdpscl(gq: Planes, gp: Planes, eq, fq, ep, fp,
           s: int = 8, backend: Optional[LaneBackend] = None) -> ScaledDot:
    """
    gq* gp / (||gq|| ||gp||) for split complex columns, without overflow.

    Each column is prescaled by 2**-e of its norm, the four real products
    are accumulated s lanes wide, and the reduced sums are divided once
    by fq * fp.
    """
    L = backend or get_backend()
    eq, fq, ep, fp = _pair_scalars(eq, fq, ep, fp)
    _require_nonzero_norms(eq, ep)
    qr, qi = (L.scalef(_batch(x), L.neg(eq)[:, None]) for x in gq)
    pr, pi = (L.scalef(_batch(x), L.neg(ep)[:, None]) for x in gp)
    k, length = qr.shape
    acc_re = np.zeros((k, s))
    acc_im = np.zeros((k, s))
    for start in range(0, length, s):
        sl = slice(start, start + s)
        acc_re = L.fmadd(qr[:, sl], pr[:, sl], acc_re)
        acc_im = L.fmadd(qr[:, sl], pi[:, sl], acc_im)
        acc_re = L.fmadd(qi[:, sl], pi[:, sl], acc_re)
        acc_im = L.fnmadd(qi[:, sl], pr[:, sl], acc_im)
    d = L.mul(fq, fp)
    return ScaledDot(L.div(L.reduce_add(acc_re), d), L.div(L.reduce_add(acc_im), d))


def ddpscl(gq, gp, eq, fq, ep, fp, s: int = 8, backend: Optional[LaneBackend] = None) -> np.ndarray:
    L = backend or get_backend()
    eq, fq, ep, fp = _pair_scalars(eq, fq, ep, fp)
    _require_nonzero_norms(eq, ep)
    q = L.scalef(_batch(gq), L.neg(eq)[:, None])
    p = L.scalef(_batch(gp), L.neg(ep)[:, None])
    acc = np.zeros((q.shape[0], s))
    for start in range(0, q.shape[1], s):
        acc = L.fmadd(q[:, start:start + s], p[:, start:start + s], acc)
    return L.div(L.reduce_add(acc), L.mul(fq, fp))


# -- convergence and Grammians ---------------------------------------------------------


def check_convergence(re_a21p, im_a21p, upsilon: float,
                      backend: Optional[LaneBackend] = None) -> Tuple[np.ndarray, int]:
    """Flag the pairs that need a transformation: |a21'| >= upsilon."""
    L = backend or get_backend()
    re_a21p = np.atleast_1d(np.asarray(re_a21p, dtype=np.float64))
    size = L.abs(re_a21p) if im_a21p is None else naive_hypot(re_a21p, im_a21p, L)
    mask = L.le(upsilon, size)
    if mask.shape[-1] > 64:
        return mask, int(np.count_nonzero(mask))
    return mask, int(L.popcount(L.pack_mask(mask)).sum())


def form_grammians(re_a21p, im_a21p, e1, f1, e2, f2, backend: Optional[LaneBackend] = None):
    """
    Scaled Grammians [[a11'', conj(a21'')], [a21'', a22'']] of the pivot pairs.

    Args:
        re_a21p, im_a21p: scaled dot products (im is None for real pairs)
        e1, f1: norms of the first pivot columns
        e2, f2: norms of the second pivot columns

    Returns:
        (a11'', a22'', re a21'', im a21'' or None)
    """
    L = backend or get_backend()
    f12, e12 = L.div(f1, f2), L.sub(e1, e2)
    f21, e21 = L.div(f2, f1), L.sub(e2, e1)
    e12, f12 = L.add(e12, L.getexp(f12)), L.getmant(f12)
    e21, f21 = L.add(e21, L.getexp(f21)), L.getmant(f21)
    s_a = L.vmin(L.sub(ETA_HAT, L.vmax(e12, e21)), 0.0)
    a11 = L.scalef(f12, L.add(e12, s_a))
    a22 = L.scalef(f21, L.add(e21, s_a))
    re = L.scalef(re_a21p, s_a)
    im = None if im_a21p is None else L.scalef(im_a21p, s_a)
    return a11, a22, re, im


# -- rotations --------------------------------------------------------------------------


def _rotate(xp: Planes, xq: Planes, c, C, S, unit_cos: bool, real_rot: bool, L: LaneBackend):
    negC = L.neg(C)
    if len(xp) == 1 or real_rot:
        # independent real rotations of every plane
        new_p = [L.fmadd(q, C, p) for p, q in zip(xp, xq)]
        new_q = [L.fmadd(p, negC, q) for p, q in zip(xp, xq)]
    else:
        (pr, pi), (qr, qi) = xp, xq
        new_p = [L.fmadd(qr, C, L.fnmadd(qi, S, pr)),
                 L.fmadd(qr, S, L.fmadd(qi, C, pi))]
        new_q = [L.fmadd(pr, negC, L.fnmadd(pi, S, qr)),
                 L.fmadd(pr, S, L.fmadd(pi, negC, qi))]
    if not unit_cos:
        new_p = [L.mul(x, c) for x in new_p]
        new_q = [L.mul(x, c) for x in new_q]
    return new_p, new_q


def rotate_pairs(xp: Planes, xq: Planes, rot: RotationParams,
                 backend: Optional[LaneBackend] = None) -> np.ndarray:
    """
    Postmultiply column pairs [x_p x_q] by U(alpha, phi) P in place.

    Pairs are grouped by loop variant (c = 1 and/or S = 0); each group runs a
    loop specialized for it. With P a swap, x_p' lands in x_q and vice versa.

    Returns:
        max |component| of both transformed columns, per pair
    """
    L = backend or get_backend()
    xp = [_batch(x) if x.ndim == 1 else x for x in xp]
    xq = [_batch(x) if x.ndim == 1 else x for x in xq]
    c, C = _pair_scalars(rot.cos_phi, rot.cosalpha_tanphi)
    S = np.zeros_like(C) if rot.sinalpha_tanphi is None else _pair_scalars(rot.sinalpha_tanphi)[0]
    swap = np.atleast_1d(np.asarray(rot.swap, dtype=bool))
    out_max = np.zeros(c.shape[0])
    unit = c == 1.0
    real = S == 0.0
    for unit_cos in (True, False):
        for real_rot in (True, False):
            idx = np.flatnonzero((unit == unit_cos) & (real == real_rot))
            if idx.size == 0:
                continue
            col = (idx, slice(None))
            new_p, new_q = _rotate([x[col] for x in xp], [x[col] for x in xq],
                                   c[idx, None], C[idx, None], S[idx, None], unit_cos, real_rot, L)
            sw = swap[idx, None]
            m = np.zeros(idx.size)
            for plane_p, plane_q, a, b in zip(xp, xq, new_p, new_q):
                plane_p[col] = np.where(sw, b, a)
                plane_q[col] = np.where(sw, a, b)
                m = np.maximum(m, np.maximum(L.abs(a).max(axis=-1), L.abs(b).max(axis=-1)))
            out_max[idx] = m
    return out_max


def zjrot(xp: Planes, xq: Planes, rot: RotationParams, backend: Optional[LaneBackend] = None) -> float:
    """Complex pair (re, im planes) in place; returns the max |component|."""
    return float(np.max(rotate_pairs(xp, xq, rot, backend)))


def djrot(xp: np.ndarray, xq: np.ndarray, rot: RotationParams, backend: Optional[LaneBackend] = None) -> float:
    return float(np.max(rotate_pairs([xp], [xq], rot._replace(sinalpha_tanphi=None), backend)))


# -- real Gram-Schmidt --------------------------------------------------------------------


def gram_schmidt_trigger(e_big, f_big, e_small, f_small, upsilon: float,
                         backend: Optional[LaneBackend] = None) -> np.ndarray:
    """||g_big|| > 2**eta_hat * upsilon * ||g_small||, compared in (e, f) form."""
    L = backend or get_backend()
    scaled = L.mul(upsilon, f_small)
    rhs_e = L.add(L.add(e_small, ETA_HAT), L.getexp(scaled))
    rhs_f = L.getmant(scaled)
    trig = ef_less(rhs_e, rhs_f, e_big, f_big)
    return trig & (np.asarray(e_small) != -np.inf)


def gram_schmidt_real(gq, gp, a21p, eq, fq, ep, fp, backend: Optional[LaneBackend] = None) -> np.ndarray:
    """
    g_q' = (g_q / 2**e_q - psi * g_p / 2**e_p) * 2**e_q with psi = a21' * f_q / f_p.

    Returns the new g_q; g_p is left unchanged.
    """
    L = backend or get_backend()
    a21p, eq, fq, ep, fp = _pair_scalars(a21p, eq, fq, ep, fp)
    neg_psi = L.neg(L.mul(a21p, L.div(fq, fp)))[:, None]
    x = L.scalef(_batch(gp), L.neg(ep)[:, None])
    y = L.scalef(_batch(gq), L.neg(eq)[:, None])
    out = L.scalef(L.fmadd(neg_psi, x, y), eq[:, None])
    return out[0] if np.ndim(gq) == 1 else out
