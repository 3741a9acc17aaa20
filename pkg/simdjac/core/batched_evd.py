"""
Batched eigendecomposition of 2x2 Hermitian and real symmetric matrices.

Handles:
- scaling of each matrix by a power of two so that nothing can overflow
- the polar form of the off-diagonal element
- branch-free Jacobi angle and eigenvalue formulas
- batches in structure-of-arrays layout, processed s matrices at a time

A matrix A = [[a11, conj(a21)], [a21, a22]] is decomposed as A = U diag(l1, l2) U*
with U = [[cos(phi), -e^{-i alpha} sin(phi)], [e^{i alpha} sin(phi), cos(phi)]].
Only cos(phi), cos(alpha) tan(phi) and sin(alpha) tan(phi) are stored.
"""

import time
from typing import Dict, Optional, Tuple

import numpy as np

from .constants import DEFAULT_LANES, ETA, MU_CHECK, OMEGA, SQRT_OMEGA
from .errors import FormatError, NonFiniteInputError
from .lanes import LaneBackend, get_backend
from .logging_conf import get_logger
from .parallel import run_sliced
from .splitform import pad_length

logger = get_logger(__name__)


class HermBatch2:
    """Structure-of-arrays batch of 2x2 matrices, padded to a lane multiple."""

    def __init__(self, a11, a22, re_a21, im_a21=None, r: Optional[int] = None, s: int = DEFAULT_LANES):
        a11 = np.asarray(a11, dtype=np.float64)
        r = a11.shape[0] if r is None else r
        rt = pad_length(r, s)
        planes = [a11, a22, re_a21] + ([] if im_a21 is None else [im_a21])
        padded = []
        for p in planes:
            p = np.asarray(p, dtype=np.float64)
            if p.ndim != 1 or p.shape[0] not in (r, rt):
                raise FormatError(f"batch plane of shape {p.shape} does not hold {r} matrices")
            if not np.all(np.isfinite(p[:r])):
                bad = int(np.flatnonzero(~np.isfinite(p[:r]))[0])
                raise NonFiniteInputError(f"non-finite entry in matrix {bad} of the batch")
            q = np.zeros(rt)
            q[:r] = p[:r]
            padded.append(q)
        self.a11, self.a22, self.re_a21 = padded[:3]
        self.im_a21 = padded[3] if im_a21 is not None else None
        self.r = r
        self.s = s

    @property
    def r_tilde(self) -> int:
        return self.a11.shape[0]

    @property
    def is_complex(self) -> bool:
        return self.im_a21 is not None

    @property
    def chunks(self) -> int:
        return self.r_tilde // self.s

    def planes(self):
        base = [self.a11, self.a22, self.re_a21]
        return base + ([self.im_a21] if self.is_complex else [])


class EVDOut2:
    """Rotation parameters and eigenvalues of a batch; perm holds one word per chunk."""

    def __init__(self, r: int, s: int = DEFAULT_LANES, is_complex: bool = True,
                 with_sine: bool = False, backscale: bool = True):
        rt = pad_length(r, s)
        self.r = r
        self.s = s
        self.cos_phi = np.zeros(rt)
        self.cosalpha_tanphi = np.zeros(rt)  # +-tan(phi) in the real case
        self.sinalpha_tanphi = np.zeros(rt) if is_complex else None
        self.lambda1 = np.zeros(rt)
        self.lambda2 = np.zeros(rt)
        self.perm = np.zeros(rt // s, dtype=np.uint64)
        self.neg_zeta = None if backscale else np.zeros(rt)
        self.cosalpha_sinphi = np.zeros(rt) if with_sine else None
        self.sinalpha_sinphi = np.zeros(rt) if (with_sine and is_complex) else None

    @property
    def is_complex(self) -> bool:
        return self.sinalpha_tanphi is not None

    @property
    def backscaled(self) -> bool:
        return self.neg_zeta is None

    def fields(self) -> Dict[str, np.ndarray]:
        names = ["cos_phi", "cosalpha_tanphi", "sinalpha_tanphi", "lambda1", "lambda2",
                 "neg_zeta", "cosalpha_sinphi", "sinalpha_sinphi"]
        return {k: getattr(self, k) for k in names if getattr(self, k) is not None}

    def perm_bits(self) -> np.ndarray:
        """Per-matrix permutation flags, length r_tilde."""
        shifts = np.arange(self.s, dtype=np.uint64)
        return ((self.perm[:, None] >> shifts) & np.uint64(1)).astype(bool).ravel()


def scale_exponent(a11, a22, re_a21, im_a21=None, backend: Optional[LaneBackend] = None) -> np.ndarray:
    """zeta = min(omega, eta - floor(lg|x|) over the entries); zero entries impose no bound."""
    L = backend or get_backend()
    zeta = L.vmin(L.sub(ETA, L.getexp(a11)), L.sub(ETA, L.getexp(a22)))
    zeta = L.vmin(zeta, L.sub(ETA, L.getexp(re_a21)))
    if im_a21 is not None:
        zeta = L.vmin(zeta, L.sub(ETA, L.getexp(im_a21)))
    return L.vmin(zeta, OMEGA)


def naive_hypot(x, y, backend: Optional[LaneBackend] = None) -> np.ndarray:
    """M * sqrt((m/M)**2 + 1) with m = min(|x|, |y|), M = max(|x|, |y|); hypot(0, 0) = 0."""
    L = backend or get_backend()
    x, y = L.abs(x), L.abs(y)
    lo, hi = L.vmin(x, y), L.vmax(x, y)
    q = L.vmax(L.div(lo, hi), 0.0)
    return L.mul(L.sqrt(L.fmadd(q, q, 1.0)), hi)


def polar2(re, im, backend: Optional[LaneBackend] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(cos(alpha), sin(alpha), |z|) of z = re + i*im, with polar2(0) = (1, 0, 0)."""
    L = backend or get_backend()
    modulus = naive_hypot(re, im, L)
    cos_alpha = L.or_sign(L.vmin(L.div(L.abs(re), modulus), 1.0), L.sign(re))
    sin_alpha = L.div(im, L.vmax(modulus, MU_CHECK))
    return cos_alpha, sin_alpha, modulus


def jacobi_angles(a11, a22, two_abs_a21, backend: Optional[LaneBackend] = None):
    """
    Jacobi angle of a scaled 2x2 Hermitian matrix.

    Args:
        a11, a22: diagonal
        two_abs_a21: 2|a21|

    Returns:
        (tan(phi), sec(phi), sec(phi)**2, cos(phi)), with |tan(phi)| <= 1
    """
    L = backend or get_backend()
    a = L.sub(a11, a22)
    tan_2phi = L.vmin(L.vmax(L.div(two_abs_a21, L.abs(a)), 0.0), SQRT_OMEGA)
    tan_2phi = L.or_sign(tan_2phi, L.sign(a))
    sec2_2phi = L.fmadd(tan_2phi, tan_2phi, 1.0)
    tan_phi = L.div(tan_2phi, L.add(1.0, L.sqrt(sec2_2phi)))
    sec2_phi = L.fmadd(tan_phi, tan_phi, 1.0)
    sec_phi = L.sqrt(sec2_phi)
    cos_phi = L.div(1.0, sec_phi)
    return tan_phi, sec_phi, sec2_phi, cos_phi


def eigenvalues2(a11, a22, two_abs_a21, tan_phi, sec2_phi, backend: Optional[LaneBackend] = None):
    L = backend or get_backend()
    lambda1 = L.div(L.fmadd(tan_phi, L.fmadd(a22, tan_phi, two_abs_a21), a11), sec2_phi)
    lambda2 = L.div(L.fmadd(tan_phi, L.fmsub(a11, tan_phi, two_abs_a21), a22), sec2_phi)
    return lambda1, lambda2


def _herm_kernel(a11, a22, re, im, L: LaneBackend, backscale: bool, with_sine: bool) -> Dict[str, np.ndarray]:
    zeta = scale_exponent(a11, a22, re, im, L)
    a11, a22 = L.scalef(a11, zeta), L.scalef(a22, zeta)
    re, im = L.scalef(re, zeta), L.scalef(im, zeta)
    cos_alpha, sin_alpha, modulus = polar2(re, im, L)
    two_abs = L.scalef(modulus, 1.0)
    tan_phi, sec_phi, sec2_phi, cos_phi = jacobi_angles(a11, a22, two_abs, L)
    out = {
        "cos_phi": cos_phi,
        "cosalpha_tanphi": L.mul(cos_alpha, tan_phi),
        "sinalpha_tanphi": L.mul(sin_alpha, tan_phi),
    }
    if with_sine:
        out["cosalpha_sinphi"] = L.div(out["cosalpha_tanphi"], sec_phi)
        out["sinalpha_sinphi"] = L.div(out["sinalpha_tanphi"], sec_phi)
    lambda1, lambda2 = eigenvalues2(a11, a22, two_abs, tan_phi, sec2_phi, L)
    out["perm"] = L.lt(lambda1, lambda2)
    neg_zeta = L.neg(zeta)
    if backscale:
        lambda1, lambda2 = L.scalef(lambda1, neg_zeta), L.scalef(lambda2, neg_zeta)
    else:
        out["neg_zeta"] = neg_zeta
    out["lambda1"], out["lambda2"] = lambda1, lambda2
    return out


def _sym_kernel(a11, a22, a21, L: LaneBackend, backscale: bool, with_sine: bool) -> Dict[str, np.ndarray]:
    zeta = scale_exponent(a11, a22, a21, None, L)
    a11, a22, a21 = L.scalef(a11, zeta), L.scalef(a22, zeta), L.scalef(a21, zeta)
    two_abs = L.scalef(L.abs(a21), 1.0)
    tan_phi, sec_phi, sec2_phi, cos_phi = jacobi_angles(a11, a22, two_abs, L)
    signed_tan = L.xor_sign(tan_phi, L.sign(a21))
    out = {"cos_phi": cos_phi, "cosalpha_tanphi": signed_tan}
    if with_sine:
        out["cosalpha_sinphi"] = L.div(signed_tan, sec_phi)
    lambda1, lambda2 = eigenvalues2(a11, a22, two_abs, tan_phi, sec2_phi, L)
    out["perm"] = L.lt(lambda1, lambda2)
    neg_zeta = L.neg(zeta)
    if backscale:
        lambda1, lambda2 = L.scalef(lambda1, neg_zeta), L.scalef(lambda2, neg_zeta)
    else:
        out["neg_zeta"] = neg_zeta
    out["lambda1"], out["lambda2"] = lambda1, lambda2
    return out


def _store(out: EVDOut2, chunks: np.ndarray, result: Dict[str, np.ndarray], L: LaneBackend) -> None:
    s = out.s
    for name, values in result.items():
        if name == "perm":
            out.perm[chunks] = L.pack_mask(values)
            continue
        target = getattr(out, name)
        if target is not None:
            target.reshape(-1, s)[chunks] = values


def _run_chunks(batch: HermBatch2, chunks: np.ndarray, out: EVDOut2, L: LaneBackend,
                backscale: bool, with_sine: bool) -> None:
    s = batch.s
    planes = [p.reshape(-1, s)[chunks] for p in batch.planes()]
    if batch.is_complex:
        result = _herm_kernel(*planes, L, backscale, with_sine)
    else:
        result = _sym_kernel(*planes, L, backscale, with_sine)
    _store(out, chunks, result, L)


def evd2_herm_vec(i: int, batch: HermBatch2, out: EVDOut2, backend: Optional[LaneBackend] = None,
                  backscale: bool = True, with_sine: bool = False) -> None:
    """Decompose the s complex matrices starting at offset i (a multiple of s)."""
    if i % batch.s or not batch.is_complex:
        raise ValueError(f"offset {i} must be a multiple of {batch.s} in a complex batch")
    _run_chunks(batch, np.array([i // batch.s]), out, backend or get_backend(), backscale, with_sine)


def evd2_sym_vec(i: int, batch: HermBatch2, out: EVDOut2, backend: Optional[LaneBackend] = None,
                 backscale: bool = True, with_sine: bool = False) -> None:
    """Decompose the s real symmetric matrices starting at offset i."""
    if i % batch.s or batch.is_complex:
        raise ValueError(f"offset {i} must be a multiple of {batch.s} in a real batch")
    _run_chunks(batch, np.array([i // batch.s]), out, backend or get_backend(), backscale, with_sine)


def evd2_batch(
    batch: HermBatch2,
    skip: Optional[np.ndarray] = None,
    out: Optional[EVDOut2] = None,
    workers: int = 1,
    backscale: bool = True,
    with_sine: bool = False,
    backend: Optional[LaneBackend] = None,
) -> EVDOut2:
    """
    Decompose a whole batch, chunk by chunk.

    Args:
        batch: input matrices
        skip: optional array of per-chunk words; chunks whose word is zero
            are left untouched
        out: output to fill in place (allocated when omitted)
        workers: number of threads; the result does not depend on it

    Returns:
        the filled EVDOut2
    """
    L = backend or get_backend()
    if out is None:
        out = EVDOut2(batch.r, batch.s, batch.is_complex, with_sine, backscale)
    active = np.arange(batch.chunks) if skip is None else np.flatnonzero(np.asarray(skip) != 0)
    if active.size == 0:
        return out
    started = time.perf_counter()

    def work(sl: slice) -> None:
        _run_chunks(batch, active[sl], out, L, backscale, with_sine)

    run_sliced(work, active.size, workers)
    logger.debug(f"[EVD] {active.size} of {batch.chunks} chunks in {time.perf_counter() - started:.4f}s")
    return out
