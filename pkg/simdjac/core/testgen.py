"""
Test input generation.

All randomness comes from a counter-based Philox generator keyed by the
caller's seed, so every batch, matrix and vector is reproducible from
(seed, parameters). Matrices are assembled in extended precision (mpmath
or double-double) and rounded to binary64 once at the end.
"""

import time
from typing import List, Literal, NamedTuple, Optional

import numpy as np

from .batched_evd import HermBatch2
from .constants import DEFAULT_LANES, MU_CHECK, OMEGA
from .logging_conf import get_logger
from .models import SpectrumSpec
from .oracle import DD, QUAD
from .splitform import SplitMatrix, split_columns

logger = get_logger(__name__)

Kind = Literal["real", "complex"]

LAMBDA_CAP = OMEGA / 16


class Generated2x2(NamedTuple):
    batch: HermBatch2
    lambdas: np.ndarray  # (r, 2) prescribed eigenvalues, lambda1 belongs to the first column of U
    tan_phi: np.ndarray
    cos_alpha: np.ndarray


class GeneratedSVD(NamedTuple):
    G: SplitMatrix
    sigma: List[float]  # in the permuted (diagonal) order
    sigma_sorted: List[float]  # non-increasing


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _raw(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.bit_generator.random_raw(size).astype(np.uint64)


def random_doubles(rng: np.random.Generator, size: int, bound: float) -> np.ndarray:
    """Finite doubles with |x| <= bound from uniformly random bit patterns (rejection)."""
    out = np.empty(size)
    filled = 0
    while filled < size:
        x = _raw(rng, 2 * (size - filled) + 8).view(np.float64)
        with np.errstate(invalid="ignore"):
            x = x[np.isfinite(x) & (np.abs(x) <= bound)]
        take = min(x.size, size - filled)
        out[filled:filled + take] = x[:take]
        filled += take
    return out


def random_unit(rng: np.random.Generator, size: int) -> List:
    """Uniform values in [-1, 1) as exact quad numbers int64 * 2**-63."""
    ints = _raw(rng, size).view(np.int64)
    return [QUAD.ldexp(QUAD.mpf(int(v)), -63) for v in ints]


def _draw_lambdas(rng: np.random.Generator, r: int) -> np.ndarray:
    pairs = np.empty((r, 2))
    filled = 0
    while filled < r:
        cand = random_doubles(rng, 2 * (r - filled), LAMBDA_CAP).reshape(-1, 2)
        with np.errstate(over="ignore"):
            ok = np.abs(cand[:, 0]) + np.abs(cand[:, 1]) <= LAMBDA_CAP
        cand = cand[ok]
        take = min(cand.shape[0], r - filled)
        pairs[filled:filled + take] = cand[:take]
        filled += take
    return pairs


def assemble2(lambda1, lambda2, tan_phi, cos_alpha, sin_alpha):
    """
    A = U diag(lambda1, lambda2) U* in quad precision, rounded to binary64.

    a11 = cos^2(phi) (lambda1 + lambda2 tan^2(phi)), a22 = cos^2(phi) (lambda1 tan^2(phi) + lambda2),
    a21 = e^{i alpha} tan(phi) cos^2(phi) (lambda1 - lambda2).

    Returns:
        (a11, a22, re a21, im a21) as floats
    """
    l1, l2 = QUAD.mpf(lambda1), QUAD.mpf(lambda2)
    t = QUAD.mpf(tan_phi)
    cos2 = 1 / (1 + t * t)
    off = t * cos2 * (l1 - l2)
    return (float(cos2 * (l1 + l2 * t * t)), float(cos2 * (l1 * t * t + l2)),
            float(QUAD.mpf(cos_alpha) * off), float(QUAD.mpf(sin_alpha) * off))


def gen2x2_batch(r: int, seed: int, kind: Kind = "complex", s: int = DEFAULT_LANES) -> Generated2x2:
    """
    r random 2x2 matrices with prescribed eigenvalues.

    lambda1, lambda2 come from random bit patterns with |lambda_j| <= omega/16
    and |lambda1| + |lambda2| <= omega/16; tan(phi) and cos(alpha) are uniform
    in [-1, 1). The sign of tan(phi) is moved into e^{i alpha}. A real batch
    draws exactly the same values and uses cos(alpha) = 1, so the two kinds
    share their diagonals.
    """
    if r < 1:
        raise ValueError(f"batch size must be >= 1, got {r}")
    started = time.perf_counter()
    rng = make_rng(seed)
    lambdas = _draw_lambdas(rng, r)
    tans = random_unit(rng, r)
    cosines = random_unit(rng, r)
    planes = np.zeros((4, r))
    tan_out = np.empty(r)
    cos_out = np.empty(r)
    for i in range(r):
        t = tans[i]
        if kind == "real":
            ca, sa = QUAD.mpf(1), QUAD.mpf(0)
        else:
            ca = QUAD.mpf(float(cosines[i]))
            sa = QUAD.sqrt(1 - ca * ca)
            if t < 0:
                ca, sa, t = -ca, -sa, -t
        planes[:, i] = assemble2(lambdas[i, 0], lambdas[i, 1], t, ca, sa)
        tan_out[i] = float(t)
        cos_out[i] = float(ca)
    batch = HermBatch2(planes[0], planes[1], planes[2], planes[3] if kind == "complex" else None, r, s)
    logger.info(f"[GEN] {r} {kind} 2x2 matrices (seed {seed}) in {time.perf_counter() - started:.3f}s")
    return Generated2x2(batch, lambdas, tan_out, cos_out)


def pathological_batch(s: int = DEFAULT_LANES) -> HermBatch2:
    """diag(omega/8, omega/8) with a21 = mu(1 + i) and mu(1 - i), mu the smallest subnormal."""
    d = OMEGA / 8
    return HermBatch2([d, d], [d, d], [MU_CHECK, MU_CHECK], [MU_CHECK, -MU_CHECK], 2, s)


# -- SVD test matrices ------------------------------------------------------------------------


def spectrum(spec: SpectrumSpec, rng: Optional[np.random.Generator] = None) -> List:
    """sigma_i = 2**(xi (1 - (i-1)/(n-1))) in quad precision, permuted as requested."""
    n = spec.n
    sigma = [QUAD.power(2, QUAD.mpf(spec.xi) * (1 - QUAD.mpf(i) / (n - 1))) for i in range(n)]
    if spec.perm == "descending":
        sigma.reverse()
    elif spec.perm == "random":
        rng = rng or make_rng(0)
        sigma = [sigma[int(j)] for j in rng.permutation(n)]
    return sigma


def _to_dd(values) -> DD:
    hi = np.array([float(v) for v in values])
    lo = np.array([float(QUAD.mpf(v) - QUAD.mpf(h)) for v, h in zip(values, hi)])
    return DD(hi, lo)


def _reflect_rows(xr: DD, xi: Optional[DD], w_re: np.ndarray, w_im: Optional[np.ndarray], j: int) -> None:
    """Rows j: of X <- (I - tau w w*) X, tau = 2 / ||w||**2, w supported in rows j:."""
    wr = w_re[:, None]
    norm2 = DD.product(w_re, w_re).sum()
    if w_im is not None:
        norm2 = norm2 + DD.product(w_im, w_im).sum()
    tau = DD(2.0) / norm2
    rows = slice(j, None)
    ar = xr[rows]
    if xi is None:
        y = (ar * wr).sum(axis=0) * tau
        xr[rows] = ar - DD(wr) * y
        return
    wi = w_im[:, None]
    ai = xi[rows]
    # y = tau * conj(w)^T X
    y_re = ((ar * wr) + (ai * wi)).sum(axis=0) * tau
    y_im = ((ai * wr) - (ar * wi)).sum(axis=0) * tau
    xr[rows] = ar - (y_re * wr - y_im * wi)
    xi[rows] = ai - (y_im * wr + y_re * wi)


def _transpose(x: Optional[DD]) -> Optional[DD]:
    return None if x is None else DD(x.hi.T.copy(), x.lo.T.copy())


def _random_reflections(xr: DD, xi: Optional[DD], rng: np.random.Generator) -> None:
    """Apply one reflection per row count, of lengths rows, rows-1, ..., 1."""
    rows = xr.shape[0]
    for j in range(rows):
        w_re = rng.standard_normal(rows - j)
        w_im = rng.standard_normal(rows - j) if xi is not None else None
        if not np.any(w_re) and (w_im is None or not np.any(w_im)):
            w_re[0] = 1.0
        _reflect_rows(xr, xi, w_re, w_im, j)


def gen_svd_matrix(spec: SpectrumSpec, seed: int, kind: Kind = "real", m: Optional[int] = None,
                   s: int = DEFAULT_LANES) -> GeneratedSVD:
    """
    G = U diag(sigma) V* with random orthogonal (unitary) U and V.

    U and V are chains of random Householder reflections applied in
    double-double to the diagonal (m reflections from the left, n from the
    right), so G is exact to about 2**-100 before the final rounding.
    """
    n = spec.n
    m = n if m is None else m
    if m < n:
        raise ValueError(f"need m >= n, got m={m}, n={n}")
    started = time.perf_counter()
    rng = make_rng(seed)
    sigma = spectrum(spec, rng)
    d = _to_dd(sigma)
    xr = DD(np.zeros((m, n)))
    xr.hi[np.arange(n), np.arange(n)] = d.hi
    xr.lo[np.arange(n), np.arange(n)] = d.lo
    xi = DD(np.zeros((m, n))) if kind == "complex" else None
    _random_reflections(xr, xi, rng)
    # right side: X H = (H X^*)^*; H is Hermitian
    tr, ti = _transpose(xr), _transpose(xi)
    if ti is not None:
        ti = -ti
    _random_reflections(tr, ti, rng)
    xr, xi = _transpose(tr), _transpose(ti)
    if xi is not None:
        xi = -xi
        dense = xr.to_float() + 1j * xi.to_float()
    else:
        dense = xr.to_float()
    G = split_columns(dense, s, is_complex=(kind == "complex"))
    values = [float(v) for v in sigma]
    logger.info(f"[GEN] {m}x{n} {kind} matrix, xi={spec.xi}, perm={spec.perm} "
                f"in {time.perf_counter() - started:.3f}s")
    return GeneratedSVD(G, values, sorted(values, reverse=True))


def gen_norm_vectors(count: int, m: int, xi: float, seed: int) -> List[np.ndarray]:
    """count vectors of m elements in [0, 2**xi], from random 64-bit patterns."""
    rng = make_rng(seed)
    bound = float(2.0 ** xi) if xi < 1024 else OMEGA
    return [np.abs(random_doubles(rng, m, bound)) for _ in range(count)]
