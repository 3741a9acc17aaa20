"""
Reference arithmetic and error measures.

Two extended-precision tools are used:
- DD, a vectorized double-double (about 106-bit significands) on numpy
  arrays, for bulk residuals; inputs are prescaled by powers of two so that
  no product leaves the safe binary64 range
- mpmath at 113-bit precision for scalar references (eigenvalues, Jacobi
  parameters, singular values) and for values with extended exponents

It also holds a port of the LAPACK xLAEV2 routines, the scalar baseline the
batched 2x2 eigensolver is compared to.
"""

import math
from typing import Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from .batched_evd import EVDOut2, HermBatch2
from .errors import FormatError
from .models import EVDComparison, ErrorMeasures
from .splitform import SplitMatrix

QUAD_PREC = 113
_SPLITTER = 134217729.0  # 2**27 + 1


def quad_context() -> mpmath.MPContext:
    ctx = mpmath.MPContext()
    ctx.prec = QUAD_PREC
    return ctx


QUAD = quad_context()


# -- double-double -------------------------------------------------------------------------


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def two_prod(a, b):
    """p + err == a * b exactly, for |a|, |b| < 2**996 and no underflow."""
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


class DD:
    """Double-double array: value = hi + lo with |lo| <= ulp(hi) / 2."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi, lo=None):
        self.hi = np.asarray(hi, dtype=np.float64)
        self.lo = np.zeros_like(self.hi) if lo is None else np.asarray(lo, dtype=np.float64)

    @classmethod
    def product(cls, a, b) -> "DD":
        """Exact product of two float arrays."""
        with np.errstate(all="ignore"):
            return cls(*two_prod(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)))

    @staticmethod
    def _lift(x) -> "DD":
        return x if isinstance(x, DD) else DD(x)

    def __add__(self, other) -> "DD":
        other = self._lift(other)
        with np.errstate(all="ignore"):
            s, e = two_sum(self.hi, other.hi)
            t, f = two_sum(self.lo, other.lo)
            s, e = quick_two_sum(s, e + t)
            return DD(*quick_two_sum(s, e + f))

    __radd__ = __add__

    def __neg__(self) -> "DD":
        return DD(-self.hi, -self.lo)

    def __sub__(self, other) -> "DD":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "DD":
        return self._lift(other) - self

    def __mul__(self, other) -> "DD":
        other = self._lift(other)
        with np.errstate(all="ignore"):
            p, e = two_prod(self.hi, other.hi)
            e = e + (self.hi * other.lo + self.lo * other.hi)
            return DD(*quick_two_sum(p, e))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "DD":
        other = self._lift(other)
        with np.errstate(all="ignore"):
            q1 = self.hi / other.hi
            r = self - other * DD(q1)
            q2 = r.hi / other.hi
            return DD(*quick_two_sum(q1, q2))

    def sqrt(self) -> "DD":
        with np.errstate(all="ignore"):
            x = np.sqrt(self.hi)
            r = self - DD.product(x, x)
            corr = np.where(x > 0, r.hi / (2.0 * x), 0.0)
            return DD(*quick_two_sum(x, corr))

    def ldexp(self, e) -> "DD":
        e = np.asarray(e)
        return DD(np.ldexp(self.hi, e.astype(np.int64)), np.ldexp(self.lo, e.astype(np.int64)))

    def __getitem__(self, idx) -> "DD":
        return DD(self.hi[idx], self.lo[idx])

    def __setitem__(self, idx, value) -> None:
        value = self._lift(value)
        self.hi[idx] = value.hi
        self.lo[idx] = value.lo

    @property
    def shape(self):
        return self.hi.shape

    def to_float(self) -> np.ndarray:
        return self.hi + self.lo

    def sum(self, axis: int = 0) -> "DD":
        """Pairwise (tree) sum along an axis."""
        hi = np.moveaxis(self.hi, axis, 0)
        lo = np.moveaxis(self.lo, axis, 0)
        x = DD(hi, lo)
        while x.shape[0] > 1:
            if x.shape[0] % 2:
                pad = np.zeros((1,) + x.shape[1:])
                x = DD(np.concatenate([x.hi, pad]), np.concatenate([x.lo, pad]))
            x = x[0::2] + x[1::2]
        return x[0]

    def to_mpf(self, ctx=QUAD):
        return [ctx.mpf(float(h)) + ctx.mpf(float(l)) for h, l in zip(self.hi.ravel(), self.lo.ravel())]

    def __repr__(self) -> str:
        return f"DD(hi={self.hi!r}, lo={self.lo!r})"


def dd_norm2(*parts: DD) -> np.ndarray:
    """sum of squares of DD arrays, to binary64 (parts must be small enough to square)."""
    total = 0.0
    for p in parts:
        v = p.to_float()
        total = total + np.sum(v * v)
    return np.asarray(total)


# -- extended-exponent quad values -----------------------------------------------------------


class QuadReal:
    """mant * 2**exp with a double-double mantissa; exp is an unbounded integer."""

    def __init__(self, mant: DD, exp: int = 0):
        self.mant = mant
        self.exp = int(exp)

    def to_mpf(self, ctx=QUAD):
        return ctx.ldexp(ctx.mpf(float(self.mant.hi)) + ctx.mpf(float(self.mant.lo)), self.exp)

    def __float__(self) -> float:
        try:
            return math.ldexp(float(self.mant.hi + self.mant.lo), self.exp)
        except OverflowError:
            return math.inf

    def rel_err(self, value) -> float:
        """|value - self| / self, with 0/0 = 0; value is a float, an mpf or an EFNumber."""
        ref = self.to_mpf()
        if hasattr(value, "e") and hasattr(value, "f"):
            got = QUAD.mpf(0) if value.e == -math.inf else QUAD.ldexp(QUAD.mpf(value.f), int(value.e))
        else:
            got = QUAD.mpf(value)
        return float(rel_diff(got, ref))

    def __repr__(self) -> str:
        return f"QuadReal({mpmath.nstr(self.to_mpf(), 20)})"


def rel_diff(got, ref) -> float:
    """|got - ref| / |ref| evaluated in quad; 0/0 = 0."""
    got, ref = QUAD.mpf(got), QUAD.mpf(ref)
    diff = abs(got - ref)
    if ref == 0:
        return 0.0 if diff == 0 else math.inf
    return float(diff / abs(ref))


def _scale_exponent(*xs: np.ndarray) -> int:
    peak = max((float(np.max(np.abs(x))) for x in xs if np.size(x)), default=0.0)
    if peak == 0 or not math.isfinite(peak):
        return 0
    return math.frexp(peak)[1]


def quad_dot(x, y) -> QuadReal:
    """x . y (no conjugation) in double-double with an integer exponent."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    kx, ky = _scale_exponent(x), _scale_exponent(y)
    prods = DD.product(np.ldexp(x, -kx), np.ldexp(y, -ky))
    return QuadReal(prods.sum(), kx + ky)


def quad_norm(x) -> QuadReal:
    """Frobenius norm of a real or complex vector."""
    x = np.asarray(x)
    parts = [x.real, x.imag] if np.iscomplexobj(x) else [x]
    parts = [np.asarray(p, dtype=np.float64).ravel() for p in parts]
    k = _scale_exponent(*parts)
    squares = [DD.product(np.ldexp(p, -k), np.ldexp(p, -k)) for p in parts]
    ssq = squares[0].sum()
    for sq in squares[1:]:
        ssq = ssq + sq.sum()
    return QuadReal(ssq.sqrt(), k)


# -- scalar quad references -------------------------------------------------------------------


def quad_hypot_bounds() -> Tuple:
    """Exact (lower, upper) limits of fl(hypot)/hypot for the naive hypot on normal-range inputs."""
    eps = QUAD.mpf(2) ** -53
    low = (1 - eps) ** QUAD.mpf(2.5) * QUAD.sqrt(1 - eps * (2 - eps) / 2)
    high = (1 + eps) ** QUAD.mpf(2.5) * QUAD.sqrt(1 + eps * (2 + eps) / 2)
    return low, high


def quad_evd2(a11, a22, re_a21, im_a21=0.0) -> Tuple:
    """Eigenvalues (larger, smaller) of [[a11, conj(a21)], [a21, a22]] in 113-bit arithmetic."""
    a11, a22 = QUAD.mpf(a11), QUAD.mpf(a22)
    half = (a11 - a22) / 2
    r = QUAD.sqrt(half * half + QUAD.mpf(re_a21) ** 2 + QUAD.mpf(im_a21) ** 2)
    mid = (a11 + a22) / 2
    return mid + r, mid - r


def quad_jacobi_params(a11, a22, re_a21, im_a21: Optional[float] = None) -> dict:
    """
    Exact tan(phi), cos(phi), cos(alpha), sin(alpha) of the diagonalizing rotation.

    Follows the kernel's conventions: |phi| <= pi/4, the sign of phi is that
    of a11 - a22 (+ for a tie), and in the real case the sign of a21 is
    carried by tan(phi).
    """
    a = QUAD.mpf(a11) - QUAD.mpf(a22)
    re = QUAD.mpf(re_a21)
    im = QUAD.mpf(0) if im_a21 is None else QUAD.mpf(im_a21)
    mod = QUAD.sqrt(re * re + im * im)
    if mod == 0:
        tan = QUAD.mpf(0)
    elif a == 0:
        tan = QUAD.mpf(1)
    else:
        t2 = 2 * mod / abs(a)
        tan = t2 / (1 + QUAD.sqrt(1 + t2 * t2))
        if a < 0:
            tan = -tan
    cos_alpha = QUAD.mpf(1) if mod == 0 else re / mod
    sin_alpha = QUAD.mpf(0) if mod == 0 else im / mod
    if im_a21 is None:
        if re < 0:
            tan = -tan
        cos_alpha, sin_alpha = QUAD.mpf(1), QUAD.mpf(0)
    return {"tan_phi": tan, "cos_phi": 1 / QUAD.sqrt(1 + tan * tan),
            "cos_alpha": cos_alpha, "sin_alpha": sin_alpha}


def quad_singular_values(G) -> list:
    """Singular values of a small dense matrix, non-increasing, in 113-bit arithmetic."""
    G = np.asarray(G)
    if np.iscomplexobj(G):
        M = QUAD.matrix([[QUAD.mpc(complex(v)) for v in row] for row in G])
        sv = QUAD.svd_c(M, compute_uv=False)
    else:
        M = QUAD.matrix([[QUAD.mpf(float(v)) for v in row] for row in G])
        sv = QUAD.svd_r(M, compute_uv=False)
    return sorted((sv[i] for i in range(len(sv))), reverse=True)


def det_residual(cos_phi: float, re_sin: float, im_sin: float = 0.0) -> float:
    """| |det Phi| - 1 | = |c**2 + |s|**2 - 1| for Phi = [[c, -conj(s)], [s, c]]."""
    c, sr, si = QUAD.mpf(cos_phi), QUAD.mpf(re_sin), QUAD.mpf(im_sin)
    return float(abs(c * c + sr * sr + si * si - 1))


def det_residuals(cos_phi, re_sin, im_sin=None) -> np.ndarray:
    """Vectorized det_residual in double-double."""
    total = DD.product(cos_phi, cos_phi) + DD.product(re_sin, re_sin)
    if im_sin is not None:
        total = total + DD.product(im_sin, im_sin)
    return np.abs((total - 1.0).to_float())


# -- LAPACK xLAEV2 ----------------------------------------------------------------------------


def _laev2_real(a, b, c, t):
    """DLAEV2/SLAEV2 in the precision of the scalar type t."""
    two, half, one, zero = t(2), t(0.5), t(1), t(0)
    sm = a + c
    df = a - c
    adf = abs(df)
    tb = b + b
    ab = abs(tb)
    if abs(a) > abs(c):
        acmx, acmn = a, c
    else:
        acmx, acmn = c, a
    if adf > ab:
        rt = adf * np.sqrt(one + (ab / adf) ** 2)
    elif adf < ab:
        rt = ab * np.sqrt(one + (adf / ab) ** 2)
    else:
        rt = ab * np.sqrt(two)
    if sm < zero:
        rt1 = half * (sm - rt)
        sgn1 = -1
        rt2 = (acmx / rt1) * acmn - (b / rt1) * b
    elif sm > zero:
        rt1 = half * (sm + rt)
        sgn1 = 1
        rt2 = (acmx / rt1) * acmn - (b / rt1) * b
    else:
        rt1 = half * rt
        rt2 = -half * rt
        sgn1 = 1
    if df >= zero:
        cs = df + rt
        sgn2 = 1
    else:
        cs = df - rt
        sgn2 = -1
    if abs(cs) > ab:
        ct = -tb / cs
        sn1 = one / np.sqrt(one + ct * ct)
        cs1 = ct * sn1
    elif ab == zero:
        cs1, sn1 = one, zero
    else:
        tn = -cs / tb
        cs1 = one / np.sqrt(one + tn * tn)
        sn1 = tn * cs1
    if sgn1 == sgn2:
        cs1, sn1 = -sn1, cs1
    return rt1, rt2, cs1, sn1


def ref_evd2(a, b_re, b_im, c, dtype=np.float64) -> Tuple[float, float, float, float, float]:
    """
    LAPACK xLAEV2 on [[a, conj(b)], [b, c]], taking the (2,1) element b.

    Returns (rt1, rt2, cs1, sn1_re, sn1_im) with |rt1| >= |rt2| and the first
    eigenvector (cs1, sn1). dtype=numpy.float32 replays the single-precision
    routines.
    """
    t = np.dtype(dtype).type
    with np.errstate(all="ignore"):
        a, c, b_re, b_im = t(a), t(c), t(b_re), t(b_im)
        absb = t(np.hypot(b_re, b_im))
        if absb == 0:
            w_re, w_im = t(1), t(0)
        else:
            w_re, w_im = b_re / absb, b_im / absb
        rt1, rt2, cs1, t_sn = _laev2_real(a, absb, c, t)
        return float(rt1), float(rt2), float(cs1), float(w_re * t_sn), float(w_im * t_sn)


def ref_evd2_batch(batch: HermBatch2, dtype=np.float64) -> EVDOut2:
    """ref_evd2 over a batch, stored like the kernel output (backscaled, with sines)."""
    out = EVDOut2(batch.r, batch.s, batch.is_complex, with_sine=True, backscale=True)
    im = batch.im_a21 if batch.is_complex else np.zeros_like(batch.re_a21)
    for i in range(batch.r):
        rt1, rt2, cs1, sr, si = ref_evd2(batch.a11[i], batch.re_a21[i], im[i], batch.a22[i], dtype)
        out.lambda1[i], out.lambda2[i] = rt1, rt2
        out.cos_phi[i] = cs1
        out.cosalpha_sinphi[i] = sr
        if out.sinalpha_sinphi is not None:
            out.sinalpha_sinphi[i] = si
    return out


# -- error measures -----------------------------------------------------------------------------


def ratio(num: float, den: float) -> float:
    """num / den with 0/0 = 1 (two exact results compare as equal)."""
    if den == 0:
        return 1.0 if num == 0 else math.inf
    return num / den


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        return np.where(den == 0, np.where(num == 0, 0.0, np.inf), num / np.where(den == 0, 1.0, den))


def _sines(out: EVDOut2) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    if out.cosalpha_sinphi is not None:
        return out.cosalpha_sinphi, out.sinalpha_sinphi
    with np.errstate(all="ignore"):
        im = None if out.sinalpha_tanphi is None else out.sinalpha_tanphi * out.cos_phi
        return out.cosalpha_tanphi * out.cos_phi, im


def evd_residuals(batch: HermBatch2, out: EVDOut2) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per-matrix rho = ||U L U* - A||_F / ||A||_F and delta = | |det U| - 1 |.

    U = [[c, -conj(s)], [s, c]] is rebuilt from the stored cosine and sine.
    """
    if not out.backscaled:
        raise FormatError("residuals need backscaled eigenvalues")
    r = batch.r
    c = out.cos_phi[:r]
    s_re, s_im = _sines(out)
    s_re = s_re[:r]
    s_im = np.zeros(r) if s_im is None else s_im[:r]
    a11, a22, b_re = batch.a11[:r], batch.a22[:r], batch.re_a21[:r]
    b_im = np.zeros(r) if batch.im_a21 is None else batch.im_a21[:r]
    l1, l2 = out.lambda1[:r], out.lambda2[:r]
    # per-matrix power-of-two scaling keeps every product in range
    with np.errstate(all="ignore"):
        peak = np.max(np.abs(np.stack([a11, a22, b_re, b_im, l1, l2])), axis=0)
        k = np.where(peak > 0, np.frexp(peak)[1], 0)
        a11, a22, b_re, b_im, l1, l2 = (np.ldexp(x, -k) for x in (a11, a22, b_re, b_im, l1, l2))
    cc = DD.product(c, c)
    ss = DD.product(s_re, s_re) + DD.product(s_im, s_im)
    e11 = cc * l1 + ss * l2 - a11
    e22 = ss * l1 + cc * l2 - a22
    dl = DD(l1) - l2
    e21_re = DD.product(s_re, c) * dl - b_re
    e21_im = DD.product(s_im, c) * dl - b_im
    num = np.sqrt(e11.to_float() ** 2 + e22.to_float() ** 2 + 2 * (e21_re.to_float() ** 2 + e21_im.to_float() ** 2))
    den = np.sqrt(a11 ** 2 + a22 ** 2 + 2 * (b_re ** 2 + b_im ** 2))
    delta = np.abs((cc + ss - 1.0).to_float())
    return _safe_div(num, den), delta


def eigenvalue_residuals(out: EVDOut2, lambdas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Normwise ||fl(L) - L||_F / ||L||_F and the relative error of the larger-magnitude eigenvalue.

    Args:
        out: backscaled kernel or reference output
        lambdas: (r, 2) reference eigenvalues, in any order
    """
    r = lambdas.shape[0]
    got = np.stack([out.lambda1[:r], out.lambda2[:r]], axis=1)
    ref = np.asarray(lambdas, dtype=np.float64)
    got = -np.sort(-got, axis=1)
    ref = -np.sort(-ref, axis=1)
    with np.errstate(all="ignore"):
        peak = np.max(np.abs(np.concatenate([got, ref], axis=1)), axis=1)
        k = np.where(peak > 0, np.frexp(peak)[1], 0)[:, None]
        got, ref = np.ldexp(got, -k), np.ldexp(ref, -k)
    diff = (DD(got) - ref).to_float()
    lam_f = _safe_div(np.sqrt(np.sum(diff ** 2, axis=1)), np.sqrt(np.sum(ref ** 2, axis=1)))
    big = np.argmax(np.abs(ref), axis=1)
    rows = np.arange(r)
    lam_max = _safe_div(np.abs(diff[rows, big]), np.abs(ref[rows, big]))
    return lam_f, lam_max


def ref_evd2_batch_compare(batch: HermBatch2, kernel_out: EVDOut2, ref_out: EVDOut2,
                           lambdas: Optional[np.ndarray] = None, batch_id: int = 0) -> EVDComparison:
    """Batch maxima of the residuals of the kernel and the reference, with ref/kernel ratios."""
    if lambdas is None:
        im = batch.im_a21 if batch.is_complex else np.zeros(batch.r)
        lambdas = np.array([[float(v) for v in quad_evd2(batch.a11[i], batch.a22[i], batch.re_a21[i], im[i])]
                            for i in range(batch.r)]).reshape(batch.r, 2)
    rho_k, delta_k = evd_residuals(batch, kernel_out)
    rho_r, delta_r = evd_residuals(batch, ref_out)
    lf_k, lm_k = eigenvalue_residuals(kernel_out, lambdas)
    lf_r, lm_r = eigenvalue_residuals(ref_out, lambdas)
    peak = lambda x: float(np.max(x)) if x.size else 0.0  # noqa: E731
    return EVDComparison(
        batch_id=batch_id, count=batch.r,
        rho_kernel=peak(rho_k), rho_ref=peak(rho_r),
        delta_kernel=peak(delta_k), delta_ref=peak(delta_r),
        lambda_f_kernel=peak(lf_k), lambda_f_ref=peak(lf_r),
        lambda_max_kernel=peak(lm_k), lambda_max_ref=peak(lm_r),
        rho_ratio=ratio(peak(rho_r), peak(rho_k)),
        lambda_f_ratio=ratio(peak(lf_r), peak(lf_k)),
    )


def _dense(x) -> np.ndarray:
    return x.to_dense() if isinstance(x, SplitMatrix) else np.asarray(x)


def _gram_residual(X: np.ndarray) -> float:
    """||X* X - I||_F with X* X accumulated row by row in double-double."""
    n = X.shape[1]
    xr = np.ascontiguousarray(X.real, dtype=np.float64)
    xi = np.ascontiguousarray(X.imag, dtype=np.float64) if np.iscomplexobj(X) else None
    acc_re = DD(-np.eye(n))
    acc_im = DD(np.zeros((n, n))) if xi is not None else None
    for i in range(X.shape[0]):
        acc_re = acc_re + DD.product(xr[i][:, None], xr[i][None, :])
        if xi is not None:
            acc_re = acc_re + DD.product(xi[i][:, None], xi[i][None, :])
            # conj(x_j) x_k: imaginary part xr_j xi_k - xi_j xr_k
            acc_im = acc_im + DD.product(xr[i][:, None], xi[i][None, :]) - DD.product(xi[i][:, None], xr[i][None, :])
    total = dd_norm2(acc_re) + (dd_norm2(acc_im) if acc_im is not None else 0.0)
    return float(np.sqrt(total))


def error_measures(G, U, V, sigma_e: Sequence[float], sigma_f: Sequence[float],
                   sigma_ref: Sequence) -> ErrorMeasures:
    """
    Relative errors of a computed SVD.

    r_G = ||U S V* - G||_F / ||G||_F, r_U = ||U*U - I||_F, r_V = ||V*V - I||_F,
    r_Sigma = max_j |s_j - s_ref_j| / s_ref_j over both sets sorted non-increasingly.
    """
    G, U, V = _dense(G), _dense(U), _dense(V)
    sigma_e = np.asarray(sigma_e, dtype=np.float64)
    sigma_f = np.asarray(sigma_f, dtype=np.float64)
    m, n = G.shape
    if U.shape != (m, n) or V.shape != (n, n) or sigma_e.shape != (n,) or len(sigma_ref) != n:
        raise FormatError(f"inconsistent shapes: G {G.shape}, U {U.shape}, V {V.shape}, "
                          f"sigma {sigma_e.shape}, reference {len(sigma_ref)}")
    is_complex = np.iscomplexobj(G) or np.iscomplexobj(U) or np.iscomplexobj(V)
    kg = _scale_exponent(G.real, G.imag if np.iscomplexobj(G) else G.real)
    ur, ui = U.real.astype(np.float64), (U.imag.astype(np.float64) if is_complex else np.zeros(U.shape))
    vr, vi = V.real.astype(np.float64), (V.imag.astype(np.float64) if is_complex else np.zeros(V.shape))
    gr = np.ldexp(G.real.astype(np.float64), -kg)
    gi = np.ldexp(G.imag.astype(np.float64), -kg) if np.iscomplexobj(G) else np.zeros(G.shape)
    res_re = DD(-gr)
    res_im = DD(-gi)
    for j in range(n):
        if sigma_e[j] == -math.inf:
            continue
        shift = int(sigma_e[j]) - kg
        # u_j conj(v_j)^T = (ur vr + ui vi) + i (ui vr - ur vi)
        pr = DD.product(ur[:, j][:, None], vr[:, j][None, :]) + DD.product(ui[:, j][:, None], vi[:, j][None, :])
        pi = DD.product(ui[:, j][:, None], vr[:, j][None, :]) - DD.product(ur[:, j][:, None], vi[:, j][None, :])
        res_re = res_re + (pr * sigma_f[j]).ldexp(shift)
        res_im = res_im + (pi * sigma_f[j]).ldexp(shift)
    norm_g = float(np.sqrt(np.sum(gr ** 2) + np.sum(gi ** 2)))
    r_G = float(np.sqrt(dd_norm2(res_re, res_im))) / norm_g if norm_g else 0.0
    got = sorted((QUAD.mpf(0) if e == -math.inf else QUAD.ldexp(QUAD.mpf(float(f)), int(e))
                  for e, f in zip(sigma_e, sigma_f)), reverse=True)
    ref = sorted((QUAD.mpf(x) for x in sigma_ref), reverse=True)
    r_S = max((rel_diff(g, r) for g, r in zip(got, ref)), default=0.0)
    return ErrorMeasures(r_G=r_G, r_U=_gram_residual(U), r_V=_gram_residual(V), r_Sigma=r_S)
