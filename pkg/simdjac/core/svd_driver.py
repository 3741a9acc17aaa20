"""
One-sided Jacobi SVD, vectorized over pivot pairs and parallel over workers.

Every step of a sweep runs five phases separated by barriers:
- norms: (e, f) Frobenius norms of all columns
- dots: scaled dot products of the pivot pairs, packed by slot
- grammians: convergence masks and scaled 2x2 Grammians
- evd: batched 2x2 eigendecomposition with per-chunk skip words
- rotations: swaps, rotations (and real Gram-Schmidt) with a max-norm reduction

The iteration matrix is kept scaled by 2**s so that no element, norm or
rotation can overflow; singular values come back as (e - s, f) pairs.
"""

import math
import time
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from .batched_evd import HermBatch2, evd2_batch
from .constants import EPS, OMEGA
from .efnorm import EFNormEngine, EFNumber, max_norm, norm_overflowed
from .errors import (
    ColumnNormOverflow,
    FormatError,
    InvariantViolation,
    NonFiniteInputError,
    ZeroMatrixError,
)
from .jacobi_kernels import (
    RotationParams,
    check_convergence,
    ddpscl,
    form_grammians,
    gram_schmidt_real,
    gram_schmidt_trigger,
    rotate_pairs,
    zdpscl,
)
from .lanes import LaneBackend, get_backend
from .logging_conf import get_logger
from .models import SVDConfig, SweepRecord
from .parallel import run_sliced
from .splitform import SplitMatrix, border, identity, pad_length
from .strategies import StrategyTable, build_strategy

logger = get_logger(__name__)

PHASES = ("norms", "dots", "grammians", "evd", "rotations")

NormEngine = Callable[[np.ndarray, Optional[np.ndarray]], Tuple[np.ndarray, np.ndarray]]


class ScalingState(BaseModel):
    """2**-s times the iteration matrix is the unscaled one; m_tilde bounds its max-norm."""
    s: int = 0
    m_tilde: float


class SVDResult:
    """U (m x n), V (n x n) in split form, singular values as (e, f) pairs."""

    def __init__(self, U: SplitMatrix, V: SplitMatrix, sigma_e: np.ndarray, sigma_f: np.ndarray,
                 sweeps: int, max_sweeps: int, s: int, records: List[SweepRecord], upsilon: float):
        self.U = U
        self.V = V
        self.sigma_e = sigma_e
        self.sigma_f = sigma_f
        self.sweeps = sweeps
        self.max_sweeps = max_sweeps
        self.s = s
        self.records = records
        self.upsilon = upsilon

    @property
    def converged(self) -> bool:
        return self.sweeps < self.max_sweeps

    @property
    def sigma(self) -> List[EFNumber]:
        return [EFNumber(float(e), float(f)) for e, f in zip(self.sigma_e, self.sigma_f)]

    def sigma_values(self) -> np.ndarray:
        """Singular values rounded to binary64 (may overflow or underflow)."""
        with np.errstate(over="ignore"):
            return np.array([x.to_float() for x in self.sigma])

    @property
    def transformations(self) -> int:
        return sum(r.transformations for r in self.records)

    def __repr__(self) -> str:
        return f"SVDResult(n={self.V.n}, sweeps={self.sweeps}, converged={self.converged}, s={self.s})"


# -- scaling -------------------------------------------------------------------------------


def _floor_lg(q: Fraction) -> int:
    k = q.numerator.bit_length() - q.denominator.bit_length()
    return k - 1 if Fraction(2) ** k > q else k


def floor_lg(x: float) -> int:
    """Exact floor(log2(x)) for a positive finite float (subnormals included)."""
    return math.frexp(x)[1] - 1


def _bound_lg(varsigma: float, m: int, is_complex: bool) -> int:
    """floor(lg(omega / (varsigma * m))), with an extra 1/sqrt(2) in the complex case."""
    q = Fraction(OMEGA) / (Fraction(varsigma) * m)
    if is_complex:
        return _floor_lg(q * q / 2) // 2
    return _floor_lg(q)


def step_scaling(state: ScalingState, varsigma: float, m: int) -> Tuple[int, int]:
    """
    Scaling exponents for the current max-norm estimate.

    Returns:
        (s_paren, s_bracket): s_paren < 0 means a rotation could overflow, and
        s_bracket also protects the column norms
    """
    is_complex = varsigma == SVDConfig.varsigma(True)
    lg_m = floor_lg(state.m_tilde)
    s_paren = _bound_lg(varsigma, 1, is_complex) - lg_m - (1 if is_complex else 0)
    s_bracket = _bound_lg(varsigma, m, is_complex) - lg_m - 1
    return s_paren, s_bracket


def _scale_planes(sm: SplitMatrix, e: int, L: LaneBackend) -> None:
    if e == 0:
        return
    sm.re[...] = L.scalef(sm.re, float(e))
    if sm.im is not None:
        sm.im[...] = L.scalef(sm.im, float(e))


def initial_scale(G: SplitMatrix, varsigma: float, m: int,
                  backend: Optional[LaneBackend] = None) -> Tuple[SplitMatrix, ScalingState]:
    """Scale a copy of G by 2**s0 with s0 = s_bracket of its max-norm."""
    L = backend or get_backend()
    m_tilde = max_norm(G.planes(), L)
    if math.isinf(m_tilde):
        raise NonFiniteInputError("the input matrix has a non-finite element")
    if m_tilde == 0:
        raise ZeroMatrixError("the input matrix is zero")
    s0 = step_scaling(ScalingState(m_tilde=m_tilde), varsigma, m)[1]
    G1 = G.copy()
    _scale_planes(G1, s0, L)
    return G1, ScalingState(s=s0, m_tilde=math.ldexp(m_tilde, s0))


def finalize(G: SplitMatrix, e: np.ndarray, f: np.ndarray, s: int,
             backend: Optional[LaneBackend] = None) -> Tuple[SplitMatrix, np.ndarray, np.ndarray]:
    """Normalize U Sigma' to U column by column and backscale the exponents."""
    L = backend or get_backend()
    U = G.copy()
    neg_e = L.neg(e)[:, None]
    for p in U.planes():
        p[...] = L.div(L.scalef(p, neg_e), f[:, None])
    return U, L.sub(e, float(s)), np.array(f, copy=True)


# -- the driver ----------------------------------------------------------------------------


class JacobiSVD:
    """State of one run; see svd_run."""

    def __init__(self, G: SplitMatrix, config: SVDConfig, norm_engine: Optional[NormEngine] = None,
                 backend: Optional[LaneBackend] = None):
        self.L = backend or get_backend()
        self.config = config
        if G.m < G.n:
            raise FormatError(f"need m >= n, got a {G.m} x {G.n} matrix")
        if not G.all_finite():
            raise NonFiniteInputError("the input matrix has a non-finite element")
        self.s_lanes = G.s
        self.m_data, self.n_data = G.m, G.n
        bordered, _ = border(G, 2 * G.s)
        self.is_complex = bordered.is_complex
        self.varsigma = SVDConfig.varsigma(self.is_complex)
        self.m = bordered.m
        self.upsilon = EPS * math.sqrt(self.m)
        self.G, self.state = initial_scale(bordered, self.varsigma, self.m, self.L)
        self.V = identity(self.G.n, self.s_lanes, self.is_complex)
        self.table: StrategyTable = build_strategy(self.G.n, config.strategy)
        self.norm_engine = norm_engine or EFNormEngine(self.s_lanes, config.norm_reduction, self.L)
        self.e = np.zeros(self.G.n)
        self.f = np.ones(self.G.n)
        self.records: List[SweepRecord] = []
        self._times: Dict[str, float] = {}
        self._rescalings = 0
        logger.info(f"[SVD] {'complex' if self.is_complex else 'real'} {self.m_data}x{self.n_data} "
                    f"(bordered to {self.m}x{self.G.n}), strategy={config.strategy}, "
                    f"workers={config.workers}, s0={self.state.s}")

    # -- phases ------------------------------------------------------------------------

    def _timed(self, phase: str, started: float) -> None:
        self._times[phase] = self._times.get(phase, 0.0) + time.perf_counter() - started

    def _rescale(self, exponent: int) -> None:
        _scale_planes(self.G, exponent, self.L)
        self.state.s += exponent
        self.state.m_tilde = math.ldexp(self.state.m_tilde, exponent)
        self._rescalings += 1
        logger.warning(f"[SVD] rescaled the iteration matrix by 2**{exponent}, s={self.state.s}")

    def _norms_once(self) -> None:
        e = np.empty(self.G.n)
        f = np.empty(self.G.n)

        def work(sl: slice) -> None:
            im = None if self.G.im is None else self.G.im[sl]
            e[sl], f[sl] = self.norm_engine(self.G.re[sl], im)

        run_sliced(work, self.G.n, self.config.workers)
        if np.any(norm_overflowed(e, f)):
            raise ColumnNormOverflow(f"{int(np.count_nonzero(norm_overflowed(e, f)))} column norms overflowed")
        self.e, self.f = e, f

    def _norms(self, applied: int) -> None:
        for attempt in Retrying(retry=retry_if_exception_type(ColumnNormOverflow),
                                stop=stop_after_attempt(self.config.max_rescale_attempts), reraise=True):
            with attempt:
                if attempt.retry_state.attempt_number > 1:
                    s_bracket = step_scaling(self.state, self.varsigma, self.m)[1]
                    extra = min(s_bracket - applied, 0)
                    if extra:
                        self._rescale(extra)
                        applied += extra
                    else:
                        self._rescalings += 1
                    logger.warning(f"[SVD] column norm overflow, attempt {attempt.retry_state.attempt_number}")
                self._norms_once()

    def _dots(self, p: np.ndarray, q: np.ndarray) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        re = np.empty(p.size)
        im = np.empty(p.size) if self.is_complex else None
        G, e, f = self.G, self.e, self.f

        def work(sl: slice) -> None:
            ps, qs = p[sl], q[sl]
            if self.is_complex:
                z = zdpscl((G.re[qs], G.im[qs]), (G.re[ps], G.im[ps]), e[qs], f[qs], e[ps], f[ps],
                           self.s_lanes, self.L)
                re[sl], im[sl] = z.re_z, z.im_z
            else:
                re[sl] = ddpscl(G.re[qs], G.re[ps], e[qs], f[qs], e[ps], f[ps], self.s_lanes, self.L)

        run_sliced(work, p.size, self.config.workers)
        return re, im

    def _grammians(self, p, q, re, im):
        chunks = p.size // self.s_lanes
        shape = (chunks, self.s_lanes)
        mask, _ = check_convergence(re.reshape(shape), None if im is None else im.reshape(shape),
                                    self.upsilon, self.L)
        counts = self.L.popcount(self.L.pack_mask(mask))
        a11 = np.zeros(p.size)
        a22 = np.zeros(p.size)
        a21_re = np.zeros(p.size)
        a21_im = np.zeros(p.size) if self.is_complex else None
        active = np.repeat(counts > 0, self.s_lanes)
        if active.any():
            out = form_grammians(re[active], None if im is None else im[active],
                                 self.e[p[active]], self.f[p[active]], self.e[q[active]], self.f[q[active]],
                                 self.L)
            a11[active], a22[active], a21_re[active] = out[0], out[1], out[2]
            if self.is_complex:
                a21_im[active] = out[3]
        batch = HermBatch2(a11, a22, a21_re, a21_im, s=self.s_lanes)
        return batch, mask.ravel(), counts

    def _swap_columns(self, a: np.ndarray, b: np.ndarray) -> None:
        for sm in (self.G, self.V):
            for plane in sm.planes():
                plane[a], plane[b] = plane[b].copy(), plane[a].copy()
        self.e[a], self.e[b] = self.e[b].copy(), self.e[a].copy()
        self.f[a], self.f[b] = self.f[b].copy(), self.f[a].copy()

    def _gram_schmidt(self, p, q, a21, reverse: np.ndarray) -> None:
        """Orthogonalize the smaller column of each pair against the larger one (G only)."""
        e, f, G = self.e, self.f, self.G
        big = np.where(reverse, q, p)
        small = np.where(reverse, p, q)
        G.re[small] = gram_schmidt_real(G.re[small], G.re[big], a21, e[small], f[small], e[big], f[big], self.L)
        if reverse.any():
            self._swap_columns(p[reverse], q[reverse])

    def _rotations(self, p, q, transform, perm, out, re) -> float:
        keep = ~transform & perm
        if keep.any():
            self._swap_columns(p[keep], q[keep])
        rot_sel = np.flatnonzero(transform)
        if rot_sel.size == 0:
            return 0.0
        if not self.is_complex and self.config.gram_schmidt:
            e, f = self.e, self.f
            fwd = gram_schmidt_trigger(e[p], f[p], e[q], f[q], self.upsilon, self.L) & transform
            rev = gram_schmidt_trigger(e[q], f[q], e[p], f[p], self.upsilon, self.L) & transform & ~fwd
            gs = fwd | rev
            if gs.any():
                logger.debug(f"[SVD] Gram-Schmidt on {int(gs.sum())} pairs")
                self._gram_schmidt(p[gs], q[gs], re[gs], rev[gs])
                rot_sel = np.flatnonzero(transform & ~gs)
        maxima = np.zeros(rot_sel.size)
        G, V = self.G, self.V

        def work(sl: slice) -> None:
            sel = rot_sel[sl]
            ps, qs = p[sel], q[sel]
            rot = RotationParams(out.cos_phi[sel], out.cosalpha_tanphi[sel],
                                 None if out.sinalpha_tanphi is None else out.sinalpha_tanphi[sel], perm[sel])
            xp, xq = [pl[ps] for pl in G.planes()], [pl[qs] for pl in G.planes()]
            maxima[sl] = rotate_pairs(xp, xq, rot, self.L)
            for pl, a, b in zip(G.planes(), xp, xq):
                pl[ps], pl[qs] = a, b
            vp, vq = [pl[ps] for pl in V.planes()], [pl[qs] for pl in V.planes()]
            rotate_pairs(vp, vq, rot, self.L)
            for pl, a, b in zip(V.planes(), vp, vq):
                pl[ps], pl[qs] = a, b

        run_sliced(work, rot_sel.size, self.config.workers)
        return float(maxima.max()) if maxima.size else 0.0

    def _check_invariants(self, where: str) -> None:
        for name, sm in (("G", self.G), ("V", self.V)):
            if not sm.all_finite():
                raise InvariantViolation(f"{where}: non-finite entry in {name}")
            if not sm.padding_is_zero():
                raise InvariantViolation(f"{where}: nonzero padding in {name}")

    # -- main loop ----------------------------------------------------------------------

    def step(self, k: int) -> int:
        """One step over the pairs of table row k; returns its transformation count."""
        L = self.L
        started = time.perf_counter()
        s_paren, s_bracket = step_scaling(self.state, self.varsigma, self.m)
        applied = 0
        if s_paren < 0:
            self._rescale(s_bracket)
            applied = s_bracket
        self._norms(applied)
        self._timed("norms", started)

        p, q = self.table.step(k)
        started = time.perf_counter()
        re, im = self._dots(p, q)
        self._timed("dots", started)

        started = time.perf_counter()
        batch, transform, counts = self._grammians(p, q, re, im)
        t = int(counts.sum())
        self._timed("grammians", started)

        started = time.perf_counter()
        out = evd2_batch(batch, skip=counts, workers=self.config.workers, backend=L)
        perm = out.perm_bits()
        self._timed("evd", started)

        started = time.perf_counter()
        m_step = self._rotations(p, q, transform, perm, out, re)
        self.state.m_tilde = max(self.state.m_tilde, m_step)
        self._timed("rotations", started)
        if self.config.debug_checks:
            self._check_invariants(f"step {k}")
        return t

    def run(self) -> SVDResult:
        cfg = self.config
        sweeps = cfg.max_sweeps
        for sweep in range(cfg.max_sweeps):
            self._times = {phase: 0.0 for phase in PHASES}
            self._rescalings = 0
            total = 0
            for k in range(self.table.steps):
                total += self.step(k)
            self.records.append(SweepRecord(sweep=sweep, transformations=total, rescalings=self._rescalings,
                                            scale_exponent=self.state.s, phase_seconds=dict(self._times)))
            logger.info(f"[SVD] sweep {sweep}: T={total}, s={self.state.s}")
            if total == 0:
                sweeps = sweep
                break
        if sweeps == cfg.max_sweeps:
            logger.warning(f"[SVD] no convergence in {cfg.max_sweeps} sweeps")
            self._norms(0)
        return self._result(sweeps)

    def _result(self, sweeps: int) -> SVDResult:
        U, e, f = finalize(self.G, self.e, self.f, self.state.s, self.L)
        # appended unit columns are the ones with V support in the appended rows
        data = ~np.any(self.V.re[:, self.n_data:self.G.n] != 0, axis=1)
        if self.V.im is not None:
            data &= ~np.any(self.V.im[:, self.n_data:self.G.n] != 0, axis=1)
        mt_u = pad_length(self.m_data, self.s_lanes)
        mt_v = pad_length(self.n_data, self.s_lanes)
        U = SplitMatrix(U.re[data][:, :mt_u], None if U.im is None else U.im[data][:, :mt_u], self.m_data, self.s_lanes)
        V = SplitMatrix(self.V.re[data][:, :mt_v], None if self.V.im is None else self.V.im[data][:, :mt_v],
                        self.n_data, self.s_lanes)
        return SVDResult(U, V, e[data], f[data], sweeps, self.config.max_sweeps, self.state.s,
                         self.records, self.upsilon)


def svd_run(G: SplitMatrix, config: Optional[SVDConfig] = None, norm_engine: Optional[NormEngine] = None,
            backend: Optional[LaneBackend] = None) -> SVDResult:
    """
    Singular value decomposition G = U diag(sigma) V*.

    Args:
        G: m x n split-form matrix, m >= n, of full column rank with finite entries
        config: run options (defaults come from Settings)
        norm_engine: column-norm procedure returning (e, f) arrays; an e of +inf
            signals overflow and triggers rescaling
        backend: lane backend (default: the configured one)

    Returns:
        SVDResult; result.converged is False when no sweep finished without
        transformations (sweeps == max_sweeps)
    """
    return JacobiSVD(G, config or SVDConfig(), norm_engine, backend).run()
