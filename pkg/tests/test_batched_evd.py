import math

import numpy as np
import pytest

from simdjac.core import oracle, testgen
from simdjac.core.batched_evd import (
    EVDOut2,
    HermBatch2,
    evd2_batch,
    evd2_herm_vec,
    evd2_sym_vec,
    jacobi_angles,
    naive_hypot,
    polar2,
    scale_exponent,
)
from simdjac.core.constants import EPS, MU_CHECK, OMEGA
from simdjac.core.errors import FormatError, NonFiniteInputError
from simdjac.core.lanes import get_backend
from simdjac.core.models import ERROR_BOUNDS


def test_scale_exponent():
    assert scale_exponent(1.0, 1.0, 0.0) == 1020.0
    assert scale_exponent(OMEGA / 8, -OMEGA / 8, OMEGA / 8, -OMEGA / 8) == 0.0
    assert scale_exponent(0.0, 0.0, 0.0, 0.0) == OMEGA


def test_naive_hypot_witnesses():
    assert naive_hypot(3.0, 4.0) == 5.0
    x = 3.7
    assert naive_hypot(x, -x) == math.sqrt(2.0) * x
    assert naive_hypot(MU_CHECK, MU_CHECK) == MU_CHECK
    assert naive_hypot(0.0, 0.0) == 0.0


def test_polar2():
    c, s, r = polar2(3.0, 4.0)
    assert (float(c), float(s), float(r)) == (0.6, 0.8, 5.0)
    c, s, r = polar2(0.0, 0.0)
    assert (float(c), float(s), float(r)) == (1.0, 0.0, 0.0)
    c, s, r = polar2(MU_CHECK, MU_CHECK)
    assert float(c) == 1.0 and float(s) == 1.0
    c, _, _ = polar2(-3.0, 4.0)
    assert float(c) == -0.6


def test_jacobi_angles():
    tan, _, _, cos = jacobi_angles(1.0, 1.0, 0.0)
    assert float(tan) == 0.0 and float(cos) == 1.0
    tan, _, _, _ = jacobi_angles(1.0, 1.0, 2.0)
    assert float(tan) == 1.0
    tan, _, _, cos = jacobi_angles(1.0, 0.0, 1.0)
    assert float(tan) == 1.0 / (1.0 + math.sqrt(2.0))
    exact = oracle.quad_jacobi_params(1.0, 0.0, 0.5)
    assert oracle.rel_diff(float(cos), exact["cos_phi"]) <= ERROR_BOUNDS.cos_phi(False)
    tan, _, _, _ = jacobi_angles(0.0, 1.0, 1.0)
    assert float(tan) < 0


def test_eigenvalues_of_simple_matrices():
    out = evd2_batch(HermBatch2([3.0], [1.0], [0.0], [0.0]))
    assert (out.lambda1[0], out.lambda2[0]) == (3.0, 1.0)
    assert out.cos_phi[0] == 1.0 and out.cosalpha_tanphi[0] == 0.0
    out = evd2_batch(HermBatch2([0.0], [0.0], [1.0], [0.0]))
    assert (out.lambda1[0], out.lambda2[0]) == (1.0, -1.0)


def test_identity_batch():
    batch = HermBatch2(np.ones(8), np.ones(8), np.zeros(8), np.zeros(8))
    out = EVDOut2(8)
    evd2_herm_vec(0, batch, out)
    assert np.all(out.cos_phi == 1.0)
    assert not np.any(out.cosalpha_tanphi) and not np.any(out.sinalpha_tanphi)
    assert np.all(out.lambda1 == 1.0) and np.all(out.lambda2 == 1.0)
    assert int(out.perm[0]) == 0


def test_pathological_matrix():
    out = evd2_batch(testgen.pathological_batch(), backscale=False)
    assert np.all(out.neg_zeta[:2] == 0.0)
    assert np.all(out.cosalpha_tanphi[:2] == 1.0)
    assert out.sinalpha_tanphi[0] == 1.0 and out.sinalpha_tanphi[1] == -1.0
    assert np.all(out.cos_phi[:2] == 1.0 / math.sqrt(2.0))


def test_symmetric_kernel_sign_transfer():
    batch = HermBatch2([1.0, 2.0], [1.0, 1.0], [-0.5, 0.0])
    out = EVDOut2(2, is_complex=False)
    evd2_sym_vec(0, batch, out)
    assert out.cosalpha_tanphi[0] == -1.0
    assert out.cosalpha_tanphi[1] == 0.0 and out.cos_phi[1] == 1.0
    assert out.sinalpha_tanphi is None


def test_kernel_offsets_are_checked():
    batch = HermBatch2(np.ones(16), np.ones(16), np.zeros(16))
    with pytest.raises(ValueError):
        evd2_sym_vec(3, batch, EVDOut2(16, is_complex=False))
    with pytest.raises(ValueError):
        evd2_herm_vec(0, batch, EVDOut2(16))


def test_symmetric_matches_hermitian_with_zero_imaginary_part():
    rng = np.random.default_rng(5)
    a11, a22, a21 = rng.standard_normal((3, 64)) * 2.0 ** rng.integers(-40, 40, (3, 64))
    sym = evd2_batch(HermBatch2(a11, a22, a21))
    herm = evd2_batch(HermBatch2(a11, a22, a21, np.zeros(64)))
    assert np.array_equal(sym.lambda1, herm.lambda1)
    assert np.array_equal(sym.lambda2, herm.lambda2)
    assert np.array_equal(np.abs(sym.cosalpha_tanphi), np.abs(herm.cosalpha_tanphi))
    assert np.array_equal(sym.cos_phi, herm.cos_phi)


def test_empty_batch_and_all_zero_skip():
    empty = evd2_batch(HermBatch2([], [], []))
    assert empty.r == 0 and empty.cos_phi.size == 0
    batch = testgen.gen2x2_batch(16, seed=1).batch
    out = evd2_batch(batch, skip=np.zeros(batch.chunks, dtype=np.uint64))
    assert not np.any(out.cos_phi) and not np.any(out.lambda1)


def test_skip_words_select_chunks():
    batch = testgen.gen2x2_batch(16, seed=2).batch
    out = evd2_batch(batch, skip=np.array([0, 3], dtype=np.uint64))
    full = evd2_batch(batch)
    assert not np.any(out.cos_phi[:8])
    assert np.array_equal(out.cos_phi[8:], full.cos_phi[8:])


def test_worker_count_does_not_change_results():
    batch = testgen.gen2x2_batch(200, seed=9).batch
    one = evd2_batch(batch, workers=1)
    many = evd2_batch(batch, workers=4)
    for name, values in one.fields().items():
        assert np.array_equal(values, many.fields()[name]), name
    assert np.array_equal(one.perm, many.perm)


def test_backends_are_bit_identical():
    batch = testgen.gen2x2_batch(16, seed=4).batch
    vec = evd2_batch(batch, backend=get_backend("vector"), with_sine=True)
    sca = evd2_batch(batch, backend=get_backend("scalar"), with_sine=True)
    for name, values in vec.fields().items():
        assert np.array_equal(values, sca.fields()[name]), name


def test_perm_marks_descending_order():
    out = evd2_batch(HermBatch2([1.0, 3.0], [3.0, 1.0], [0.0, 0.0], [0.0, 0.0]))
    bits = out.perm_bits()
    assert bits[0] and not bits[1]


def test_batch_validation():
    with pytest.raises(NonFiniteInputError):
        HermBatch2([1.0, np.inf], [1.0, 1.0], [0.0, 0.0])
    with pytest.raises(FormatError):
        HermBatch2([1.0, 1.0], [1.0], [0.0, 0.0])


@pytest.mark.parametrize("kind", ["real", "complex"])
def test_generated_batch_residuals_are_small(kind):
    gen = testgen.gen2x2_batch(64, seed=21, kind=kind)
    out = evd2_batch(gen.batch, with_sine=True)
    rho, delta = oracle.evd_residuals(gen.batch, out)
    keep = np.max(np.abs(gen.lambdas), axis=1) > 2.0 ** -900
    assert np.all(rho[keep] < 64 * EPS)
    assert np.all(delta < 32 * EPS)


def _bound_violations(kind, r, seed):
    gen = testgen.gen2x2_batch(r, seed=seed, kind=kind)
    b = gen.batch
    L = get_backend("vector")
    a11, a22, re = b.a11[:r], b.a22[:r], b.re_a21[:r]
    im = b.im_a21[:r] if kind == "complex" else None
    zeta = scale_exponent(a11, a22, re, im)
    sa11, sa22, sre = L.scalef(a11, zeta), L.scalef(a22, zeta), L.scalef(re, zeta)
    if im is None:
        cos_a, sin_a, modulus = np.ones(r), np.zeros(r), L.abs(sre)
        sim = np.zeros(r)
    else:
        sim = L.scalef(im, zeta)
        cos_a, sin_a, modulus = polar2(sre, sim)
    tan, _, _, cos = jacobi_angles(sa11, sa22, L.scalef(modulus, 1.0))
    bad = []
    for i in range(r):
        comps = [abs(sre[i]), abs(sim[i])]
        if any(0 < c < 2.0 ** -969 for c in comps):
            continue
        exact = oracle.quad_jacobi_params(a11[i], a22[i], re[i], None if im is None else im[i])
        t = abs(exact["tan_phi"])
        if t != 0 and t < oracle.QUAD.mpf(2) ** -960:
            continue
        if oracle.rel_diff(abs(tan[i]), t) > ERROR_BOUNDS.tan_phi(kind == "complex"):
            bad.append(("tan", i))
        if oracle.rel_diff(cos[i], exact["cos_phi"]) > ERROR_BOUNDS.cos_phi(kind == "complex"):
            bad.append(("cos", i))
        if im is not None:
            mod = oracle.QUAD.sqrt(oracle.QUAD.mpf(cos_a[i]) ** 2 + oracle.QUAD.mpf(sin_a[i]) ** 2)
            if abs(mod - 1) > ERROR_BOUNDS.alpha * EPS:
                bad.append(("alpha", i))
    return bad


@pytest.mark.parametrize("kind", ["real", "complex"])
def test_relative_error_bounds_hold(kind):
    assert _bound_violations(kind, 400, seed=77) == []


def test_naive_hypot_relative_error_bound():
    Q = oracle.QUAD
    low, high = oracle.quad_hypot_bounds()
    below, above = ERROR_BOUNDS.hypot()
    assert 1 - Q.mpf(below) < low < 1 < high < 1 + Q.mpf(above)
    rng = np.random.default_rng(31)
    n = 4000
    x = np.ldexp(rng.uniform(1, 2, n), rng.integers(-500, 500, n)) * rng.choice([-1.0, 1.0], n)
    near = x * rng.uniform(0.25, 4.0, n)
    far = np.ldexp(rng.uniform(1, 2, n), rng.integers(-500, 500, n))
    y = np.where(rng.random(n) < 0.5, near, far) * rng.choice([-1.0, 1.0], n)
    h = naive_hypot(x, y)
    for xi, yi, hi in zip(x.tolist(), y.tolist(), h.tolist()):
        ratio = Q.mpf(hi) / Q.sqrt(Q.mpf(xi) ** 2 + Q.mpf(yi) ** 2)
        assert low < ratio < high, (xi, yi)


def _full_range(rng, r):
    mag = np.ldexp(rng.uniform(1, 2, r), rng.integers(-1074, 1024, r))
    mag[rng.random(r) < 0.2] = OMEGA
    mag[rng.random(r) < 0.02] = 0.0
    return mag * rng.choice([-1.0, 1.0], r)


@pytest.mark.parametrize("kind", ["real", "complex"])
def test_full_range_entries_never_overflow(kind):
    rng = np.random.default_rng(1024)
    r = 4096
    a11, a22, re = (_full_range(rng, r) for _ in range(3))
    im = _full_range(rng, r) if kind == "complex" else None
    batch = HermBatch2(a11, a22, re, im)
    for name, values in evd2_batch(batch, backscale=False, with_sine=True).fields().items():
        if values.dtype.kind == "f":
            assert np.all(np.isfinite(values)), name
    for name, values in evd2_batch(batch, with_sine=True).fields().items():
        if values.dtype.kind == "f":
            assert not np.any(np.isnan(values)), name
