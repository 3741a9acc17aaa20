import math

import numpy as np
import pytest

from simdjac.core import oracle, testgen
from simdjac.core.batched_evd import EVDOut2, HermBatch2, evd2_batch
from simdjac.core.constants import EPS, OMEGA
from simdjac.core.errors import FormatError
from simdjac.core.oracle import DD, QUAD

# LAPACK CLAEV2 input whose computed eigenvector is far from unit length
CLAEV2_A = -1.428758589291419051209e-38
CLAEV2_C = -1.429318548157763248111e-38
MU_SINGLE = 2.0 ** -149


def test_two_sum_and_two_prod_are_exact():
    s, e = oracle.two_sum(np.float64(1e16), np.float64(1.0))
    assert (s, e) == (1e16, 1.0)
    p = DD.product(1.0 + 2.0 ** -30, 1.0 - 2.0 ** -30)
    assert float(p.hi) == 1.0 and float(p.lo) == -(2.0 ** -60)


def test_dd_arithmetic():
    assert DD(np.array([1e16, 1.0, -1e16, 1.0])).sum().to_float() == 2.0
    root = DD(2.0).sqrt().to_mpf()[0]
    assert abs(root - QUAD.sqrt(2)) < QUAD.mpf(2) ** -100
    third = (DD(1.0) / 3.0).to_mpf()[0]
    assert abs(third * 3 - 1) < QUAD.mpf(2) ** -100
    x = DD(3.0) - 1.0
    assert x.to_float() == 2.0 and (x * x).to_float() == 4.0
    assert DD(1.0).ldexp(-1074).to_float() == 5e-324


def test_quad_norm_and_dot():
    big = oracle.quad_norm(np.full(2, OMEGA))
    assert oracle.rel_diff(big.to_mpf(), QUAD.mpf(OMEGA) * QUAD.sqrt(2)) < 1e-30
    assert float(big) == math.inf
    assert float(oracle.quad_norm(np.array([3.0, 4.0]))) == 5.0
    assert float(oracle.quad_norm(np.array([3j, 4.0]))) == 5.0
    assert float(oracle.quad_dot([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])) == 32.0
    assert float(oracle.quad_norm(np.zeros(3))) == 0.0


def test_rel_diff_and_ratio_conventions():
    assert oracle.rel_diff(0.0, 0.0) == 0.0
    assert oracle.rel_diff(1.0, 0.0) == math.inf
    assert oracle.rel_diff(1.5, 1.0) == 0.5
    assert oracle.ratio(0.0, 0.0) == 1.0
    assert oracle.ratio(1.0, 0.0) == math.inf
    assert oracle.ratio(1.0, 4.0) == 0.25


def test_quad_evd2():
    big, small = oracle.quad_evd2(3.0, 1.0, 0.0)
    assert (big, small) == (3, 1)
    big, small = oracle.quad_evd2(0.0, 0.0, 3.0, 4.0)
    assert (big, small) == (5, -5)


def test_quad_jacobi_params():
    p = oracle.quad_jacobi_params(1.0, 0.0, 0.5)
    assert abs(p["tan_phi"] - 1 / (1 + QUAD.sqrt(2))) < 1e-32
    assert oracle.quad_jacobi_params(1.0, 0.0, -0.5)["tan_phi"] < 0
    assert oracle.quad_jacobi_params(2.0, 2.0, 1.0)["tan_phi"] == 1
    p = oracle.quad_jacobi_params(1.0, 1.0, 0.0, 0.0)
    assert p["tan_phi"] == 0 and p["cos_phi"] == 1 and p["cos_alpha"] == 1
    p = oracle.quad_jacobi_params(1.0, 0.0, 0.0, 2.0)
    assert p["cos_alpha"] == 0 and p["sin_alpha"] == 1


def test_quad_singular_values_are_sorted():
    sv = oracle.quad_singular_values(np.diag([1.0, 3.0, 2.0]))
    assert [float(x) for x in sv] == [3.0, 2.0, 1.0]
    sv = oracle.quad_singular_values(np.array([[0.0, 2j], [1.0, 0.0]]))
    assert [float(x) for x in sv] == [2.0, 1.0]


def test_det_residual():
    assert oracle.det_residual(1.0, 0.0) == 0.0
    assert oracle.det_residual(0.6, 0.8) < 1e-16
    assert oracle.det_residual(0.5, 0.5, 0.5) == pytest.approx(0.25)
    res = oracle.det_residuals(np.array([1.0, 0.0]), np.array([0.0, 2.0]))
    assert res.tolist() == [0.0, 3.0]


def test_laev2_on_a_diagonal_matrix():
    rt1, rt2, cs1, sr, si = oracle.ref_evd2(3.0, 0.0, 0.0, 1.0)
    assert (rt1, rt2) == (3.0, 1.0)
    assert abs(cs1) == 1.0 and sr == 0.0 and si == 0.0


def test_claev2_witness_loses_unitarity():
    rt1, _, cs1, sr, si = oracle.ref_evd2(CLAEV2_A, MU_SINGLE, MU_SINGLE, CLAEV2_C, dtype=np.float32)
    assert (sr, si) == (1.0, 1.0)
    assert -3e-4 < cs1 < -2e-4
    assert rt1 == pytest.approx(CLAEV2_C, rel=1e-6)
    assert oracle.det_residual(cs1, sr, si) > 0.9
    # the same matrix in binary64 goes through the kernel without trouble
    batch = HermBatch2([CLAEV2_A], [CLAEV2_C], [MU_SINGLE], [MU_SINGLE])
    out = evd2_batch(batch, with_sine=True)
    _, delta = oracle.evd_residuals(batch, out)
    assert delta[0] < 32 * EPS


def test_reference_batch_residuals():
    gen = testgen.gen2x2_batch(48, seed=31)
    ref = oracle.ref_evd2_batch(gen.batch)
    assert ref.backscaled and ref.cosalpha_sinphi is not None
    rho, delta = oracle.evd_residuals(gen.batch, ref)
    keep = np.max(np.abs(gen.lambdas), axis=1) > 2.0 ** -900
    assert np.all(rho[keep] < 1e-12)
    assert np.all(delta[keep] < 1e-13)


def test_residuals_need_backscaled_output():
    batch = HermBatch2(np.ones(8), np.ones(8), np.zeros(8))
    with pytest.raises(FormatError):
        oracle.evd_residuals(batch, EVDOut2(8, is_complex=False, backscale=False))


def test_eigenvalue_residuals():
    out = evd2_batch(HermBatch2([3.0, 0.0], [1.0, 0.0], [0.0, 1.0]))
    lam_f, lam_max = oracle.eigenvalue_residuals(out, np.array([[1.0, 3.0], [-1.0, 1.0]]))
    assert lam_f.tolist() == [0.0, 0.0] and lam_max.tolist() == [0.0, 0.0]
    lam_f, lam_max = oracle.eigenvalue_residuals(out, np.array([[3.0, 2.0], [0.0, 0.0]]))
    assert lam_max[0] == 0.0 and lam_f[0] == pytest.approx(1 / math.sqrt(13))
    assert lam_f[1] == math.inf


def test_compare_identical_outputs():
    gen = testgen.gen2x2_batch(24, seed=5)
    out = evd2_batch(gen.batch, with_sine=True)
    cmp = oracle.ref_evd2_batch_compare(gen.batch, out, out, gen.lambdas, batch_id=3)
    assert cmp.batch_id == 3 and cmp.count == 24
    assert cmp.rho_ratio == 1.0 and cmp.lambda_f_ratio == 1.0
    assert cmp.rho_kernel == cmp.rho_ref


def test_error_measures_of_an_exact_decomposition():
    eye = np.eye(4)
    m = oracle.error_measures(eye, eye, eye, [0.0] * 4, [1.0] * 4, [1.0] * 4)
    assert (m.r_G, m.r_U, m.r_V, m.r_Sigma) == (0.0, 0.0, 0.0, 0.0)


def test_error_measures_detect_perturbations():
    eye = np.eye(4)
    U = eye.copy()
    U[0, 1] = 1e-8
    m = oracle.error_measures(eye, U, eye, [0.0] * 4, [1.0] * 4, [1.0] * 4)
    assert m.r_U == pytest.approx(math.sqrt(2) * 1e-8, rel=1e-6)
    assert m.r_G == pytest.approx(0.5e-8, rel=1e-6)
    assert m.r_V == 0.0
    m = oracle.error_measures(eye, eye, eye, [1.0, 0.0, 0.0, 0.0], [1.0] * 4, [1.0] * 4)
    assert m.r_Sigma == 1.0


def test_error_measures_reject_mismatched_shapes():
    with pytest.raises(FormatError):
        oracle.error_measures(np.eye(4), np.eye(3), np.eye(4), [0.0] * 4, [1.0] * 4, [1.0] * 4)
