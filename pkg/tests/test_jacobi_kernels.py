import math

import numpy as np
import pytest

from simdjac.core import oracle
from simdjac.core.constants import EPS, OMEGA
from simdjac.core.errors import ZeroNormError
from simdjac.core.jacobi_kernels import (
    RotationParams,
    check_convergence,
    ddpscl,
    djrot,
    form_grammians,
    gram_schmidt_real,
    gram_schmidt_trigger,
    rotate_pairs,
    zdpscl,
    zjrot,
)
from simdjac.core.models import ERROR_BOUNDS


def _col(*values, length=8):
    x = np.zeros(length)
    x[:len(values)] = values
    return x


def test_ddpscl_of_a_column_with_itself_is_one():
    g = _col(3.0, 4.0)
    # ||g|| = 5 = 2**2 * 1.25
    z = ddpscl(g, g, 2.0, 1.25, 2.0, 1.25)
    assert z.tolist() == [1.0]


def test_ddpscl_orthogonal_and_opposite_columns():
    assert ddpscl(_col(1.0), _col(0.0, 1.0), 0.0, 1.0, 0.0, 1.0)[0] == 0.0
    assert ddpscl(_col(2.0), _col(-8.0), 1.0, 1.0, 3.0, 1.0)[0] == -1.0


def test_ddpscl_matches_numpy_on_random_columns():
    rng = np.random.default_rng(3)
    gq, gp = rng.standard_normal((2, 4, 32))
    nq, np_ = np.linalg.norm(gq, axis=1), np.linalg.norm(gp, axis=1)
    eq, fq = np.frexp(nq)
    ep, fp = np.frexp(np_)
    # frexp gives f in [0.5, 1)
    z = ddpscl(gq, gp, eq - 1.0, fq * 2, ep - 1.0, fp * 2)
    expected = np.sum(gq * gp, axis=1) / (nq * np_)
    assert np.allclose(z, expected, rtol=1e-13)


def test_zdpscl_conjugates_the_first_column():
    zero = _col()
    z = zdpscl((_col(1.0), zero), (zero, _col(1.0)), 0.0, 1.0, 0.0, 1.0)
    assert z.re_z.tolist() == [0.0] and z.im_z.tolist() == [1.0]
    z = zdpscl((zero, _col(1.0)), (_col(1.0), zero), 0.0, 1.0, 0.0, 1.0)
    assert z.im_z.tolist() == [-1.0]


def test_zero_norm_is_rejected():
    with pytest.raises(ZeroNormError):
        ddpscl(_col(), _col(1.0), -math.inf, 1.0, 0.0, 1.0)


def test_check_convergence_boundary_sets_the_bit():
    mask, count = check_convergence(np.array([0.5, 0.25, 0.1]), None, 0.25)
    assert mask.tolist() == [True, True, False] and count == 2
    mask, count = check_convergence(np.array([3.0]), np.array([4.0]), 5.0)
    assert mask.tolist() == [True] and count == 1
    _, count = check_convergence(np.array([3.0]), np.array([-4.0]), 5.000001)
    assert count == 0


def test_form_grammians_scales_down_extreme_norm_ratios():
    a11, a22, re, im = form_grammians(np.array([0.5]), None, np.array([1030.0]), np.array([1.0]),
                                      np.array([0.0]), np.array([1.0]))
    # s = 1023 - 1030 = -7
    assert a11[0] == 2.0 ** 1023
    assert a22[0] == 2.0 ** -1037
    assert re[0] == 0.5 * 2.0 ** -7
    assert im is None


def test_form_grammians_without_scaling():
    a11, a22, re, im = form_grammians(np.array([0.25]), np.array([-0.5]), np.array([0.0]),
                                      np.array([1.5]), np.array([0.0]), np.array([1.0]))
    assert a11[0] == 1.5
    assert a22[0] == 1.0 / 1.5
    assert (re[0], im[0]) == (0.25, -0.5)


def test_identity_rotation_leaves_columns():
    p, q = _col(1.0, 2.0), _col(-3.0)
    peak = djrot(p, q, RotationParams.single(1.0, 0.0))
    assert p.tolist() == _col(1.0, 2.0).tolist() and q.tolist() == _col(-3.0).tolist()
    assert peak == 3.0


def test_swap_only_rotation():
    p, q = _col(1.0), _col(0.0, 5.0)
    djrot(p, q, RotationParams.single(1.0, 0.0, swap=True))
    assert p.tolist() == _col(0.0, 5.0).tolist()
    assert q.tolist() == _col(1.0).tolist()


def test_real_rotation():
    c = 1.0 / math.sqrt(2.0)
    p, q = _col(1.0), _col(0.0, 1.0)
    peak = djrot(p, q, RotationParams.single(c, 1.0))
    assert p[:2].tolist() == [c, c]
    assert q[:2].tolist() == [-c, c]
    assert peak == c


def test_complex_rotation_with_imaginary_tangent():
    pr, pi, qr, qi = _col(1.0), _col(), _col(), _col()
    zjrot([pr, pi], [qr, qi], RotationParams.single(1.0, 0.0, 1.0))
    # p' = p + i q, q' = q + i p
    assert (pr[0], pi[0]) == (1.0, 0.0)
    assert (qr[0], qi[0]) == (0.0, 1.0)


def test_rotate_pairs_groups_loop_variants():
    rng = np.random.default_rng(6)
    xp = [rng.standard_normal((4, 8)), rng.standard_normal((4, 8))]
    xq = [rng.standard_normal((4, 8)), rng.standard_normal((4, 8))]
    before = [x.copy() for x in xp + xq]
    rot = RotationParams(np.array([1.0, 0.8, 1.0, 0.6]), np.array([0.0, 0.75, 0.5, 0.0]),
                         np.array([0.0, 0.0, 0.25, 1.0]), np.array([False, True, False, False]))
    rotate_pairs(xp, xq, rot)
    assert np.array_equal(xp[0][0], before[0][0]) and np.array_equal(xq[1][0], before[3][0])
    p = before[0] + 1j * before[1]
    q = before[2] + 1j * before[3]
    for k in (1, 2, 3):
        t = rot.cosalpha_tanphi[k] + 1j * rot.sinalpha_tanphi[k]
        c = rot.cos_phi[k]
        new_p = c * (p[k] + t * q[k])
        new_q = c * (q[k] - np.conj(t) * p[k])
        if rot.swap[k]:
            new_p, new_q = new_q, new_p
        assert np.allclose(xp[0][k] + 1j * xp[1][k], new_p, rtol=1e-14, atol=1e-14)
        assert np.allclose(xq[0][k] + 1j * xq[1][k], new_q, rtol=1e-14, atol=1e-14)


def test_gram_schmidt_removes_the_parallel_component():
    g = _col(1.0)
    out = gram_schmidt_real(g, g.copy(), 1.0, 0.0, 1.0, 0.0, 1.0)
    assert not np.any(out)
    gq = _col(1.0, 1e-20)
    out = gram_schmidt_real(gq, _col(1.0), 1.0, 0.0, 1.0, 0.0, 1.0)
    assert out[0] == 0.0 and out[1] == 1e-20


def test_gram_schmidt_trigger():
    def trig(e_big, e_small):
        return gram_schmidt_trigger(np.array([e_big]), np.array([1.0]),
                                    np.array([e_small]), np.array([1.0]), 1.0)[0]

    assert not trig(100.0, 0.0)
    assert trig(1100.0, 0.0)
    assert not trig(1100.0, -math.inf)


def _tangents(rng, k):
    tan = rng.uniform(0.0, 1.0, k)
    alpha = rng.uniform(-math.pi, math.pi, k)
    return tan, np.cos(alpha) * tan, np.sin(alpha) * tan, 1.0 / np.sqrt(1.0 + tan * tan)


def test_real_rotation_relative_error_bound():
    Q = oracle.QUAD
    rng = np.random.default_rng(12)
    k, n = 16, 64
    xp = rng.standard_normal((k, n)) * 2.0 ** rng.integers(-200, 200, (k, n))
    xq = rng.standard_normal((k, n)) * 2.0 ** rng.integers(-200, 200, (k, n))
    C = rng.uniform(-1.0, 1.0, k)
    C[0] = 0.5
    xp[0, :8] = -0.5 * xq[0, :8]  # p + q*C cancels exactly
    xp[1, :4] = xq[1, :4] = 0.0
    c = 1.0 / np.sqrt(1.0 + C * C)
    before_p, before_q = xp.copy(), xq.copy()
    rotate_pairs([xp], [xq], RotationParams(c, C, None, np.zeros(k, dtype=bool)))
    lo, hi = (1 - Q.mpf(EPS)) ** 2, (1 + Q.mpf(EPS)) ** 2
    for i in range(k):
        ci, Ci = Q.mpf(c[i]), Q.mpf(C[i])
        for j in range(n):
            p, q = Q.mpf(before_p[i, j]), Q.mpf(before_q[i, j])
            for got, exact in ((xp[i, j], (p + q * Ci) * ci), (xq[i, j], (q - p * Ci) * ci)):
                if exact == 0:
                    assert got == 0.0
                else:
                    assert lo <= Q.mpf(got) / exact <= hi, (i, j)


def test_complex_rotation_relative_error_bound():
    Q = oracle.QUAD
    rng = np.random.default_rng(13)
    k, n = 16, 64
    planes = [rng.standard_normal((k, n)) * 2.0 ** rng.integers(-8, 8, (k, n)) for _ in range(4)]
    before = [x.copy() for x in planes]
    _, C, S, c = _tangents(rng, k)
    xp, xq = planes[:2], planes[2:]
    rotate_pairs(xp, xq, RotationParams(c, C, S, np.zeros(k, dtype=bool)))
    bound = ERROR_BOUNDS.complex_rotation * EPS
    checked = 0
    for i in range(k):
        ci, t = Q.mpf(c[i]), Q.mpc(C[i], S[i])
        for j in range(n):
            p = Q.mpc(before[0][i, j], before[1][i, j])
            q = Q.mpc(before[2][i, j], before[3][i, j])
            new_p = (p + q * t) * ci
            new_q = (q - p * t.conjugate()) * ci
            for got, exact, other in ((xp, new_p, q.real), (xq, new_q, p.real)):
                # the bound needs |g'| / fl(cos(phi)) >= |Re| of the other column's element
                if exact == 0 or abs(exact) / ci < abs(other):
                    continue
                value = Q.mpc(got[0][i, j], got[1][i, j])
                assert abs(value - exact) / abs(exact) <= bound, (i, j)
                checked += 1
    assert checked > k * n // 2


def _signs(rng, shape):
    return rng.choice([-1.0, 1.0], shape)


def test_rotations_stay_finite_near_the_overflow_threshold():
    rng = np.random.default_rng(14)
    k, n = 32, 32
    half = OMEGA / 2
    xp = _signs(rng, (k, n)) * half * rng.uniform(0.5, 1.0, (k, n))
    xq = _signs(rng, (k, n)) * half * rng.uniform(0.5, 1.0, (k, n))
    xp[:, 0], xq[:, 0] = half, -half
    C = rng.uniform(-1.0, 1.0, k)
    C[:4] = [1.0, -1.0, 1.0, -1.0]
    peak = rotate_pairs([xp], [xq], RotationParams(1.0 / np.sqrt(1.0 + C * C), C, None, np.zeros(k, dtype=bool)))
    assert np.all(peak <= OMEGA)
    assert np.all(np.isfinite(xp)) and np.all(np.isfinite(xq))

    quarter = OMEGA / 4
    planes = [_signs(rng, (k, n)) * quarter * rng.uniform(0.5, 1.0, (k, n)) for _ in range(4)]
    for x in planes:
        x[:, 0] = quarter
    _, C, S, c = _tangents(rng, k)
    C[0], S[0], c[0] = math.sqrt(0.5), math.sqrt(0.5), math.sqrt(0.5)
    peak = rotate_pairs(planes[:2], planes[2:], RotationParams(c, C, S, np.zeros(k, dtype=bool)))
    assert np.all(peak <= OMEGA)
    assert all(np.all(np.isfinite(x)) for x in planes)
