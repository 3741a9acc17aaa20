import numpy as np
import pytest

from simdjac.core import oracle, testgen
from simdjac.core.models import SpectrumSpec
from simdjac.core.testgen import LAMBDA_CAP


def test_assemble2():
    assert testgen.assemble2(3.0, 1.0, 0.0, 1.0, 0.0) == (3.0, 1.0, 0.0, 0.0)
    assert testgen.assemble2(3.0, 1.0, 1.0, 1.0, 0.0) == (2.0, 2.0, 1.0, 0.0)
    assert testgen.assemble2(3.0, 1.0, 1.0, 0.0, 1.0) == (2.0, 2.0, 0.0, 1.0)


def test_batch_generation_is_deterministic():
    a = testgen.gen2x2_batch(40, seed=123)
    b = testgen.gen2x2_batch(40, seed=123)
    c = testgen.gen2x2_batch(40, seed=124)
    for name in ("a11", "a22", "re_a21", "im_a21"):
        assert np.array_equal(getattr(a.batch, name), getattr(b.batch, name))
    assert not np.array_equal(a.batch.a11, c.batch.a11)


def test_eigenvalue_caps():
    gen = testgen.gen2x2_batch(200, seed=3)
    assert gen.lambdas.shape == (200, 2)
    assert np.all(np.abs(gen.lambdas).sum(axis=1) <= LAMBDA_CAP)
    assert np.all(np.isfinite(gen.batch.a11[:200]))


def test_real_and_complex_batches_share_diagonals():
    real = testgen.gen2x2_batch(32, seed=8, kind="real")
    herm = testgen.gen2x2_batch(32, seed=8, kind="complex")
    assert not real.batch.is_complex and herm.batch.is_complex
    assert np.array_equal(real.batch.a11, herm.batch.a11)
    assert np.array_equal(real.batch.a22, herm.batch.a22)
    assert np.array_equal(real.lambdas, herm.lambdas)
    assert np.all(herm.tan_phi >= 0)
    assert np.all(np.abs(real.tan_phi) < 1) and np.all(real.cos_alpha == 1.0)


def test_prescribed_eigenvalues_are_recovered():
    gen = testgen.gen2x2_batch(64, seed=17)
    b = gen.batch
    for i in range(64):
        scale = np.max(np.abs(gen.lambdas[i]))
        if scale < 2.0 ** -900:
            continue
        big, small = oracle.quad_evd2(b.a11[i], b.a22[i], b.re_a21[i], b.im_a21[i])
        expected = sorted(gen.lambdas[i], reverse=True)
        assert abs(float(big) - expected[0]) <= 1e-14 * scale
        assert abs(float(small) - expected[1]) <= 1e-14 * scale


def test_batch_size_must_be_positive():
    with pytest.raises(ValueError):
        testgen.gen2x2_batch(0, seed=1)


def test_pathological_batch():
    batch = testgen.pathological_batch()
    assert batch.r == 2 and batch.is_complex
    assert batch.im_a21[:2].tolist() == [5e-324, -5e-324]


def test_random_unit_range():
    values = testgen.random_unit(testgen.make_rng(4), 500)
    assert all(-1 <= v < 1 for v in values)


def test_spectrum_orderings():
    spec = SpectrumSpec(xi=-3.0, n=4)
    assert [float(v) for v in testgen.spectrum(spec)] == [0.125, 0.25, 0.5, 1.0]
    down = SpectrumSpec(xi=-3.0, n=4, perm="descending")
    assert [float(v) for v in testgen.spectrum(down)] == [1.0, 0.5, 0.25, 0.125]
    shuffled = testgen.spectrum(SpectrumSpec(xi=-3.0, n=4, perm="random"), testgen.make_rng(1))
    assert sorted(float(v) for v in shuffled) == [0.125, 0.25, 0.5, 1.0]


def test_spectrum_rejects_positive_xi():
    with pytest.raises(ValueError):
        SpectrumSpec(xi=1.0, n=4)


@pytest.mark.parametrize("kind", ["real", "complex"])
def test_generated_matrix_has_the_prescribed_singular_values(kind):
    gen = testgen.gen_svd_matrix(SpectrumSpec(xi=-3.0, n=8, perm="random"), seed=6, kind=kind, m=10)
    assert gen.G.m == 10 and gen.G.n == 8
    assert gen.G.is_complex == (kind == "complex")
    assert gen.sigma_sorted == sorted(gen.sigma, reverse=True)
    exact = oracle.quad_singular_values(gen.G.to_dense())
    for got, ref in zip(exact, gen.sigma_sorted):
        assert oracle.rel_diff(got, ref) < 1e-13


def test_matrix_generation_is_deterministic():
    spec = SpectrumSpec(xi=-2.0, n=4)
    a = testgen.gen_svd_matrix(spec, seed=9)
    b = testgen.gen_svd_matrix(spec, seed=9)
    assert np.array_equal(a.G.re, b.G.re)
    with pytest.raises(ValueError):
        testgen.gen_svd_matrix(spec, seed=9, m=3)


def test_norm_vectors():
    vectors = testgen.gen_norm_vectors(3, 10, -5.0, seed=2)
    assert len(vectors) == 3
    for v in vectors:
        assert v.shape == (10,)
        assert np.all((v >= 0) & (v <= 2.0 ** -5))
