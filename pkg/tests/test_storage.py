import math

import numpy as np
import pytest

from simdjac.core import storage, testgen
from simdjac.core.batched_evd import evd2_batch
from simdjac.core.errors import FormatError
from simdjac.core.models import RunManifest
from simdjac.core.splitform import split_columns


def test_perm_dtype():
    assert storage.perm_dtype(8) == np.dtype("<u1")
    assert storage.perm_dtype(16) == np.dtype("<u2")
    assert storage.perm_dtype(64) == np.dtype("<u8")
    with pytest.raises(FormatError):
        storage.perm_dtype(128)


@pytest.mark.parametrize("complex_input", [False, True])
def test_matrix_file(tmp_path, complex_input):
    rng = np.random.default_rng(1)
    a = rng.standard_normal((5, 3))
    if complex_input:
        a = a + 1j * rng.standard_normal((5, 3))
    path = tmp_path / "g.sjmx"
    storage.write_matrix(path, split_columns(a))
    back = storage.read_matrix(path)
    assert back.m == 5 and back.n == 3 and back.m_tilde == 8
    assert back.is_complex == complex_input
    assert np.array_equal(back.to_dense(), a)


def test_batch_file(tmp_path):
    batch = testgen.gen2x2_batch(11, seed=3).batch
    path = tmp_path / "b.sjb2"
    storage.write_batch(path, batch)
    back = storage.read_batch(path)
    assert back.r == 11 and back.is_complex
    assert np.array_equal(back.a11, batch.a11) and np.array_equal(back.im_a21, batch.im_a21)


@pytest.mark.parametrize("with_sine", [False, True])
def test_evd_file(tmp_path, with_sine):
    batch = testgen.gen2x2_batch(20, seed=4, kind="real").batch
    out = evd2_batch(batch, with_sine=with_sine)
    path = tmp_path / "e.sje2"
    storage.write_evd(path, out)
    back = storage.read_evd(path)
    assert back.r == 20 and not back.is_complex and back.backscaled
    assert (back.cosalpha_sinphi is not None) == with_sine
    for name, values in out.fields().items():
        assert np.array_equal(values, back.fields()[name]), name
    assert np.array_equal(back.perm, out.perm)


def test_bad_magic_and_version(tmp_path):
    path = tmp_path / "g.sjmx"
    storage.write_matrix(path, split_columns(np.eye(2)))
    with pytest.raises(FormatError, match="magic"):
        storage.read_batch(path)
    data = bytearray(path.read_bytes())
    data[4] = 99
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError, match="version"):
        storage.read_matrix(path)


def test_truncated_files(tmp_path):
    path = tmp_path / "g.sjmx"
    storage.write_matrix(path, split_columns(np.eye(4)))
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(FormatError, match="truncated"):
        storage.read_matrix(path)
    path.write_bytes(data[:10])
    with pytest.raises(FormatError, match="truncated"):
        storage.read_matrix(path)


def test_sidecar(tmp_path):
    path = tmp_path / "b.sjb2"
    manifest = RunManifest(subcommand="gen2x2", seed=7)
    target = storage.write_sidecar(path, manifest, kind="evd2", values=storage.hex_list([0.1, -2.5]))
    assert target.name == "b.sjb2.ref.json"
    doc = storage.read_sidecar(path)
    assert doc["manifest"]["seed"] == 7
    assert storage.from_hex(doc["values"]) == [0.1, -2.5]
    assert storage.optional_sidecar(tmp_path / "missing.sjb2") is None


def test_bad_sidecars(tmp_path):
    path = tmp_path / "x.sjmx"
    storage.sidecar_path(path).write_text("{not json")
    with pytest.raises(FormatError):
        storage.read_sidecar(path)
    storage.sidecar_path(path).write_text('{"format_version": 999}')
    with pytest.raises(FormatError):
        storage.read_sidecar(path)
    with pytest.raises(FormatError):
        storage.from_hex(["zz"])


def test_ef_pairs():
    assert storage.ef_pairs([3.0, -math.inf], [1.5, 1.0]) == [[3, (1.5).hex()], [None, (1.0).hex()]]


def test_csv_report(tmp_path):
    path = tmp_path / "r.csv"
    manifest = RunManifest(subcommand="norm", seed=1, params={"xi": "-3"})
    count = storage.write_csv(path, manifest, ["a", "b"], [[1, 2.5], [3, 4.5]])
    assert count == 2
    assert path.read_text().startswith("# manifest: {")
    back, rows = storage.read_csv(path)
    assert back == manifest
    assert rows == [{"a": "1", "b": "2.5"}, {"a": "3", "b": "4.5"}]


def test_csv_without_manifest(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(FormatError):
        storage.read_csv(path)
