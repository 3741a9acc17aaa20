"""
On-disk formats.

Binary files are little-endian with a fixed header:
- matrix (SJMX): magic, version, flags, m, n, s, m_tilde, then the re plane
  (n rows of m_tilde doubles) and the im plane for complex matrices
- 2x2 batch (SJB2): magic, version, flags, r, s, r_tilde, then the a11, a22,
  re a21 and im a21 planes
- EVD output (SJE2): the batch header, the stored planes in a fixed order,
  then one perm word per chunk in the narrowest unsigned type holding s bits

Reference values go to a JSON sidecar `<file>.ref.json` (floats as
float.hex strings), and CSV reports start with a `# manifest: {json}` line.
"""

import csv
import json
import math
import struct
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .batched_evd import EVDOut2, HermBatch2
from .constants import BATCH_MAGIC, EVD_MAGIC, FORMAT_VERSION, MATRIX_MAGIC
from .errors import FormatError
from .logging_conf import get_logger
from .models import RunManifest
from .splitform import SplitMatrix

logger = get_logger(__name__)

PathLike = Union[str, Path]

MATRIX_HEADER = struct.Struct("<4sHHQQII")
BATCH_HEADER = struct.Struct("<4sHHQII")

FLAG_COMPLEX = 1
FLAG_WITH_SINE = 2
FLAG_BACKSCALED = 4

EVD_PLANES = ("cos_phi", "cosalpha_tanphi", "sinalpha_tanphi", "lambda1", "lambda2",
              "neg_zeta", "cosalpha_sinphi", "sinalpha_sinphi")

_F64 = np.dtype("<f8")


def perm_dtype(s: int) -> np.dtype:
    for bits, dt in ((8, "<u1"), (16, "<u2"), (32, "<u4"), (64, "<u8")):
        if s <= bits:
            return np.dtype(dt)
    raise FormatError(f"{s} lanes do not fit a perm word")


def _header(data: bytes, fmt: struct.Struct, magic: bytes, path: PathLike) -> tuple:
    if len(data) < fmt.size:
        raise FormatError(f"{path}: truncated header")
    fields = fmt.unpack_from(data)
    if fields[0] != magic:
        raise FormatError(f"{path}: bad magic {fields[0]!r}, expected {magic!r}")
    if fields[1] != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format version {fields[1]}")
    return fields


def _planes(data: bytes, offset: int, count: int, shape: Tuple[int, ...], path: PathLike) -> List[np.ndarray]:
    size = int(np.prod(shape)) * _F64.itemsize
    if len(data) < offset + count * size:
        raise FormatError(f"{path}: truncated payload ({len(data)} bytes, need {offset + count * size})")
    return [np.frombuffer(data, dtype=_F64, count=int(np.prod(shape)), offset=offset + k * size)
            .reshape(shape).astype(np.float64) for k in range(count)]


# -- matrices ------------------------------------------------------------------------------


def write_matrix(path: PathLike, G: SplitMatrix) -> None:
    flags = FLAG_COMPLEX if G.is_complex else 0
    with open(path, "wb") as fh:
        fh.write(MATRIX_HEADER.pack(MATRIX_MAGIC, FORMAT_VERSION, flags, G.m, G.n, G.s, G.m_tilde))
        for p in G.planes():
            fh.write(np.ascontiguousarray(p, dtype=_F64).tobytes())
    logger.debug(f"[STORAGE] wrote {G!r} to {path}")


def read_matrix(path: PathLike) -> SplitMatrix:
    data = Path(path).read_bytes()
    _, _, flags, m, n, s, mt = _header(data, MATRIX_HEADER, MATRIX_MAGIC, path)
    count = 2 if flags & FLAG_COMPLEX else 1
    planes = _planes(data, MATRIX_HEADER.size, count, (n, mt), path)
    return SplitMatrix(planes[0], planes[1] if count == 2 else None, m, s)


# -- 2x2 batches ----------------------------------------------------------------------------


def write_batch(path: PathLike, batch: HermBatch2) -> None:
    flags = FLAG_COMPLEX if batch.is_complex else 0
    with open(path, "wb") as fh:
        fh.write(BATCH_HEADER.pack(BATCH_MAGIC, FORMAT_VERSION, flags, batch.r, batch.s, batch.r_tilde))
        for p in batch.planes():
            fh.write(np.ascontiguousarray(p, dtype=_F64).tobytes())
    logger.debug(f"[STORAGE] wrote {batch.r} matrices to {path}")


def read_batch(path: PathLike) -> HermBatch2:
    data = Path(path).read_bytes()
    _, _, flags, r, s, rt = _header(data, BATCH_HEADER, BATCH_MAGIC, path)
    count = 4 if flags & FLAG_COMPLEX else 3
    planes = _planes(data, BATCH_HEADER.size, count, (rt,), path)
    return HermBatch2(planes[0], planes[1], planes[2], planes[3] if count == 4 else None, r, s)


def write_evd(path: PathLike, out: EVDOut2) -> None:
    flags = ((FLAG_COMPLEX if out.is_complex else 0)
             | (FLAG_WITH_SINE if out.cosalpha_sinphi is not None else 0)
             | (FLAG_BACKSCALED if out.backscaled else 0))
    with open(path, "wb") as fh:
        fh.write(BATCH_HEADER.pack(EVD_MAGIC, FORMAT_VERSION, flags, out.r, out.s, out.cos_phi.shape[0]))
        for name in EVD_PLANES:
            plane = getattr(out, name)
            if plane is not None:
                fh.write(np.ascontiguousarray(plane, dtype=_F64).tobytes())
        fh.write(out.perm.astype(perm_dtype(out.s)).tobytes())


def read_evd(path: PathLike) -> EVDOut2:
    data = Path(path).read_bytes()
    _, _, flags, r, s, rt = _header(data, BATCH_HEADER, EVD_MAGIC, path)
    out = EVDOut2(r, s, bool(flags & FLAG_COMPLEX), bool(flags & FLAG_WITH_SINE), bool(flags & FLAG_BACKSCALED))
    names = [k for k in EVD_PLANES if getattr(out, k) is not None]
    offset = BATCH_HEADER.size
    for name, plane in zip(names, _planes(data, offset, len(names), (rt,), path)):
        setattr(out, name, plane)
    offset += len(names) * rt * _F64.itemsize
    dt = perm_dtype(s)
    words = rt // s
    if len(data) < offset + words * dt.itemsize:
        raise FormatError(f"{path}: truncated perm words")
    out.perm = np.frombuffer(data, dtype=dt, count=words, offset=offset).astype(np.uint64)
    return out


# -- sidecars and reports ---------------------------------------------------------------------


def sidecar_path(path: PathLike) -> Path:
    return Path(f"{path}.ref.json")


def hex_list(values: Iterable[float]) -> List[str]:
    return [float(v).hex() for v in values]


def from_hex(values: Sequence[str]) -> List[float]:
    try:
        return [float.fromhex(v) for v in values]
    except (TypeError, ValueError) as e:
        raise FormatError(f"bad hex float in sidecar: {e}") from e


def ef_pairs(e: Sequence[float], f: Sequence[float]) -> List[List[Any]]:
    """[e, f] lists; e = -inf (zero) is written as null."""
    return [[None if ei == -math.inf else int(ei), float(fi).hex()] for ei, fi in zip(e, f)]


def write_sidecar(path: PathLike, manifest: RunManifest, **values: Any) -> Path:
    target = sidecar_path(path)
    doc = {"format_version": FORMAT_VERSION, "manifest": manifest.model_dump(mode="json")}
    doc.update(values)
    target.write_text(json.dumps(doc, indent=2, sort_keys=True))
    return target


def read_sidecar(path: PathLike) -> Dict[str, Any]:
    target = sidecar_path(path)
    try:
        doc = json.loads(target.read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"{target}: {e}") from e
    if doc.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"{target}: unsupported format version {doc.get('format_version')}")
    return doc


def write_csv(path: PathLike, manifest: RunManifest, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    """Write a report; returns the number of data rows."""
    count = 0
    with open(path, "w", newline="") as fh:
        fh.write(f"# manifest: {manifest.model_dump_json()}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
            count += 1
    logger.debug(f"[STORAGE] {count} rows to {path}")
    return count


def read_csv(path: PathLike) -> Tuple[RunManifest, List[Dict[str, str]]]:
    with open(path, newline="") as fh:
        first = fh.readline()
        prefix = "# manifest: "
        if not first.startswith(prefix):
            raise FormatError(f"{path}: missing manifest line")
        manifest = RunManifest.model_validate_json(first[len(prefix):])
        return manifest, list(csv.DictReader(fh))


def optional_sidecar(path: PathLike) -> Optional[Dict[str, Any]]:
    return read_sidecar(path) if sidecar_path(path).exists() else None
