"""
Norm accuracy protocol: (e, f) Frobenius norms of long random vectors
against the quad oracle at xi = 0 and xi = 1008, next to the naive
dot-product norm, plus a check of the bitonic lane sort on random (e, f)
vectors.

Each 2**20-element vector takes a few seconds (the quad reference
dominates); the sort check over 10**6 vectors takes well under a minute.

Usage: python scripts/norm_protocol.py [count] [m] [sort_vectors] [seed]
"""

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import numpy as np

from simdjac.core import oracle, testgen
from simdjac.core.constants import DEFAULT_LANES
from simdjac.core.efnorm import EFVec, bitonic_sort_ef, frob_norm_dot, frob_norm_ef

XIS = (0.0, 1008.0)
REL_ERR_LIMIT = 1e-12


def check_norms(count: int, m: int, xi: float, seed: int) -> dict:
    worst_ef, worst_dot, overflows = 0.0, 0.0, 0
    ef_overflows = 0
    for x in testgen.gen_norm_vectors(count, m, xi, seed):
        ref = oracle.quad_norm(x)
        ef = frob_norm_ef(x)
        ef_overflows += not np.isfinite(ef.e)
        worst_ef = max(worst_ef, ref.rel_err(ef))
        with np.errstate(over="ignore"):
            dot = frob_norm_dot(x)
        if np.isfinite(dot):
            worst_dot = max(worst_dot, ref.rel_err(dot))
        else:
            overflows += 1
    return {"ef": worst_ef, "dot": worst_dot, "dot_overflows": overflows, "ef_overflows": ef_overflows}


def check_sort(vectors: int, seed: int, chunk: int = 1 << 17) -> int:
    """Number of vectors whose bitonic sort differs from a lexicographic sort."""
    rng = testgen.make_rng(seed)
    bad = 0
    for start in range(0, vectors, chunk):
        rows = min(chunk, vectors - start)
        e = rng.integers(-1100, 1100, (rows, DEFAULT_LANES)).astype(np.float64)
        e[rng.random((rows, DEFAULT_LANES)) < 0.05] = -np.inf
        f = rng.uniform(1.0, 2.0, (rows, DEFAULT_LANES))
        out = bitonic_sort_ef(EFVec(e, f))
        order = np.lexsort((f, e), axis=-1)
        same = ((np.take_along_axis(e, order, axis=-1) == out.e)
                & (np.take_along_axis(f, order, axis=-1) == out.f))
        bad += int(np.count_nonzero(~same.all(axis=-1)))
    return bad


def main():
    count = int(sys.argv[1]) if len(sys.argv) > 1 else 16
    m = int(sys.argv[2]) if len(sys.argv) > 2 else 1 << 20
    sort_vectors = int(sys.argv[3]) if len(sys.argv) > 3 else 10 ** 6
    seed = int(sys.argv[4]) if len(sys.argv) > 4 else 1

    print("=" * 80)
    print(f"Norm protocol: {count} vectors of {m} elements per xi (seed {seed})")
    print("=" * 80)

    failures = 0
    for xi in XIS:
        worst = check_norms(count, m, xi, seed)
        ok = worst["ef"] <= REL_ERR_LIMIT and worst["ef_overflows"] == 0
        failures += not ok
        print(f"\n{'✓' if ok else '✗'} xi = {xi:g}")
        print(f"    (e, f) worst relative error {worst['ef']:.3e} (limit {REL_ERR_LIMIT:.0e}), "
              f"{worst['ef_overflows']} overflows")
        print(f"    dot    worst relative error {worst['dot']:.3e}, {worst['dot_overflows']} of {count} overflowed")

    bad = check_sort(sort_vectors, seed)
    failures += bad > 0
    print(f"\n{'✓' if bad == 0 else '✗'} bitonic sort: {bad} of {sort_vectors} vectors out of order")

    if failures:
        print(f"\n✗ {failures} checks failed")
        sys.exit(1)
    print("\n✓ All checks passed")


if __name__ == "__main__":
    main()
