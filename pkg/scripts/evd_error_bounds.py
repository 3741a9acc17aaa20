"""
Sample the relative errors of the 2x2 kernel's tan(phi), cos(phi) and
|e^{i alpha}| against the quad oracle and compare them with the bounds.

Usage: python scripts/evd_error_bounds.py [count] [seed]
"""

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import numpy as np

from simdjac.core import oracle, testgen
from simdjac.core.batched_evd import jacobi_angles, polar2, scale_exponent
from simdjac.core.constants import EPS
from simdjac.core.lanes import get_backend
from simdjac.core.models import ERROR_BOUNDS


def sample(kind: str, count: int, seed: int) -> dict:
    L = get_backend()
    gen = testgen.gen2x2_batch(count, seed, kind)
    b = gen.batch
    a11, a22, re = b.a11[:count], b.a22[:count], b.re_a21[:count]
    im = b.im_a21[:count] if b.is_complex else None
    zeta = scale_exponent(a11, a22, re, im)
    sre = L.scalef(re, zeta)
    if im is None:
        cos_a, sin_a, modulus = np.ones(count), np.zeros(count), L.abs(sre)
    else:
        cos_a, sin_a, modulus = polar2(sre, L.scalef(im, zeta))
    tan, _, _, cos = jacobi_angles(L.scalef(a11, zeta), L.scalef(a22, zeta), L.scalef(modulus, 1.0))

    worst = {"tan_phi": 0.0, "cos_phi": 0.0, "alpha": 0.0}
    for i in range(count):
        exact = oracle.quad_jacobi_params(a11[i], a22[i], re[i], None if im is None else im[i])
        worst["tan_phi"] = max(worst["tan_phi"], oracle.rel_diff(abs(tan[i]), abs(exact["tan_phi"])))
        worst["cos_phi"] = max(worst["cos_phi"], oracle.rel_diff(cos[i], exact["cos_phi"]))
        mod = oracle.QUAD.sqrt(oracle.QUAD.mpf(cos_a[i]) ** 2 + oracle.QUAD.mpf(sin_a[i]) ** 2)
        worst["alpha"] = max(worst["alpha"], float(abs(mod - 1)))
    return worst


def main():
    count = int(sys.argv[1]) if len(sys.argv) > 1 else 10000
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 1

    print("=" * 80)
    print(f"2x2 kernel relative errors, {count} matrices per kind (seed {seed}), in units of eps")
    print("=" * 80)

    for kind in ("real", "complex"):
        worst = sample(kind, count, seed)
        is_complex = kind == "complex"
        bounds = {"tan_phi": ERROR_BOUNDS.tan_phi(is_complex), "cos_phi": ERROR_BOUNDS.cos_phi(is_complex),
                  "alpha": ERROR_BOUNDS.alpha * EPS}
        print(f"\n{kind}:")
        for name, value in worst.items():
            if name == "alpha" and not is_complex:
                continue
            mark = "✓" if value <= bounds[name] else "✗"
            print(f"  {mark} {name:8s} {value / EPS:10.6f} (bound {bounds[name] / EPS:.6f})")


if __name__ == "__main__":
    main()
