"""
Command-line harness.

    python -m simdjac.core gen2x2 --r 1024 --seed 7 --out batch.sjb2
    python -m simdjac.core gensvd --xi -23 --n 128 --perm random --seed 3 --out g.sjmx
    python -m simdjac.core evd batch.sjb2 --csv evd.csv
    python -m simdjac.core svd g.sjmx --out-prefix run --report sweeps.csv --measures measures.csv
    python -m simdjac.core norm --count 65 --m 1048576 --xi 1008 --csv norms.csv

Left-out --out/--csv paths go under Settings.data_dir.

Exit codes: 0 success, 1 numerical failure (including non-convergence),
2 usage, format or I/O errors.
"""

import argparse
import sys
import time
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__, oracle, storage, testgen
from .batched_evd import HermBatch2, evd2_batch
from .config import get_settings
from .efnorm import frob_norm_dot, frob_norm_ef
from .errors import FormatError, NumericalFailure, SimdJacError
from .lanes import get_backend, list_backends
from .logging_conf import get_logger
from .models import EVDComparison, NormRecord, RunManifest, SpectrumSpec, SVDConfig
from .strategies import list_strategies
from .svd_driver import PHASES, svd_run

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2

EVD_COLUMNS = ["batch_id", "count", "rho_kernel", "rho_ref", "delta_kernel", "delta_ref",
               "lambda_f_kernel", "lambda_f_ref", "lambda_max_kernel", "lambda_max_ref",
               "rho_ratio", "lambda_f_ratio", "seconds_kernel", "seconds_ref"]
SWEEP_COLUMNS = (["sweep", "transformations", "rescalings", "scale_exponent"]
                 + [f"seconds_{p}" for p in PHASES] + [f"share_{p}" for p in PHASES])
NORM_COLUMNS = ["vector", "xi", "m", "rel_err_ef", "rel_err_dot", "dot_overflow", "seconds_ef", "seconds_dot"]


def _manifest(args: argparse.Namespace, **extra) -> RunManifest:
    fields = dict(subcommand=args.command, seed=getattr(args, "seed", None),
                  workers=getattr(args, "workers", 1), lanes=getattr(args, "lanes", get_settings().lanes),
                  backend=getattr(args, "backend", None) or get_settings().lane_backend)
    fields.update(extra)
    return RunManifest(**fields)


def _output_path(given: Optional[str], default_name: str) -> Path:
    if given:
        return Path(given)
    path = Path(get_settings().data_dir) / default_name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _lambdas_from_sidecar(doc: Optional[dict], r: int) -> Optional[np.ndarray]:
    if not doc or "lambdas" not in doc:
        return None
    values = np.array([storage.from_hex(pair) for pair in doc["lambdas"]])
    if values.shape != (r, 2):
        raise FormatError(f"sidecar holds {values.shape} eigenvalues for {r} matrices")
    return values


# -- subcommands ----------------------------------------------------------------------------


def cmd_gen2x2(args: argparse.Namespace) -> int:
    out = _output_path(args.out, "pathological.sjb2" if args.pathological else f"batch-{args.seed}.sjb2")
    if args.pathological:
        batch = testgen.pathological_batch(args.lanes)
        lambdas = [[float(v) for v in oracle.quad_evd2(batch.a11[i], batch.a22[i], batch.re_a21[i],
                                                       batch.im_a21[i])] for i in range(batch.r)]
    else:
        gen = testgen.gen2x2_batch(args.r, args.seed, args.kind, args.lanes)
        batch, lambdas = gen.batch, gen.lambdas.tolist()
    storage.write_batch(out, batch)
    manifest = _manifest(args, outputs=[str(out)],
                         params={"r": str(batch.r), "kind": "complex" if batch.is_complex else "real",
                                 "pathological": str(args.pathological)})
    storage.write_sidecar(out, manifest, kind="evd2", lambdas=[storage.hex_list(p) for p in lambdas])
    logger.info(f"[CLI] {batch.r} matrices written to {out}")
    return EXIT_OK


def cmd_gensvd(args: argparse.Namespace) -> int:
    spec = SpectrumSpec(xi=args.xi, n=args.n, perm=args.perm)
    gen = testgen.gen_svd_matrix(spec, args.seed, args.kind, args.m, args.lanes)
    out = _output_path(args.out, f"svd-{args.kind}-n{args.n}-seed{args.seed}.sjmx")
    storage.write_matrix(out, gen.G)
    manifest = _manifest(args, outputs=[str(out)],
                         params={"xi": str(args.xi), "n": str(args.n), "m": str(gen.G.m),
                                 "perm": args.perm, "kind": args.kind})
    storage.write_sidecar(out, manifest, kind="svd", sigma=storage.hex_list(gen.sigma),
                          sigma_sorted=storage.hex_list(gen.sigma_sorted))
    logger.info(f"[CLI] {gen.G.m}x{gen.G.n} matrix written to {out}")
    return EXIT_OK


def _sub_batch(batch: HermBatch2, start: int, stop: int) -> HermBatch2:
    im = None if batch.im_a21 is None else batch.im_a21[start:stop]
    return HermBatch2(batch.a11[start:stop], batch.a22[start:stop], batch.re_a21[start:stop], im,
                      stop - start, batch.s)


def cmd_evd(args: argparse.Namespace) -> int:
    batch = storage.read_batch(args.input)
    lambdas = _lambdas_from_sidecar(storage.optional_sidecar(args.input), batch.r)
    backend = get_backend(args.backend)
    dtype = np.float32 if args.ref_precision == "single" else np.float64
    size = args.batch_size or batch.r
    csv_path = _output_path(args.csv, f"{Path(args.input).stem}.evd.csv")
    rows = []
    for batch_id, start in enumerate(range(0, batch.r, size)):
        stop = min(start + size, batch.r)
        sub = _sub_batch(batch, start, stop)
        started = time.perf_counter()
        kernel = evd2_batch(sub, workers=args.workers, with_sine=True, backend=backend)
        t_kernel = time.perf_counter() - started
        started = time.perf_counter()
        ref = oracle.ref_evd2_batch(sub, dtype)
        t_ref = time.perf_counter() - started
        cmp: EVDComparison = oracle.ref_evd2_batch_compare(
            sub, kernel, ref, None if lambdas is None else lambdas[start:stop], batch_id)
        cmp = cmp.model_copy(update={"seconds_kernel": t_kernel, "seconds_ref": t_ref})
        rows.append([getattr(cmp, c) for c in EVD_COLUMNS])
    outputs = [str(csv_path)]
    if args.evd_out:
        # lanes are independent, so one pass over the whole batch matches the per-row kernels
        if len(rows) > 1:
            kernel = evd2_batch(batch, workers=args.workers, with_sine=True, backend=backend)
        storage.write_evd(args.evd_out, kernel)
        outputs.append(str(args.evd_out))
    manifest = _manifest(args, inputs=[str(args.input)], outputs=outputs,
                         params={"batch_size": str(size), "ref_precision": args.ref_precision})
    storage.write_csv(csv_path, manifest, EVD_COLUMNS, rows)
    logger.info(f"[CLI] {len(rows)} batch rows written to {csv_path}")
    return EXIT_OK


def _sweep_rows(result) -> List[list]:
    rows = []
    for rec in result.records:
        seconds = [rec.phase_seconds.get(p, 0.0) for p in PHASES]
        total = sum(seconds)
        shares = [x / total if total else 0.0 for x in seconds]
        rows.append([rec.sweep, rec.transformations, rec.rescalings, rec.scale_exponent] + seconds + shares)
    return rows


def cmd_svd(args: argparse.Namespace) -> int:
    G = storage.read_matrix(args.input)
    config = SVDConfig(
        max_sweeps=args.sweeps or get_settings().max_sweeps,
        strategy=args.strategy or get_settings().strategy,
        workers=args.workers,
        lanes=G.s,
        gram_schmidt=not args.no_gram_schmidt,
    )
    result = svd_run(G, config, backend=get_backend(args.backend))
    manifest = _manifest(args, inputs=[str(args.input)], strategy=config.strategy, sweeps=config.max_sweeps,
                         lanes=G.s, params={"converged": str(result.converged), "sweeps_used": str(result.sweeps)})
    prefix = args.out_prefix
    if prefix:
        storage.write_matrix(f"{prefix}.U.sjmx", result.U)
        storage.write_matrix(f"{prefix}.V.sjmx", result.V)
        values = result.sigma_values()
        storage.write_csv(f"{prefix}.sigma.csv", manifest, ["index", "e", "f", "value"],
                          ([j, "-inf" if e == -np.inf else int(e), float(f).hex(), repr(float(v))]
                           for j, (e, f, v) in enumerate(zip(result.sigma_e, result.sigma_f, values))))
    if args.report:
        storage.write_csv(args.report, manifest, SWEEP_COLUMNS, _sweep_rows(result))
    if args.measures:
        doc = storage.optional_sidecar(args.input)
        if not doc or "sigma" not in doc:
            raise FormatError(f"{args.input}: no reference singular values for --measures")
        m = oracle.error_measures(G, result.U, result.V, result.sigma_e, result.sigma_f,
                                  storage.from_hex(doc["sigma"]))
        storage.write_csv(args.measures, manifest, ["sweeps", "converged", "r_G", "r_U", "r_V", "r_Sigma"],
                          [[result.sweeps, result.converged, m.r_G, m.r_U, m.r_V, m.r_Sigma]])
    if not result.converged:
        logger.warning(f"[CLI] no convergence in {config.max_sweeps} sweeps")
        return EXIT_NUMERICAL
    logger.info(f"[CLI] converged in {result.sweeps} sweeps ({result.transformations} transformations)")
    return EXIT_OK


def _norm_record(k: int, x: np.ndarray, xi: float, reduction: str) -> NormRecord:
    ref = oracle.quad_norm(x)
    started = time.perf_counter()
    ef = frob_norm_ef(x, reduction=reduction)
    t_ef = time.perf_counter() - started
    started = time.perf_counter()
    with np.errstate(over="ignore"):
        dot = frob_norm_dot(x)
    t_dot = time.perf_counter() - started
    overflow = not np.isfinite(dot)
    return NormRecord(vector=k, xi=xi, m=x.size, rel_err_ef=ref.rel_err(ef),
                      rel_err_dot=None if overflow else ref.rel_err(dot), dot_overflow=overflow,
                      seconds_ef=t_ef, seconds_dot=t_dot)


def cmd_norm(args: argparse.Namespace) -> int:
    csv_path = _output_path(args.csv, f"norm-xi{args.xi:g}-seed{args.seed}.csv")
    vectors = testgen.gen_norm_vectors(args.count, args.m, args.xi, args.seed)
    if args.include_zero:
        vectors.append(np.zeros(args.m))
    rows = []
    for k, x in enumerate(vectors):
        rec = _norm_record(k, x, args.xi, args.reduction)
        rows.append(["" if getattr(rec, c) is None else getattr(rec, c) for c in NORM_COLUMNS])
    overflows = sum(1 for r in rows if r[NORM_COLUMNS.index("dot_overflow")])
    manifest = _manifest(args, outputs=[str(csv_path)],
                         params={"count": str(args.count), "m": str(args.m), "xi": str(args.xi),
                                 "reduction": args.reduction, "include_zero": str(args.include_zero)})
    storage.write_csv(csv_path, manifest, NORM_COLUMNS, rows)
    logger.info(f"[CLI] {len(rows)} norm rows written to {csv_path} ({overflows} baseline overflows)")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(prog="simdjac", description="Batched Jacobi SVD and 2x2 EVD experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False, workers=False):
        p.add_argument("--lanes", type=int, default=settings.lanes, help="lanes per vector (s)")
        p.add_argument("--backend", choices=list_backends(), default=None)
        if seed:
            p.add_argument("--seed", type=int, required=True)
        if workers:
            p.add_argument("--workers", type=int, default=settings.workers)

    p = sub.add_parser("gen2x2", help="random 2x2 batch with prescribed eigenvalues")
    common(p, seed=False)
    p.add_argument("--r", type=int, default=1024, help="number of matrices")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kind", choices=["real", "complex"], default="complex")
    p.add_argument("--pathological", action="store_true", help="write the two subnormal-a21 witness matrices")
    p.add_argument("--out", default=None, help="output file (default: under data_dir)")
    p.set_defaults(func=cmd_gen2x2)

    p = sub.add_parser("gensvd", help="test matrix with a prescribed singular value distribution")
    common(p, seed=True)
    p.add_argument("--xi", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--perm", choices=["ascending", "descending", "random"], default="ascending")
    p.add_argument("--kind", choices=["real", "complex"], default="real")
    p.add_argument("--out", default=None, help="output file (default: under data_dir)")
    p.set_defaults(func=cmd_gensvd)

    p = sub.add_parser("evd", help="batched 2x2 EVD vs. the xLAEV2 reference")
    common(p, workers=True)
    p.add_argument("input")
    p.add_argument("--csv", default=None, help="CSV report (default: under data_dir)")
    p.add_argument("--batch-size", type=int, default=0, help="matrices per CSV row (0: all)")
    p.add_argument("--ref-precision", choices=["double", "single"], default="double")
    p.add_argument("--evd-out", default=None, help="also write the kernel output for the whole batch")
    p.set_defaults(func=cmd_evd)

    p = sub.add_parser("svd", help="one-sided Jacobi SVD of a matrix file")
    common(p, workers=True)
    p.add_argument("input")
    p.add_argument("--strategy", choices=list_strategies(), default=None)
    p.add_argument("--sweeps", type=int, default=None)
    p.add_argument("--no-gram-schmidt", action="store_true")
    p.add_argument("--out-prefix", default=None)
    p.add_argument("--report", default=None, help="per-sweep CSV")
    p.add_argument("--measures", default=None, help="error measures CSV (needs the reference sidecar)")
    p.set_defaults(func=cmd_svd)

    p = sub.add_parser("norm", help="(e, f) norms vs. the quad oracle")
    common(p)
    p.add_argument("--count", type=int, default=65)
    p.add_argument("--m", type=int, default=1 << 20)
    p.add_argument("--xi", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reduction", choices=["sequential", "pairwise"], default=settings.norm_reduction)
    p.add_argument("--include-zero", action="store_true")
    p.add_argument("--csv", default=None, help="CSV report (default: under data_dir)")
    p.set_defaults(func=cmd_norm)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalFailure as e:
        logger.error(f"[CLI] {args.command}: numerical failure: {e}")
        return EXIT_NUMERICAL
    except (SimdJacError, OSError, ValueError) as e:
        logger.error(f"[CLI] {args.command}: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
