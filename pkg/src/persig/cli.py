"""Command-line interface: ``persig <subcommand> ...``.

Exit status is 0 on success, 2 on usage errors and 1 on data errors
(unreadable or malformed input). Errors go to standard error.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import sys
from pathlib import Path

import numpy as np

from . import bench
from .barcode import BarcodeError, dumps_barcode, load_barcode
from .datasets import orbit_dataset, shape_dataset
from .embeddings import EMBEDDINGS, embed, load_coefficients
from .kernel import PipelineParams, StaticKernel, gram, kernelized_feature_pipeline, median_heuristic
from .learn import centroid_classify, evaluate, knn_features
from .paths import add_lags, load_path, save_path, time_augment
from .rips import check_distance_matrix, load_points, rips_barcode, save_points
from .signature import TensorBudgetError, features_matrix, save_features, signature

LABELS_HEADER = "# persig labels v1"
GRAM_HEADER = "# persig gram v1"
META_HEADER = "# persig gram-metadata v1"


class DataError(Exception):
    """Input data could not be read or is invalid (exit status 1)."""


# ---------------------------------------------------------------------------
# helpers


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
        return
    buf = io.StringIO()
    yield buf
    try:
        Path(path).write_text(buf.getvalue())
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror or exc}") from None


def _load_barcode(path: str):
    try:
        return load_barcode(_read_text(path))
    except BarcodeError as exc:
        raise DataError(f"{path}: {exc}") from None


def _lags(text: str | None) -> tuple[float, ...]:
    if not text:
        return ()
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid lag list {text!r}") from None


def _read_manifest(path: str) -> list[tuple[str, int]]:
    base = Path(path).parent
    out = []
    for lineno, line in enumerate(_read_text(path).splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            name, label = line.rsplit(",", 1)
            out.append((str(base / name.strip()), int(label)))
        except ValueError:
            raise DataError(f"{path}:{lineno}: expected '<file>,<label>'") from None
    if not out:
        raise DataError(f"{path}: empty manifest")
    return out


def _write_manifest(path: Path, names, labels) -> None:
    lines = [LABELS_HEADER] + [f"{n},{int(l)}" for n, l in zip(names, labels)]
    path.write_text("\n".join(lines) + "\n")


def _add_embedding_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--embedding", choices=EMBEDDINGS, default="envelope")
    p.add_argument("--dim", type=int, default=0, help="homological dimension (landscape, envelope, naive)")
    p.add_argument("--K", type=int, default=None, help="number of landscapes (default: all nonzero)")
    p.add_argument("--N", type=int, default=None, help="restrict the envelope to the N longest intervals")
    p.add_argument("--n", type=int, default=None, help="number of Betti curves (betti)")
    p.add_argument("--coeffs", default=None, help="coefficient table CSV (gbetti)")
    p.add_argument("--refine", type=int, default=4, help="linearization refinement (ilandscape)")


def _embedding_kwargs(args) -> dict:
    coeffs = None
    if args.embedding == "gbetti":
        if args.coeffs is None:
            raise argparse.ArgumentTypeError("--embedding gbetti requires --coeffs")
        try:
            coeffs = load_coefficients(_read_text(args.coeffs))
        except ValueError as exc:
            raise DataError(f"{args.coeffs}: {exc}") from None
    elif args.coeffs is not None:
        raise argparse.ArgumentTypeError("--coeffs applies only to --embedding gbetti")
    return dict(dim=args.dim, K=args.K, N=args.N, coeffs=coeffs, refine=args.refine, n=args.n)


def _pipeline_params(args, barcodes, **extra) -> PipelineParams:
    kw = _embedding_kwargs(args)
    n = kw["n"]
    if args.embedding == "betti" and n is None:
        # one width for every barcode, so that all paths share a dimension
        n = max(b.max_dim for b in barcodes) + 1
    return PipelineParams(
        embedding=args.embedding,
        dim=args.dim,
        K=args.K,
        N=args.N,
        coeffs=None if kw["coeffs"] is None else tuple(map(tuple, kw["coeffs"])),
        n=n,
        refine=kw["refine"],
        M=args.M,
        tau=args.tau,
        lags=args.lags,
        **extra,
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "orbits":
        clouds, labels = orbit_dataset(args.per_class, args.points or 1000, args.seed, args.sequential)
    else:
        clouds, labels = shape_dataset(args.per_class, args.points or 500, args.noise, args.seed)
    names = []
    for i, c in enumerate(clouds):
        name = f"cloud_{i:04d}.csv"
        buf = io.StringIO()
        save_points(c, buf)
        (out / name).write_text(buf.getvalue())
        names.append(name)
    _write_manifest(out / "labels.csv", names, labels)


def cmd_rips(args) -> None:
    text = _read_text(args.input)
    try:
        data = load_points(text)
        if args.distance_matrix:
            d = check_distance_matrix(data)
            b = rips_barcode(distances=d, max_dim=args.max_dim, max_scale=args.max_scale)
        else:
            b = rips_barcode(data, max_dim=args.max_dim, max_scale=args.max_scale)
    except ValueError as exc:
        raise DataError(f"{args.input}: {exc}") from None
    with _output(args.output) as sink:
        sink.write(dumps_barcode(b))


def cmd_embed(args) -> None:
    b = _load_barcode(args.input)
    try:
        x = embed(b, args.embedding, **_embedding_kwargs(args))
    except ValueError as exc:
        raise DataError(str(exc)) from None
    with _output(args.output) as sink:
        save_path(x, sink)


def cmd_sig(args) -> None:
    rows = []
    for path in args.inputs:
        try:
            x = load_path(_read_text(path))
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from None
        if args.tau:
            x = time_augment(x)
        if args.lags:
            x = add_lags(x, args.lags)
        try:
            rows.append(signature(x, args.M))
        except TensorBudgetError as exc:
            raise DataError(str(exc)) from None
    dims = {s.n for s in rows}
    if len(dims) > 1:
        raise DataError(f"input paths have differing dimensions {sorted(dims)}")
    with _output(args.out) as sink:
        save_features(rows, sink)


def cmd_gram(args) -> None:
    if args.kappa == "linear" and args.sigma is not None:
        raise argparse.ArgumentTypeError("--sigma applies only to --kappa rbf")
    barcodes = [_load_barcode(p) for p in args.inputs]
    base = _pipeline_params(args, barcodes)
    try:
        paths = [kernelized_feature_pipeline(b, base) for b in barcodes]
        if args.kappa == "rbf":
            sigma = args.sigma if args.sigma is not None else median_heuristic(paths)
            kappa = StaticKernel("rbf", sigma)
        else:
            kappa = StaticKernel()
        params = PipelineParams(**{**base.__dict__, "kappa": kappa})
        g = gram(paths, args.M, kappa, metadata=params.describe())
    except ValueError as exc:
        raise DataError(str(exc)) from None
    with _output(args.out) as sink:
        sink.write(GRAM_HEADER + "\n")
        for row in g.matrix:
            sink.write(",".join(repr(float(v)) for v in row) + "\n")
    meta_path = args.meta or (None if args.out in (None, "-") else args.out + ".meta")
    if meta_path:
        Path(meta_path).write_text(META_HEADER + "\n" + g.metadata_text())
    else:
        sys.stderr.write(g.metadata_text())


def cmd_classify(args) -> None:
    entries = _read_manifest(args.manifest)
    barcodes = [_load_barcode(p) for p, _ in entries]
    labels = np.array([l for _, l in entries])
    if len(np.unique(labels)) < 2:
        raise DataError("classification needs at least two classes")
    params = _pipeline_params(args, barcodes)
    try:
        feats = features_matrix([signature(kernelized_feature_pipeline(b, params), args.M) for b in barcodes])
    except ValueError as exc:
        raise DataError(str(exc)) from None

    def run(tr, te, rng):
        if args.classifier == "centroid":
            pred = centroid_classify(feats[tr], labels[tr], feats[te])
        else:
            pred = knn_features(feats[tr], feats[te], labels[tr], k=args.k)
        return float(np.mean(pred == labels[te]))

    try:
        result = evaluate(labels, run, repetitions=args.repetitions, seed=args.seed)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    with _output(args.out) as sink:
        sink.write(f"accuracy {result.format()}\n")
        sink.write("repetition,accuracy\n")
        for i, a in enumerate(result.accuracies):
            sink.write(f"{i},{a!r}\n")


def _print_report(report, out) -> None:
    with _output(out) as sink:
        sink.write(report.table() + "\n")
    sys.stderr.write(f"elapsed {report.seconds:.1f} s\n")


def cmd_bench_orbits(args) -> None:
    report = bench.bench_orbits(
        per_class=args.per_class,
        n_points=args.points,
        seed=args.seed,
        repetitions=args.repetitions,
        max_scale=args.max_scale,
        pipelines=bench.orbit_pipelines(with_kernel=not args.no_kernel),
        grid=bench.DEFAULT_GRID if args.grid else None,
        sequential=args.sequential,
    )
    _print_report(report, args.out)


def cmd_bench_shapes(args) -> None:
    report = bench.bench_shapes(
        per_class=args.per_class,
        n_points=args.points,
        seed=args.seed,
        repetitions=args.repetitions,
        max_scale=args.max_scale,
        noise_sd=args.noise,
        grid=bench.DEFAULT_GRID if args.grid else None,
    )
    _print_report(report, args.out)


# ---------------------------------------------------------------------------
# parser


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="persig", description="Signature features for persistence barcodes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a benchmark dataset")
    p.add_argument("kind", choices=["orbits", "shapes"])
    p.add_argument("--per-class", type=_positive_int, default=10)
    p.add_argument("--points", type=_positive_int, default=None, help="points per cloud (orbits 1000, shapes 500)")
    p.add_argument("--noise", type=float, default=0.1, help="noise standard deviation (shapes)")
    p.add_argument("--sequential", action="store_true", help="orbits: update y with the new x")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("rips", help="Vietoris-Rips barcode of a point cloud")
    p.add_argument("input", help="point CSV (or distance matrix with --distance-matrix)")
    p.add_argument("output", nargs="?", default=None)
    p.add_argument("--max-dim", type=_nonneg_int, default=1)
    p.add_argument("--max-scale", type=_positive_float, required=True)
    p.add_argument("--distance-matrix", action="store_true", help="input is a precomputed distance matrix")
    p.set_defaults(func=cmd_rips)

    p = sub.add_parser("embed", help="embed a barcode as a path")
    p.add_argument("input")
    p.add_argument("output", nargs="?", default=None)
    _add_embedding_args(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("sig", help="truncated signatures of path CSVs")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--M", type=_nonneg_int, required=True)
    p.add_argument("--tau", type=int, choices=[0, 1], default=0)
    p.add_argument("--lags", type=_lags, default=())
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sig)

    p = sub.add_parser("gram", help="signature-kernel Gram matrix of barcodes")
    p.add_argument("inputs", nargs="+", help="barcode files")
    _add_embedding_args(p)
    p.add_argument("--M", type=_nonneg_int, required=True)
    p.add_argument("--kappa", choices=["linear", "rbf"], default="linear")
    p.add_argument("--sigma", type=_positive_float, default=None, help="rbf lengthscale (default: median heuristic)")
    p.add_argument("--tau", type=int, choices=[0, 1], default=0)
    p.add_argument("--lags", type=_lags, default=())
    p.add_argument("--out", default=None)
    p.add_argument("--meta", default=None, help="metadata sidecar (default: <out>.meta)")
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("classify", help="repeated 50/50 classification of labelled barcodes")
    p.add_argument("manifest", help="CSV of '<barcode file>,<label>' lines")
    _add_embedding_args(p)
    p.add_argument("--M", type=_nonneg_int, default=3)
    p.add_argument("--tau", type=int, choices=[0, 1], default=1)
    p.add_argument("--lags", type=_lags, default=())
    p.add_argument("--classifier", choices=["knn", "centroid"], default="knn")
    p.add_argument("--k", type=_positive_int, default=1)
    p.add_argument("--repetitions", type=_positive_int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("bench-orbits", help="desk-scale orbit benchmark")
    p.add_argument("--per-class", type=_positive_int, default=20)
    p.add_argument("--points", type=_positive_int, default=300)
    p.add_argument("--max-scale", type=_positive_float, default=bench.ORBIT_SCALE)
    p.add_argument("--repetitions", type=_positive_int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", action="store_true", help="choose M and tau by 5-fold cross-validation")
    p.add_argument("--no-kernel", action="store_true", help="skip the signature-kernel pipeline")
    p.add_argument("--sequential", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench_orbits)

    p = sub.add_parser("bench-shapes", help="desk-scale shapes benchmark")
    p.add_argument("--per-class", type=_positive_int, default=10)
    p.add_argument("--points", type=_positive_int, default=100)
    p.add_argument("--max-scale", type=_positive_float, default=bench.SHAPE_SCALE)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--repetitions", type=_positive_int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench_shapes)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"persig {args.command}: error: {exc}\n")
        return 2
    except DataError as exc:
        sys.stderr.write(f"persig {args.command}: {exc}\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
