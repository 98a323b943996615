"""Command-line interface: ``ipca {synth,dkl,ipca,fine,baselines,benchmark}``."""

import argparse
import csv
import io
import json
import logging
import os
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from .baselines import ica_projection, pca_projection
from .benchmark import format_table, run_benchmark
from .data import load_collection, save_collection, subsample_collection
from .density import density_grid, fit_kde, grid_to_csv, parse_bandwidth_rule
from .divergence import DissimilarityMatrix, dissimilarity_matrix, ids_digest
from .fine import classical_mds, fine
from .optimizer import OptimizerConfig, ProjectionMatrix, objective, optimize_restarts, per_pair, variable_selection_report
from .synth import make_mirror_collection, make_planted_collection

logger = logging.getLogger("ipca")

GRID_RESOLUTION = 64


class CacheMismatchError(ValueError):
    pass


class _Staging:
    """Collects output files in a temp dir and moves them into place only on success."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.tmp = Path(tempfile.mkdtemp(prefix=".staging-", dir=self.out_dir))
        self.files = []

    def write(self, rel, text):
        path = self.tmp / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        self.files.append(rel)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        try:
            if exc_type is None:
                for rel in self.files:
                    dest = self.out_dir / rel
                    dest.parent.mkdir(parents=True, exist_ok=True)
                    os.replace(self.tmp / rel, dest)
        finally:
            shutil.rmtree(self.tmp, ignore_errors=True)
        return False


def _bandwidth(text):
    try:
        return parse_bandwidth_rule(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _load(args):
    collection = load_collection(args.manifest)
    if args.subsample is not None:
        if args.subsample < 1:
            raise ValueError("--subsample must be >= 1")
        collection = subsample_collection(collection, args.subsample, args.seed)
    return collection


def _cache_meta(args):
    return {"bandwidth": args.bandwidth, "subsample": args.subsample,
            "subsample_seed": args.seed if args.subsample is not None else None}


def _full_dissimilarity(collection, args):
    cache = getattr(args, "dkl_cache", None)
    if cache is None or not Path(cache).exists():
        D = dissimilarity_matrix(collection, args.bandwidth)
        if cache is not None:
            from .data import atomic_write_text
            atomic_write_text(cache, D.to_json(**_cache_meta(args)))
        return D
    doc = json.loads(Path(cache).read_text(encoding="utf-8"))
    D = DissimilarityMatrix.from_json(json.dumps(doc))
    ids = collection.ids
    problems = []
    if len(D) != len(ids):
        problems.append(f"N differs (cache {len(D)}, collection {len(ids)})")
    missing = [i for i in ids if i not in D.ids]
    extra = [i for i in D.ids if i not in ids]
    if missing:
        problems.append(f"ids missing from cache: {missing}")
    if extra:
        problems.append(f"ids only in cache: {extra}")
    if not missing and not extra and list(D.ids) != list(ids):
        problems.append("ids in a different order")
    if doc.get("ids_sha256") not in (None, ids_digest(D.ids)):
        problems.append("cache ids digest does not match its ids")
    for key, value in _cache_meta(args).items():
        if key in doc and doc[key] != value:
            problems.append(f"{key} differs (cache {doc[key]!r}, requested {value!r})")
    if problems:
        raise CacheMismatchError(f"{cache}: dissimilarity cache does not match collection: " + "; ".join(problems))
    return D


def _points_csv(channels, points):
    return ",".join(channels) + "\n" + "".join(",".join(repr(float(v)) for v in col) + "\n" for col in points.T)


def cmd_synth(args):
    if args.kind == "mirror":
        collection = make_mirror_collection(args.n1, args.n2, args.points, args.df, args.seed)
    else:
        collection = make_planted_collection(args.n1, args.d, tuple(args.informative), args.separation,
                                             args.points, args.seed)
    manifest = save_collection(collection, args.out)
    print(manifest)


def cmd_dkl(args):
    collection = _load(args)
    D = dissimilarity_matrix(collection, args.bandwidth)
    with _Staging(args.out) as out:
        out.write("dissimilarity.csv", D.to_csv())
        out.write("dissimilarity.json", D.to_json(**_cache_meta(args)))


def _grids(projected, bandwidth):
    models = [fit_kde(ds.points, bandwidth) for ds in projected]
    pts = np.hstack([ds.points for ds in projected])
    pad = 3.0 * max(mdl.bandwidth for mdl in models)
    bounds = [(float(lo - pad), float(hi + pad)) for lo, hi in zip(pts.min(axis=1), pts.max(axis=1))]
    res = [GRID_RESOLUTION] * pts.shape[0]
    return {ds.id: grid_to_csv(*density_grid(mdl, bounds, res)) for ds, mdl in zip(projected, models)}


def cmd_ipca(args):
    collection = _load(args)
    if not 1 <= args.m <= collection.d:
        raise ValueError(f"--m must be in [1, {collection.d}], got {args.m}")
    D = _full_dissimilarity(collection, args)
    config = OptimizerConfig(m=args.m, mu=args.mu, max_iters=args.max_iters, tol=args.tol, seed=args.seed,
                             grad_mode=args.grad, bandwidth=args.bandwidth)
    A, trace = optimize_restarts(collection, config, D, args.restarts)
    report = variable_selection_report(A, collection.channels)
    projected = collection.project(A.values)
    N = len(collection)
    with _Staging(args.out) as out:
        out.write("projection.json", A.to_json(channels=list(collection.channels)))
        out.write("trace.json", trace.to_json())
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "channel", "score"] + [f"loading_{k + 1}" for k in range(A.m)])
        for rank, row in enumerate(report, start=1):
            w.writerow([rank, row.channel, repr(row.score)] + [repr(x) for x in row.loadings])
        out.write("variables.csv", buf.getvalue())
        out.write("dissimilarity.csv", D.to_csv())
        for ds in projected:
            out.write(f"projected/{ds.id}.csv", _points_csv(ds.channels, ds.points))
        if A.m <= 2:
            for ds_id, text in _grids(projected, args.bandwidth).items():
                out.write(f"grids/{ds_id}.csv", text)
    print(f"J={trace.final_J:.6g} per_pair={per_pair(trace.final_J, N):.6g} "
          f"iterations={trace.iterations} converged={trace.converged} ({trace.reason})")
    for row in report:
        print(f"{row.channel}\t{row.score:.4f}")


def cmd_fine(args, parser):
    collection = _load(args)
    if not 1 <= args.e <= len(collection) - 1:
        parser.error(f"--e must be in [1, N-1] = [1, {len(collection) - 1}], got {args.e}")
    if args.projection is not None:
        A = ProjectionMatrix.from_json(Path(args.projection).read_text(encoding="utf-8"))
        collection = collection.project(A.values)
    result = fine(collection, args.e, args.bandwidth)
    with _Staging(args.out) as out:
        out.write("embedding.csv", result.to_csv())


def cmd_baselines(args):
    collection = _load(args)
    D = _full_dissimilarity(collection, args)
    N = len(collection)
    results = {}
    with _Staging(args.out) as out:
        for name, A in (("pca", pca_projection(collection, args.m)),
                        ("ica", ica_projection(collection, args.m, seed=args.seed))):
            J = objective(collection, A, D, args.bandwidth)
            results[name] = {"J": J, "J_per_pair": per_pair(J, N)}
            out.write(f"{name}.json", A.to_json(channels=list(collection.channels), J=J, J_per_pair=per_pair(J, N)))
        out.write("summary.json", json.dumps(results, indent=2) + "\n")
    for name, r in results.items():
        print(f"{name}\t{r['J_per_pair']:.6g}")


def cmd_benchmark(args):
    result = run_benchmark(args.folds, args.seed, m=args.m, df=args.df, bandwidth=args.bandwidth,
                           restarts=args.restarts, mu=args.mu, max_iters=args.max_iters, tol=args.tol,
                           grad_mode=args.grad)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fold", "seed", "IPCA", "ICA", "PCA"])
    for k, row in enumerate(result["rows"], start=1):
        w.writerow([k, row["seed"], repr(row["IPCA"]), repr(row["ICA"]), repr(row["PCA"])])
    for stat in ("mean", "std"):
        w.writerow([stat, ""] + [repr(result["summary"][m][stat]) for m in ("IPCA", "ICA", "PCA")])
    table = format_table(result)
    with _Staging(args.out) as out:
        out.write("benchmark.csv", buf.getvalue())
        out.write("benchmark.json", json.dumps(result, indent=2) + "\n")
        out.write("summary.txt", table)
    print(table, end="")


def build_parser():
    parser = argparse.ArgumentParser(prog="ipca", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, manifest=True):
        if manifest:
            p.add_argument("--manifest", required=True, type=Path)
            p.add_argument("--subsample", type=int, default=None)
        p.add_argument("--bandwidth", type=_bandwidth, default="silverman",
                       help="'silverman' or 'fixed:<h>'")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", type=Path, required=True)

    def optim(p, m_default=None):
        p.add_argument("--m", type=int, required=m_default is None, default=m_default)
        p.add_argument("--mu", type=float, default=1e-3)
        p.add_argument("--max-iters", type=int, default=500)
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--grad", choices=("analytic", "fd"), default="analytic")
        p.add_argument("--restarts", type=int, default=1)

    p = sub.add_parser("synth", help="write a synthetic collection as manifest + CSV")
    p.add_argument("kind", choices=("mirror", "planted"))
    p.add_argument("--n1", type=int, default=5)
    p.add_argument("--n2", type=int, default=5)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--df", type=int, default=4)
    p.add_argument("--d", type=int, default=6)
    p.add_argument("--informative", type=int, nargs=2, default=(3, 4))
    p.add_argument("--separation", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("dkl", help="pairwise symmetrized KL matrix of a collection")
    common(p)

    p = sub.add_parser("ipca", help="fit an information preserving projection")
    common(p)
    optim(p)
    p.add_argument("--dkl-cache", type=Path, default=None)

    p = sub.add_parser("fine", help="embed each dataset as a point")
    common(p)
    p.add_argument("--e", type=int, default=2)
    p.add_argument("--projection", type=Path, default=None, help="projection.json to apply first")

    p = sub.add_parser("baselines", help="pooled PCA and ICA projections")
    common(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--dkl-cache", type=Path, default=None)

    p = sub.add_parser("benchmark", help="repeated synthetic IPCA/ICA/PCA comparison")
    common(p, manifest=False)
    optim(p, m_default=1)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--df", type=int, default=4)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "fine":
            cmd_fine(args, parser)
        else:
            globals()[f"cmd_{args.command}"](args)
    except (ValueError, OSError, RuntimeError) as exc:
        message = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
