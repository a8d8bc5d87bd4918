"""Command-line interface: fitting, profiling, cross-validation, benchmarks.

Exit codes are a stable contract: 0 success, 2 input error (missing or
malformed files, unknown names), 3 solver or benchmark failure, 4 invalid
grid specification.  All JSON output is canonical (sorted keys, floats at 17
significant digits), so identical invocations produce byte-identical files.
"""

import argparse
import sys

import numpy as np

from . import casestudies, datasets, evaluation
from .datasets import ParseError, load_csv
from .estimators import DivergedFixedPoint, InvalidK
from .evaluation import canonical_json, coefficient_path, cross_validate, monte_carlo_bench
from .linalg import NonSymmetric, SingularSystem

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_GRID = 4

BENCH_NAMES = ("xor", "sim1", "sim2", "sim3", "sim4", "prostate")


class GridSyntaxError(ValueError):
    pass


def parse_range_list(text):
    """Parse ``start:step:end[,start:step:end|value,...]`` into a value list.

    Ranges are inclusive of the end point (within half a step), with values
    rounded to 10 decimals so endpoints like 2.0 stay exact.  Bare numbers
    are taken verbatim, so ``k=1,1.3,1.5:0.25:2`` is valid.
    """
    values = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        parts = piece.split(":")
        try:
            if len(parts) == 1:
                values.append(float(parts[0]))
            elif len(parts) == 3:
                start, step, end = map(float, parts)
                if step <= 0 or end < start:
                    raise GridSyntaxError(f"bad range {piece!r}")
                n = int(np.floor((end - start) / step + 0.5)) + 1
                values.extend(np.round(start + step * np.arange(n), 10).tolist())
            else:
                raise GridSyntaxError(f"bad range {piece!r}")
        except ValueError:
            raise GridSyntaxError(f"bad range {piece!r}") from None
    if not values:
        raise GridSyntaxError(f"empty grid {text!r}")
    return values


def parse_grid_spec(text):
    """Parse ``name=range-list`` into (name, values)."""
    if "=" not in text:
        raise GridSyntaxError(f"expected name=ranges, got {text!r}")
    name, ranges = text.split("=", 1)
    name = name.strip().lower()
    alias = {"lambda": "lam", "lam": "lam", "k": "k", "l1_ratio": "l1_ratio"}
    if name not in alias:
        raise GridSyntaxError(f"unknown grid parameter {name!r}")
    return alias[name], parse_range_list(ranges)


def _load_dataset(path, target):
    targets = [target] if target else [-1]
    return load_csv(path, targets)


def _write(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_fit(args):
    ds = _load_dataset(args.data, args.target)
    params = {}
    if args.k is not None:
        params["k"] = args.k
    if args.lam is not None:
        params["lam"] = args.lam
    if args.l1_ratio is not None:
        params["l1_ratio"] = args.l1_ratio
    if args.refine_iters is not None:
        params["refine_iters"] = args.refine_iters
    fit = evaluation.make_method(args.method, **params)
    cs = fit(ds.X, ds.Y)
    a = cs.column(0)
    payload = {
        "method": args.method,
        "k": params.get("k"),
        "lambda": params.get("lam"),
        "coefficients": [float(v) for v in a],
        "nonzero_indices": [int(j) for j in cs.nonzero(args.threshold)],
    }
    _write(canonical_json(payload) + "\n", args.out)
    return EXIT_OK


def cmd_profile(args):
    ds = _load_dataset(args.data, args.target)
    name, grid = parse_grid_spec(args.sweep)
    fixed = {}
    if args.lam is not None and name != "lam":
        fixed["lam"] = args.lam
    if args.k is not None and name != "k":
        fixed["k"] = args.k
    if args.refine_iters is not None:
        fixed["refine_iters"] = args.refine_iters
    trace = coefficient_path(ds, args.method, name, grid, **fixed)
    _write(trace.to_csv(), args.out)
    return EXIT_OK


def cmd_cv(args):
    ds = _load_dataset(args.data, args.target)
    if args.folds > ds.n_samples:
        print(f"error: folds={args.folds} exceeds sample count {ds.n_samples}",
              file=sys.stderr)
        return EXIT_GRID
    grids = dict(parse_grid_spec(g) for g in args.grid)
    report = cross_validate(ds, args.method, grids, folds=args.folds, seed=args.seed)
    _write(report.to_json() + "\n", args.out)
    best = {k: v for k, v in report.best.items() if k != "cv_score"}
    print(f"best: {best} cv_score={report.best['cv_score']:.6g}")
    return EXIT_OK


def cmd_bench(args):
    if args.name not in BENCH_NAMES:
        print(f"error: unknown benchmark {args.name!r}; valid names: "
              f"{', '.join(BENCH_NAMES)}", file=sys.stderr)
        return EXIT_INPUT
    if args.name == "xor":
        report = casestudies.xor_bench(seed=args.seed, threshold=args.threshold)
    elif args.name == "prostate":
        report = casestudies.prostate_bench(args.data or "data/prostate.data",
                                            seed=args.seed, threshold=args.threshold)
    else:
        report = monte_carlo_bench(int(args.name[3:]), trials=args.trials,
                                   seed=args.seed)
    _write(report.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_dataset(args):
    """Materialize a built-in dataset as CSV (targets in the last columns)."""
    if args.name == "xor-train":
        ds = datasets.gen_xor_train()
    elif args.name == "xor-test":
        ds = datasets.gen_xor_test(args.seed)
    elif args.name.startswith("sim"):
        spec = datasets.sim_spec(int(args.name[3:]))
        split = {"train": 0, "valid": 1, "test": 2}[args.split]
        ds = datasets.gen_sim(spec, args.seed)[split]
    elif args.name == "prostate":
        train, test = datasets.load_prostate(args.data or "data/prostate.data")
        if args.standardize != "none":
            Xtr, ytr, Xte, yte = casestudies.prostate_design(
                train, test, scope=args.standardize)
            names = ("intercept",) + train.feature_names
            ds = (datasets.Dataset(Xtr, ytr[:, None], names, ("lpsa",))
                  if args.split == "train"
                  else datasets.Dataset(Xte, yte[:, None], names, ("lpsa",)))
        else:
            ds = train if args.split == "train" else test
    else:
        print(f"error: unknown dataset {args.name!r}", file=sys.stderr)
        return EXIT_INPUT
    header = ",".join(ds.feature_names + ds.target_names)
    rows = [header]
    for i in range(ds.n_samples):
        cells = [f"{v:.17g}" for v in ds.X[i]] + [f"{v:.17g}" for v in ds.Y[i]]
        rows.append(",".join(cells))
    _write("\n".join(rows) + "\n", args.out)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="bridgekit", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data_required=True):
        sp.add_argument("--data", required=data_required, help="input CSV path")
        sp.add_argument("--target", default=None,
                        help="target column name (default: last column)")
        sp.add_argument("--out", default=None, help="output path (default: stdout)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threshold", type=float, default=1e-3)

    sp = sub.add_parser("fit", help="fit one model, write coefficients as JSON")
    common(sp)
    sp.add_argument("--method", required=True, choices=evaluation.METHOD_NAMES)
    sp.add_argument("--k", type=float, default=None)
    sp.add_argument("--lambda", dest="lam", type=float, default=None)
    sp.add_argument("--l1-ratio", dest="l1_ratio", type=float, default=None)
    sp.add_argument("--refine-iters", dest="refine_iters", type=int, default=None)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("profile", help="coefficient path along a sweep, as CSV")
    common(sp)
    sp.add_argument("--method", required=True, choices=evaluation.METHOD_NAMES)
    sp.add_argument("--sweep", required=True, help="e.g. k=1.01:0.01:2")
    sp.add_argument("--k", type=float, default=None)
    sp.add_argument("--lambda", dest="lam", type=float, default=None)
    sp.add_argument("--refine-iters", dest="refine_iters", type=int, default=None)
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("cv", help="cross-validated grid search, report as JSON")
    common(sp)
    sp.add_argument("--method", required=True, choices=evaluation.METHOD_NAMES)
    sp.add_argument("--grid", action="append", required=True,
                    help="name=start:step:end[,...]; repeatable")
    sp.add_argument("--folds", type=int, default=10)
    sp.set_defaults(func=cmd_cv)

    sp = sub.add_parser("bench", help="run a named benchmark, report as JSON")
    sp.add_argument("name", help=f"one of: {', '.join(BENCH_NAMES)}")
    sp.add_argument("--data", default=None, help="data file for prostate")
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threshold", type=float, default=1e-3)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("dataset", help="materialize a built-in dataset as CSV")
    sp.add_argument("name", help="xor-train | xor-test | sim1..sim4 | prostate")
    sp.add_argument("--split", choices=("train", "valid", "test"), default="train")
    sp.add_argument("--standardize", choices=("none", "train", "all"), default="none",
                    help="prostate only: standardization scope (adds intercept column)")
    sp.add_argument("--data", default=None, help="source file for prostate")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_dataset)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors, matching our contract
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return args.func(args)
    except GridSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GRID
    except (FileNotFoundError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SingularSystem, NonSymmetric, InvalidK, DivergedFixedPoint,
            RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GRID


if __name__ == "__main__":
    sys.exit(main())
