"""Dataset containers, loaders, standardization, and synthetic generators.

All generators draw from numpy's default PCG64 bit generator seeded with the
caller's unsigned integer seed, so every dataset is bit-identical across runs
and platforms for a fixed seed.
"""

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix

__all__ = [
    "Dataset",
    "Standardization",
    "SimSpec",
    "ParseError",
    "RaggedRows",
    "OutOfRangeLabel",
    "load_csv",
    "load_prostate",
    "standardize",
    "apply_standardization",
    "destandardize",
    "poly3_features",
    "POLY3_NAMES",
    "XOR_TRAIN_POINTS",
    "gen_xor_train",
    "gen_xor_test",
    "sim_spec",
    "gen_sim",
    "one_hot",
]


class ParseError(ValueError):
    """A cell of a data file could not be parsed; carries row/column info."""


class RaggedRows(ParseError):
    """Rows of a data file disagree on the number of fields."""


class OutOfRangeLabel(ValueError):
    """A class id lies outside 0..C-1."""


@dataclass(frozen=True)
class Standardization:
    """Per-feature affine transform metadata: z = (x - mean) / scale."""

    mean: np.ndarray
    scale: np.ndarray
    constant_columns: np.ndarray  # boolean mask of columns left untouched


@dataclass(frozen=True)
class Dataset:
    """An (X, Y) pair with naming and optional standardization metadata."""

    X: np.ndarray
    Y: np.ndarray
    feature_names: tuple = ()
    target_names: tuple = ()
    standardization: Standardization | None = None

    def __post_init__(self):
        X = as_matrix(self.X, "X")
        Y = as_matrix(self.Y, "Y")
        if X.shape[0] != Y.shape[0]:
            raise ValueError("X and Y row counts differ")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        if not self.feature_names:
            object.__setattr__(
                self, "feature_names", tuple(f"x{j}" for j in range(X.shape[1]))
            )
        if not self.target_names:
            object.__setattr__(
                self, "target_names", tuple(f"y{l}" for l in range(Y.shape[1]))
            )

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    def y(self, l=0):
        return self.Y[:, l]


def load_csv(path, target_columns, has_header=True):
    """Load a rectangular numeric CSV into a Dataset.

    ``target_columns`` selects the response columns either by header name or
    by integer position.  Rows keep their file order.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: file is empty")
    if has_header:
        header, rows = rows[0], rows[1:]
    else:
        header = [f"c{j}" for j in range(len(rows[0]))]
    width = len(header)
    data = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise RaggedRows(
                f"{path}: row {i + 1} has {len(row)} fields, expected {width}"
            )
        for j, cell in enumerate(row):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: non-numeric cell at row {i + 1}, column "
                    f"{header[j]!r}: {cell!r}"
                ) from None
    targets = []
    for t in target_columns:
        if isinstance(t, str):
            if t not in header:
                raise ParseError(f"{path}: no column named {t!r}")
            targets.append(header.index(t))
        else:
            targets.append(int(t) % width)
    keep = [j for j in range(width) if j not in targets]
    return Dataset(
        data[:, keep],
        data[:, targets],
        tuple(header[j] for j in keep),
        tuple(header[j] for j in targets),
    )


def load_prostate(path):
    """Load the published prostate table and honor its train/test column.

    Expects the standard whitespace/tab-delimited layout: a header naming the
    eight predictors, the ``lpsa`` response, and a ``train`` indicator, with
    a leading row-index column.  Returns (train, test) Datasets.
    """
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = lines[0].split()
    if "train" not in header or "lpsa" not in header:
        raise ParseError(f"{path}: expected 'lpsa' and 'train' columns, got {header}")
    ncol = len(header)
    feats = [c for c in header if c not in ("lpsa", "train")]
    rows, flags = [], []
    for i, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) == ncol + 1:  # leading row index
            parts = parts[1:]
        if len(parts) != ncol:
            raise RaggedRows(f"{path}: line {i} has {len(parts)} fields, expected {ncol}")
        rec = dict(zip(header, parts))
        flags.append(rec["train"] in ("T", "TRUE", "True", "true", "1"))
        try:
            rows.append([float(rec[c]) for c in feats] + [float(rec["lpsa"])])
        except ValueError as exc:
            raise ParseError(f"{path}: line {i}: {exc}") from None
    data = np.asarray(rows)
    flags = np.asarray(flags)
    mk = lambda m: Dataset(data[m, :-1], data[m, -1:], tuple(feats), ("lpsa",))
    return mk(flags), mk(~flags)


def standardize(ds, ddof=1):
    """Center each predictor column and scale it to unit sample deviation.

    Constant columns are left untouched (a warning is issued) so intercept
    columns survive.  The transform is recorded on the returned Dataset for
    reuse on other data and for exact inversion.
    """
    if ds.n_samples < 2:
        raise ValueError("standardize needs at least two rows")
    mean = ds.X.mean(axis=0)
    scale = ds.X.std(axis=0, ddof=ddof)
    constant = scale == 0.0
    if constant.any():
        warnings.warn(
            f"{int(constant.sum())} constant column(s) left unscaled", stacklevel=2
        )
        mean = np.where(constant, 0.0, mean)
        scale = np.where(constant, 1.0, scale)
    st = Standardization(mean, scale, constant)
    return apply_standardization(ds, st)


def apply_standardization(ds, st):
    """Apply previously computed standardization to another Dataset."""
    Z = (ds.X - st.mean) / st.scale
    return Dataset(Z, ds.Y, ds.feature_names, ds.target_names, st)


def destandardize(ds):
    """Invert a recorded standardization, recovering the raw predictors."""
    if ds.standardization is None:
        raise ValueError("dataset carries no standardization metadata")
    st = ds.standardization
    return Dataset(ds.X * st.scale + st.mean, ds.Y, ds.feature_names, ds.target_names)


POLY3_NAMES = (
    "1", "x1", "x2", "x1^2", "x2^2", "x1*x2", "x1^3", "x2^3", "x1^2*x2", "x1*x2^2",
)

XOR_TRAIN_POINTS = ((0.0, 1.0), (2.0, 1.0), (1.0, 0.0), (1.0, 2.0))
_XOR_LABELS = (0.0, 0.0, 1.0, 1.0)


def poly3_features(x1, x2):
    """Full bivariate polynomial basis of order 3, in the fixed table order."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    cols = [
        np.ones_like(x1), x1, x2, x1**2, x2**2, x1 * x2,
        x1**3, x2**3, x1**2 * x2, x1 * x2**2,
    ]
    out = np.stack(cols, axis=-1)
    return out


def gen_xor_train():
    """The four-point XOR training system under the 3rd-order polynomial map."""
    pts = np.asarray(XOR_TRAIN_POINTS)
    X = poly3_features(pts[:, 0], pts[:, 1])
    return Dataset(X, np.asarray(_XOR_LABELS)[:, None], POLY3_NAMES, ("y",))


def gen_xor_test(seed, per_center=50, spread=0.3):
    """Gaussian test clouds around the four XOR training points.

    Each center contributes ``per_center`` draws with covariance
    ``spread * I``; responses copy the center labels.  Deterministic for a
    fixed seed.
    """
    rng = np.random.default_rng(seed)
    sd = np.sqrt(spread)
    xs, ys = [], []
    for (cx, cy), lab in zip(XOR_TRAIN_POINTS, _XOR_LABELS):
        pts = rng.standard_normal((per_center, 2)) * sd + (cx, cy)
        xs.append(pts)
        ys.append(np.full(per_center, lab))
    pts = np.vstack(xs)
    X = poly3_features(pts[:, 0], pts[:, 1])
    return Dataset(X, np.concatenate(ys)[:, None], POLY3_NAMES, ("y",))


@dataclass(frozen=True)
class SimSpec:
    """One of the four synthetic benchmark designs."""

    example_id: int
    n_train: int
    n_valid: int
    n_test: int
    true_alpha: np.ndarray
    sigma: float
    scheme: str  # "ar", "equi", or "latent"
    correlation: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "true_alpha", np.asarray(self.true_alpha, dtype=float))
        if min(self.n_train, self.n_valid, self.n_test) <= 0:
            raise ValueError("split sizes must be positive")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    @property
    def n_features(self):
        return self.true_alpha.size


def sim_spec(example_id):
    """The four published synthetic benchmark designs, keyed 1 through 4."""
    if example_id == 1:
        return SimSpec(1, 20, 20, 200, [3, 1.5, 0, 0, 2, 0, 0, 0], 3.0, "ar", 0.5)
    if example_id == 2:
        return SimSpec(2, 20, 20, 200, [0.85] * 8, 3.0, "ar", 0.5)
    if example_id == 3:
        alpha = [0.0] * 10 + [2.0] * 10 + [0.0] * 10 + [2.0] * 10
        return SimSpec(3, 100, 100, 400, alpha, 15.0, "equi", 0.5)
    if example_id == 4:
        return SimSpec(4, 50, 50, 400, [3.0] * 15 + [0.0] * 25, 15.0, "latent")
    raise ValueError(f"example_id must be 1..4, got {example_id}")


def _draw_predictors(spec, n, rng):
    D = spec.n_features
    if spec.scheme == "ar":
        idx = np.arange(D)
        cov = spec.correlation ** np.abs(idx[:, None] - idx[None, :])
        return rng.standard_normal((n, D)) @ np.linalg.cholesky(cov).T
    if spec.scheme == "equi":
        cov = np.full((D, D), spec.correlation)
        np.fill_diagonal(cov, 1.0)
        return rng.standard_normal((n, D)) @ np.linalg.cholesky(cov).T
    if spec.scheme == "latent":
        # three hidden factors drive the first 15 predictors in groups of 5
        Z = rng.standard_normal((n, 3))
        X = np.empty((n, D))
        for g in range(3):
            X[:, 5 * g : 5 * g + 5] = (
                Z[:, g : g + 1] + rng.standard_normal((n, 5)) * 0.1
            )
        X[:, 15:] = rng.standard_normal((n, D - 15))
        return X
    raise ValueError(f"unknown scheme {spec.scheme!r}")


def gen_sim(spec, seed):
    """Draw (train, valid, test) Datasets for a synthetic design.

    Responses follow y = alpha^T x + sigma * eps with standard normal eps.
    """
    rng = np.random.default_rng(seed)
    out = []
    for n in (spec.n_train, spec.n_valid, spec.n_test):
        X = _draw_predictors(spec, n, rng)
        y = X @ spec.true_alpha + spec.sigma * rng.standard_normal(n)
        out.append(Dataset(X, y[:, None]))
    return tuple(out)


def one_hot(labels, n_classes):
    """Encode integer class ids as an M x C indicator matrix."""
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValueError("labels must be a 1-D sequence")
    ids = labels.astype(int)
    if np.any(ids != labels):
        raise OutOfRangeLabel("labels must be integers")
    if ids.size and (ids.min() < 0 or ids.max() >= n_classes):
        raise OutOfRangeLabel(
            f"labels must lie in 0..{n_classes - 1}, got range "
            f"[{ids.min()}, {ids.max()}]"
        )
    out = np.zeros((ids.size, n_classes))
    out[np.arange(ids.size), ids] = 1.0
    return out
