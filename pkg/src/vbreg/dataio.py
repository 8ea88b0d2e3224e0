"""Dataset containers, CSV ingestion/emission, and seeded demo generators.

CSV format: UTF-8, mandatory header row, comma separator, '.' decimal point,
'\\n' line endings, and shortest round-trip number formatting, so that a save
followed by a load reproduces every value bit-exactly.

Randomness: every generator is a pure function of (seed, parameters). Seeds
feed a PCG64 counter-based generator; standard normal draws are produced by
applying the inverse normal CDF to uniforms on a centered 53-bit lattice,
(k + 0.5) / 2^53, which keeps the transform deterministic and avoids the
endpoints of the unit interval.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .numerics import sigmoid

__all__ = [
    "Dataset",
    "LabelDataset",
    "load_csv",
    "save_csv",
    "gen_linear_coeff",
    "gen_linear_sparse",
    "gen_polynomial",
    "gen_logit_plane",
    "gen_logit_sparse",
]


@dataclass(frozen=True)
class Dataset:
    """Design matrix x (rows are observations), target vector y, and names.

    Loaders and generators always produce n >= 1; direct construction with
    n == 0 is permitted so that prior-passthrough fits can be exercised.
    """

    x: np.ndarray
    y: np.ndarray
    feature_names: tuple = field(default=())

    def __post_init__(self):
        x = np.ascontiguousarray(np.asarray(self.x, dtype=float))
        y = np.ascontiguousarray(np.asarray(self.y, dtype=float))
        if x.ndim != 2:
            raise ValueError(f"x must be 2-D, got shape {x.shape}")
        if y.ndim != 1:
            raise ValueError(f"y must be 1-D, got shape {y.shape}")
        if x.shape[0] != y.shape[0]:
            raise ValueError(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
        if x.shape[1] < 1:
            raise ValueError("at least one feature column is required")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("all entries must be finite")
        names = tuple(self.feature_names) or tuple(
            f"x{i}" for i in range(x.shape[1]))
        if len(names) != x.shape[1]:
            raise ValueError(f"{len(names)} feature names for "
                             f"{x.shape[1]} columns")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def d(self):
        return self.x.shape[1]


@dataclass(frozen=True)
class LabelDataset(Dataset):
    """Dataset whose targets are class labels, each exactly -1 or +1."""

    def __post_init__(self):
        super().__post_init__()
        bad = np.nonzero(~np.isin(self.y, (-1.0, 1.0)))[0]
        if bad.size:
            raise ValueError(
                f"labels must be -1 or +1; row {bad[0] + 1} has {self.y[bad[0]]!r}")


def _format(v):
    return repr(float(v))


def load_csv(path, target_column=None):
    """Load a CSV file into a Dataset.

    The first row is the header. The target column (by default the last one)
    becomes y; the remaining columns, in header order, become x.
    """
    if not os.path.exists(path):
        raise ValueError(f"no such file: {path}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = lines[0].split(",")
    if len(header) < 2:
        raise ValueError(f"{path}: need at least one feature column plus a "
                         f"target column, header has {len(header)}")
    if target_column is None:
        target_idx = len(header) - 1
    else:
        if target_column not in header:
            raise ValueError(f"{path}: no column named {target_column!r}")
        target_idx = header.index(target_column)

    rows = []
    for r, line in enumerate(lines[1:], start=1):
        cells = line.split(",")
        if len(cells) != len(header):
            raise ValueError(f"{path}: row {r} has {len(cells)} cells, "
                             f"expected {len(header)}")
        parsed = []
        for c, cell in enumerate(cells):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise ValueError(
                    f"{path}: row {r}, column {header[c]!r}: "
                    f"cannot parse {cell!r} as a number") from None
        rows.append(parsed)
    if not rows:
        raise ValueError(f"{path}: no data rows")

    data = np.asarray(rows, dtype=float)
    y = data[:, target_idx]
    x = np.delete(data, target_idx, axis=1)
    names = tuple(h for i, h in enumerate(header) if i != target_idx)
    return Dataset(x=x, y=y, feature_names=names)


def save_csv(path, column_names, columns):
    """Write equal-length numeric columns as CSV with a header row."""
    column_names = list(column_names)
    columns = [np.asarray(c, dtype=float) for c in columns]
    if not columns:
        raise ValueError("at least one column is required")
    if len(column_names) != len(columns):
        raise ValueError(f"{len(column_names)} names for {len(columns)} columns")
    length = columns[0].shape[0]
    for name, col in zip(column_names, columns):
        if col.ndim != 1 or col.shape[0] != length:
            raise ValueError(f"column {name!r} is ragged "
                             f"({col.shape} vs length {length})")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(column_names) + "\n")
        for i in range(length):
            fh.write(",".join(_format(col[i]) for col in columns) + "\n")


def save_dataset(path, data):
    """Write a Dataset as CSV: feature columns in order, then a 'y' column."""
    names = list(data.feature_names) + ["y"]
    cols = [data.x[:, j] for j in range(data.d)] + [data.y]
    save_csv(path, names, cols)


def _rng(seed):
    seed = int(seed)
    if seed < 0 or seed > 2**64 - 1:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.default_rng(seed)


def _normals(rng, size):
    # inverse-CDF transform of centered 53-bit lattice uniforms
    u = (rng.integers(0, 2**53, size=size).astype(float) + 0.5) / 2**53
    return ndtri(u)


def _uniforms(rng, size):
    return rng.random(size)


def _labels(rng, prob_pos):
    return 2.0 * (_uniforms(rng, prob_pos.shape[0]) < prob_pos) - 1.0


def gen_linear_coeff(seed, n=100, n_test=50, noise_sd=1.0):
    """Intercept plus three standard-normal features, w_true = (1, 2, 3, 5).

    Draw order: train features, test features, train noise, test noise.
    """
    if n < 1 or n_test < 1:
        raise ValueError("n and n_test must be >= 1")
    rng = _rng(seed)
    w_true = np.array([1.0, 2.0, 3.0, 5.0])
    x = np.column_stack([np.ones(n), _normals(rng, (n, 3))])
    x_test = np.column_stack([np.ones(n_test), _normals(rng, (n_test, 3))])
    y = x @ w_true + noise_sd * _normals(rng, n)
    y_test = x_test @ w_true + noise_sd * _normals(rng, n_test)
    names = ("intercept", "x1", "x2", "x3")
    return (w_true,
            Dataset(x=x, y=y, feature_names=names),
            Dataset(x=x_test, y=y_test, feature_names=names))


def gen_linear_sparse(seed, d, d_eff, n, n_test, noise_sd=1.0):
    """Uniform inputs on [-0.5, 0.5] with only the first d_eff coefficients
    nonzero; the trailing d - d_eff generative coefficients are exactly zero.

    Draw order: w_true, train inputs, test inputs, train noise, test noise.
    """
    if not (1 <= d_eff <= d):
        raise ValueError(f"need 1 <= d_eff <= d, got d_eff={d_eff}, d={d}")
    if n < 1 or n_test < 1:
        raise ValueError("n and n_test must be >= 1")
    rng = _rng(seed)
    w_true = np.concatenate([_normals(rng, d_eff), np.zeros(d - d_eff)])
    x = _uniforms(rng, (n, d)) - 0.5
    x_test = _uniforms(rng, (n_test, d)) - 0.5
    y = x @ w_true + noise_sd * _normals(rng, n)
    y_test = x_test @ w_true + noise_sd * _normals(rng, n_test)
    return (w_true,
            Dataset(x=x, y=y),
            Dataset(x=x_test, y=y_test))


def gen_polynomial(seed, order_plus_one, n, n_test, x_range=(-5.0, 5.0),
                   noise_sd=1.0, kind="linear"):
    """Scalar inputs expanded into polynomial columns x^0 .. x^(k-1).

    Train inputs are uniform on x_range; test inputs are an evenly spaced
    grid over the same range. kind="linear" adds Gaussian noise to the train
    targets and leaves the test targets on the noise-free curve;
    kind="logit" draws labels from sigmoid(X w_true) for both sets.

    Draw order: w_true, train inputs, train noise/labels, test labels.
    """
    k = int(order_plus_one)
    if k < 1:
        raise ValueError(f"order_plus_one must be >= 1, got {k}")
    if n < 1 or n_test < 1:
        raise ValueError("n and n_test must be >= 1")
    if kind not in ("linear", "logit"):
        raise ValueError(f"kind must be 'linear' or 'logit', got {kind!r}")
    lo, hi = float(x_range[0]), float(x_range[1])
    if not lo < hi:
        raise ValueError(f"empty x_range {x_range!r}")
    rng = _rng(seed)
    w_true = _normals(rng, k)
    t = lo + (hi - lo) * _uniforms(rng, n)
    t_test = np.linspace(lo, hi, n_test)
    powers = np.arange(k)
    x = t[:, None] ** powers
    x_test = t_test[:, None] ** powers
    names = tuple(f"x{j}" for j in range(k))
    if kind == "linear":
        y = x @ w_true + noise_sd * _normals(rng, n)
        y_test = x_test @ w_true
        return (w_true,
                Dataset(x=x, y=y, feature_names=names),
                Dataset(x=x_test, y=y_test, feature_names=names))
    y = _labels(rng, sigmoid(x @ w_true))
    y_test = _labels(rng, sigmoid(x_test @ w_true))
    return (w_true,
            LabelDataset(x=x, y=y, feature_names=names),
            LabelDataset(x=x_test, y=y_test, feature_names=names))


def gen_logit_plane(seed, n=100, n_test=1000, x_scale=5.0):
    """Three-feature classification data straddling a random hyperplane.

    The first feature is the constant 1, the second is uniform on
    [-x_scale/2, x_scale/2], and the third is built so that
    w1 + x2 w2 + x3 w3 > 0 with 50% probability, which balances the labels.
    Labels are drawn from sigmoid(w' x).

    Draw order: w_true, train uniforms, test uniforms, train labels,
    test labels.
    """
    if n < 1 or n_test < 1:
        raise ValueError("n and n_test must be >= 1")
    rng = _rng(seed)
    w_true = _normals(rng, 3)

    def make_x(m):
        col2 = x_scale * (_uniforms(rng, m) - 0.5)
        col3 = (x_scale * (_uniforms(rng, m) - 0.5)
                - (w_true[0] + col2 * w_true[1]) / w_true[2])
        return np.column_stack([np.ones(m), col2, col3])

    x = make_x(n)
    x_test = make_x(n_test)
    y = _labels(rng, sigmoid(x @ w_true))
    y_test = _labels(rng, sigmoid(x_test @ w_true))
    names = ("intercept", "x1", "x2")
    return (w_true,
            LabelDataset(x=x, y=y, feature_names=names),
            LabelDataset(x=x_test, y=y_test, feature_names=names))


def gen_logit_sparse(seed, d, d_eff, n, n_test):
    """Classification twin of gen_linear_sparse: labels from sigmoid(X w).

    Draw order: w_true, train inputs, test inputs, train labels, test labels.
    """
    if not (1 <= d_eff <= d):
        raise ValueError(f"need 1 <= d_eff <= d, got d_eff={d_eff}, d={d}")
    if n < 1 or n_test < 1:
        raise ValueError("n and n_test must be >= 1")
    rng = _rng(seed)
    w_true = np.concatenate([_normals(rng, d_eff), np.zeros(d - d_eff)])
    x = _uniforms(rng, (n, d)) - 0.5
    x_test = _uniforms(rng, (n_test, d)) - 0.5
    y = _labels(rng, sigmoid(x @ w_true))
    y_test = _labels(rng, sigmoid(x_test @ w_true))
    return (w_true,
            LabelDataset(x=x, y=y),
            LabelDataset(x=x_test, y=y_test))
