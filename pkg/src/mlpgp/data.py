"""Benchmark regression datasets: Sine, Smooth XOR, and the Snelson loader."""

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["Dataset", "gen_sine", "gen_smooth_xor", "load_snelson", "save_csv"]

SQRT3 = np.sqrt(3.0)
DEFAULT_NOISE_VAR = 0.1

SNELSON_ROWS = 200
SNELSON_TRAIN = 10


@dataclass
class Dataset:
    """Train/test regression data with a fixed observation-noise variance.

    For generated datasets the sampled noise is kept so the noiseless
    targets stay recoverable as y - noise.
    """

    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    noise_var: float = DEFAULT_NOISE_VAR
    noise_train: Optional[np.ndarray] = field(default=None, repr=False)
    noise_test: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.X_train.shape[0] != self.y_train.shape[0]:
            raise ValueError("train rows and targets disagree")
        if self.X_test.shape[0] != self.y_test.shape[0]:
            raise ValueError("test rows and targets disagree")
        if self.noise_var < 0.0:
            raise ValueError("noise variance must be non-negative")

    @property
    def input_dim(self) -> int:
        return self.X_train.shape[1]


def gen_sine(seed: int) -> Dataset:
    """1-d problem y = sin(x) + eps, eps ~ N(0, 0.1 variance).

    10 training inputs on a uniform grid over [-sqrt(3), sqrt(3)] (endpoints
    included), 100 test inputs sampled uniformly on the same interval.
    """
    rng = np.random.default_rng(seed)
    x_train = np.linspace(-SQRT3, SQRT3, 10)
    noise_train = rng.normal(0.0, np.sqrt(DEFAULT_NOISE_VAR), x_train.size)
    x_test = np.sort(rng.uniform(-SQRT3, SQRT3, 100))
    noise_test = rng.normal(0.0, np.sqrt(DEFAULT_NOISE_VAR), x_test.size)
    return Dataset(
        X_train=x_train[:, None],
        y_train=np.sin(x_train) + noise_train,
        X_test=x_test[:, None],
        y_test=np.sin(x_test) + noise_test,
        noise_var=DEFAULT_NOISE_VAR,
        noise_train=noise_train,
        noise_test=noise_test,
    )


def _xor_target(X: np.ndarray) -> np.ndarray:
    return -X[:, 0] * X[:, 1] * np.exp(2.0 - X[:, 0] ** 2 - X[:, 1] ** 2)


def gen_smooth_xor(seed: int) -> Dataset:
    """2-d problem y = -x1 x2 exp(2 - x1^2 - x2^2) + eps.

    The four sign permutations of (+-1, +-1) form the training set; test
    inputs are 100 points sampled uniformly on the square [-2, 2]^2.
    """
    rng = np.random.default_rng(seed)
    X_train = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    noise_train = rng.normal(0.0, np.sqrt(DEFAULT_NOISE_VAR), 4)
    X_test = rng.uniform(-2.0, 2.0, (100, 2))
    noise_test = rng.normal(0.0, np.sqrt(DEFAULT_NOISE_VAR), 100)
    return Dataset(
        X_train=X_train,
        y_train=_xor_target(X_train) + noise_train,
        X_test=X_test,
        y_test=_xor_target(X_test) + noise_test,
        noise_var=DEFAULT_NOISE_VAR,
        noise_train=noise_train,
        noise_test=noise_test,
    )


def load_snelson(path, seed: int = 0) -> Dataset:
    """Load the 200-pair Snelson data and split 10 train / 190 test.

    The file must hold 200 whitespace-separated (x, y) rows.  Rows are
    sorted by x and the training set takes 10 equally spaced ranks
    (endpoints included); the split is deterministic, `seed` is accepted
    only for pipeline uniformity.
    """
    xs, ys = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(
                    f"{path}: line {lineno}: expected two columns, got {len(parts)}")
            try:
                xs.append(float(parts[0]))
                ys.append(float(parts[1]))
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    if len(xs) != SNELSON_ROWS:
        raise ValueError(
            f"{path}: expected {SNELSON_ROWS} rows, found {len(xs)}")
    order = np.argsort(np.asarray(xs), kind="stable")
    x = np.asarray(xs)[order]
    y = np.asarray(ys)[order]
    train_idx = np.array(
        [round(k * (SNELSON_ROWS - 1) / (SNELSON_TRAIN - 1))
         for k in range(SNELSON_TRAIN)], dtype=int)
    test_mask = np.ones(SNELSON_ROWS, dtype=bool)
    test_mask[train_idx] = False
    return Dataset(
        X_train=x[train_idx][:, None],
        y_train=y[train_idx],
        X_test=x[test_mask][:, None],
        y_test=y[test_mask],
        noise_var=DEFAULT_NOISE_VAR,
    )


def save_csv(dataset: Dataset, path) -> None:
    """Write the dataset as CSV with a header and a train/test split column."""
    d = dataset.input_dim
    header = ["split"] + [f"x{i + 1}" for i in range(d)] + ["y"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for split, X, y in (("train", dataset.X_train, dataset.y_train),
                            ("test", dataset.X_test, dataset.y_test)):
            for row, target in zip(X, y):
                writer.writerow([split] + [f"{v:.17g}" for v in row]
                                + [f"{target:.17g}"])
