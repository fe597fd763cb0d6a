#!/usr/bin/env python
"""
File Description: Synthetic classification datasets.

Each class is a unit-variance Gaussian cluster centred on a distinct vertex of a hypercube with side 2 * separation
spanning the informative features. The informative features come first; the remaining features are standard normal
noise.
"""

# ******************************************    Libraries to be imported    ****************************************** #
import logging
from dataclasses import asdict, dataclass
from typing import Tuple, Union

import numpy as np

from protclass.errors import ConfigError, InvalidLabelError

logger = logging.getLogger(__name__)

MAX_EXACT_VERTEX_BITS = 30


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True)
class SyntheticSpec:
    """
    :param n_features: Total feature count.
    :param n_informative: Features that carry class information; the first columns.
    :param K: Number of classes.
    :param n_train: Training rows; must be at least K so every class appears.
    :param n_test: Test rows.
    :param seed: Seed of numpy's default generator.
    :param separation: Half the hypercube side; 0 makes labels independent of features.
    """

    n_features: int = 20
    n_informative: int = 5
    K: int = 2
    n_train: int = 2000
    n_test: int = 1000
    seed: int = 0
    separation: float = 1.0

    def __post_init__(self):
        for name in ("n_features", "n_informative", "n_train", "n_test"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.n_informative > self.n_features:
            raise ConfigError(f"n_informative ({self.n_informative}) exceeds n_features ({self.n_features})")
        if self.K < 2:
            raise ConfigError(f"K must be at least 2, got {self.K}")
        if self.n_informative < MAX_EXACT_VERTEX_BITS and self.K > 2**self.n_informative:
            raise ConfigError(f"{self.n_informative} informative features cannot place {self.K} distinct clusters")
        if self.n_train < self.K:
            raise ConfigError(f"n_train ({self.n_train}) must be at least K ({self.K})")
        if self.separation < 0:
            raise ConfigError(f"separation must be non-negative, got {self.separation}")

    def to_dict(self) -> dict:
        return asdict(self)


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix X of shape (n, d) with labels y in 0..K-1."""

    X: np.ndarray
    y: np.ndarray
    K: int

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=np.int64).reshape(-1)
        if X.ndim != 2 or X.shape[0] != len(y):
            raise ConfigError(f"features of shape {X.shape} do not match {len(y)} labels")
        if len(y) and (y.min() < 0 or y.max() >= self.K):
            raise InvalidLabelError(f"labels must lie in 0..{self.K - 1}")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return len(self.y)

    def take(self, index: Union[np.ndarray, slice]) -> "Dataset":
        """Rows selected by an index array, boolean mask or slice, in that order."""
        return Dataset(X=self.X[index], y=self.y[index], K=self.K)

    def identical_to(self, other: "Dataset") -> bool:
        return self.K == other.K and np.array_equal(self.X, other.X) and np.array_equal(self.y, other.y)


# ****************************************        Function Declaration        **************************************** #
def hypercube_vertices(count: int, dimensions: int, rng: np.random.Generator) -> np.ndarray:
    """Distinct 0/1 vertices of the unit hypercube, one per row."""
    if dimensions > MAX_EXACT_VERTEX_BITS:
        head = rng.integers(0, 2, size=(count, dimensions - MAX_EXACT_VERTEX_BITS))
        return np.hstack([head, hypercube_vertices(count, MAX_EXACT_VERTEX_BITS, rng)])
    codes = rng.choice(2**dimensions, size=count, replace=False).astype(">u4")
    bits = np.unpackbits(codes.view(">u1")).reshape((-1, 32))
    return bits[:, -dimensions:]


def _balanced_labels(n: int, K: int, rng: np.random.Generator) -> np.ndarray:
    return rng.permutation(np.arange(n) % K)


def generate(spec: SyntheticSpec) -> Tuple[Dataset, Dataset]:
    """
    Draw a train and a test set from the same distribution.

    Labels cycle through the classes before shuffling, so class counts differ by at most one and every class is
    present in a training set of at least K rows.

    :param spec: Dataset description.
    :return: (train, test)
    """
    rng = np.random.default_rng(spec.seed)
    centroids = hypercube_vertices(spec.K, spec.n_informative, rng).astype(float)
    centroids = centroids * 2.0 * spec.separation - spec.separation

    n_total = spec.n_train + spec.n_test
    y = np.concatenate([_balanced_labels(spec.n_train, spec.K, rng), _balanced_labels(spec.n_test, spec.K, rng)])
    informative = centroids[y] + rng.standard_normal((n_total, spec.n_informative))
    noise = rng.standard_normal((n_total, spec.n_features - spec.n_informative))
    X = np.hstack([informative, noise])

    logger.info(
        "generated %d train / %d test rows, %d features, K=%d (seed %d)",
        spec.n_train,
        spec.n_test,
        spec.n_features,
        spec.K,
        spec.seed,
    )
    train = Dataset(X=X[: spec.n_train], y=y[: spec.n_train], K=spec.K)
    test = Dataset(X=X[spec.n_train :], y=y[spec.n_train :], K=spec.K)
    return train, test
