#!/usr/bin/env python
"""
File Description: Cox calibrating functions and the default calibrator grid.

A Cox calibrator with parameters (alpha, beta) maps a probability vector p over K classes to

    f(p)_y = p_y ** beta * exp(alpha[y]) / sum_y' p_y' ** beta * exp(alpha[y'])

beta = 1 with alpha = 0 is the identity (the neutral calibrator), beta < 1 softens overconfident
predictions, beta > 1 sharpens underconfident ones and alpha shifts mass between classes.
"""

# ******************************************    Libraries to be imported    ****************************************** #
import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Sequence, Tuple, Union

import numpy as np

from protclass.errors import ConfigError, InvalidProbabilityError

logger = logging.getLogger(__name__)

NORMALIZE_TOLERANCE = 1e-6
DEDUPE_TOLERANCE = 1e-12
DEFAULT_BETAS = (1.0, 0.5, 2.0)
DEFAULT_ALPHA_MAGNITUDES = (1.0,)

ArrayLike = Union[Sequence[float], np.ndarray]


# ******************************************    Class Declaration Start     ****************************************** #
class ProbVector:
    """
    A point on the probability simplex over K >= 2 classes.

    Construction accepts any non-negative vector whose entries sum to 1 within 1e-6 and rescales it so the sum is 1
    to machine precision; anything further off the simplex is rejected. The entries are held in a read-only numpy
    array.

        >>> ProbVector([0.8, 0.2]).entries
        array([0.8, 0.2])
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: ArrayLike):
        arr = np.array(entries, dtype=float)
        if arr.ndim != 1 or arr.shape[0] < 2:
            raise InvalidProbabilityError(f"a probability vector needs at least 2 entries, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidProbabilityError(f"non-finite probability in {arr.tolist()}")
        if np.any(arr < 0.0):
            raise InvalidProbabilityError(f"negative probability in {arr.tolist()}")
        total = arr.sum()
        if abs(total - 1.0) > NORMALIZE_TOLERANCE:
            raise InvalidProbabilityError(f"probabilities sum to {total!r}, not 1")
        if total != 1.0:
            arr = arr / total
        arr.flags.writeable = False
        self._entries = arr

    @classmethod
    def _trusted(cls, arr: np.ndarray) -> "ProbVector":
        """Wrap an array already known to be on the simplex, skipping validation."""
        obj = cls.__new__(cls)
        arr = np.asarray(arr, dtype=float)
        arr.flags.writeable = False
        obj._entries = arr
        return obj

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def K(self) -> int:
        return self._entries.shape[0]

    def __len__(self) -> int:
        return self._entries.shape[0]

    def __getitem__(self, index):
        return self._entries[index]

    def __iter__(self) -> Iterator[float]:
        return iter(self._entries.tolist())

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._entries, dtype=dtype)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProbVector):
            return NotImplemented
        return bool(np.array_equal(self._entries, other._entries))

    def __hash__(self) -> int:
        return hash(self._entries.tobytes())

    def tolist(self) -> List[float]:
        return self._entries.tolist()

    def __repr__(self) -> str:
        return f"ProbVector({self._entries.tolist()!r})"


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True)
class ThetaParams:
    """
    Parameters of one Cox calibrator: per-class offsets alpha and a positive exponent beta.

    Offsets that differ by a constant define the same calibrator, so construction stores the representative whose
    smallest offset is 0.
    """

    alpha: Tuple[float, ...]
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        if len(self.alpha) < 2:
            raise ConfigError(f"alpha needs one offset per class (at least 2), got {self.alpha}")
        if not np.isfinite(self.beta) or self.beta <= 0.0:
            raise ConfigError(f"beta must be a positive real, got {self.beta}")
        if not all(np.isfinite(a) for a in self.alpha):
            raise ConfigError(f"alpha offsets must be finite, got {self.alpha}")
        lo = min(self.alpha)
        object.__setattr__(self, "alpha", tuple(a - lo for a in self.alpha))

    @classmethod
    def neutral(cls, K: int) -> "ThetaParams":
        return cls(alpha=(0.0,) * K, beta=1.0)

    @property
    def K(self) -> int:
        return len(self.alpha)

    @property
    def is_neutral(self) -> bool:
        return self.beta == 1.0 and all(a == 0.0 for a in self.alpha)

    def canonical(self) -> "ThetaParams":
        return self

    def same_as(self, other: "ThetaParams", tol: float = DEDUPE_TOLERANCE) -> bool:
        """True when both calibrators have matching canonical forms entrywise within tol."""
        if self.K != other.K or abs(self.beta - other.beta) > tol:
            return False
        a, b = self.alpha, other.alpha
        return all(abs(x - y) <= tol for x, y in zip(a, b))

    def to_dict(self) -> dict:
        return {"alpha": list(self.alpha), "beta": self.beta}

    def __str__(self) -> str:
        alpha = ", ".join(f"{a:g}" for a in self.alpha)
        return f"(beta={self.beta:g}, alpha=[{alpha}])"


# ******************************************    Class Declaration Start     ****************************************** #
class ThetaGrid:
    """
    An ordered set of distinct Cox calibrators sharing one class count, with the neutral calibrator at index 0.

    The grid keeps stacked copies of its parameters so the whole family can be applied to one probability vector
    with a handful of numpy operations (see apply()).
    """

    def __init__(self, thetas: Iterable[ThetaParams]):
        thetas = tuple(thetas)
        if not thetas:
            raise ConfigError("a calibrator grid needs at least the neutral calibrator")
        K = thetas[0].K
        if any(t.K != K for t in thetas):
            raise ConfigError("all calibrators in a grid must have the same number of classes")
        if not thetas[0].is_neutral:
            raise ConfigError(f"grid index 0 must be the neutral calibrator, got {thetas[0]}")
        for i, t in enumerate(thetas):
            for j in range(i):
                if t.same_as(thetas[j]):
                    raise ConfigError(f"calibrators {j} and {i} are shift-equivalent duplicates: {t}")
        self._thetas = thetas
        self._betas = np.array([t.beta for t in thetas], dtype=float)
        alphas = np.array([t.alpha for t in thetas], dtype=float)
        # exp of offsets shifted per row; the row shift cancels in normalisation
        self._exp_alphas = np.exp(alphas - alphas.max(axis=1, keepdims=True))

    @classmethod
    def neutral_only(cls, K: int) -> "ThetaGrid":
        return cls([ThetaParams.neutral(K)])

    @property
    def K(self) -> int:
        return self._thetas[0].K

    @property
    def thetas(self) -> Tuple[ThetaParams, ...]:
        return self._thetas

    def __len__(self) -> int:
        return len(self._thetas)

    def __iter__(self) -> Iterator[ThetaParams]:
        return iter(self._thetas)

    def __getitem__(self, index: int) -> ThetaParams:
        return self._thetas[index]

    def apply(self, p: ArrayLike) -> np.ndarray:
        """
        Apply every calibrator in the grid to p.

        :param p: Probability vector of length K (ProbVector or array).
        :return: Array of shape (len(grid), K); row i is cox_apply(p, grid[i]).
        """
        p = np.asarray(p, dtype=float)
        numer = np.power(p[np.newaxis, :], self._betas[:, np.newaxis]) * self._exp_alphas
        totals = numer.sum(axis=1, keepdims=True)
        assert np.all(totals > 0.0), "Cox numerators vanished for every class."
        return numer / totals

    def to_list(self) -> List[dict]:
        return [t.to_dict() for t in self._thetas]

    def __repr__(self) -> str:
        return f"ThetaGrid(K={self.K}, size={len(self)})"


# ****************************************        Function Declaration        **************************************** #
def cox_apply(p: ProbVector, theta: ThetaParams) -> ProbVector:
    """
    Apply one Cox calibrator to a probability vector.

    Zero entries stay zero (0 ** beta = 0 for beta > 0); every positive entry stays positive.

    :param p: Base prediction.
    :param theta: Calibrator parameters, with the same class count as p.
    :return: The calibrated prediction.
    """
    if not isinstance(p, ProbVector):
        p = ProbVector(p)
    if theta.K != p.K:
        raise ConfigError(f"calibrator has {theta.K} classes but the prediction has {p.K}")
    alpha = np.asarray(theta.alpha, dtype=float)
    numer = np.power(p.entries, theta.beta) * np.exp(alpha - alpha.max())
    total = numer.sum()
    assert total > 0.0, "Cox numerators vanished for every class."
    return ProbVector._trusted(numer / total)


# ****************************************        Function Declaration        **************************************** #
def build_default_grid(
    K: int,
    betas: Sequence[float] = DEFAULT_BETAS,
    alpha_magnitudes: Sequence[float] = DEFAULT_ALPHA_MAGNITUDES,
) -> ThetaGrid:
    """
    Build the calibrator grid: every beta crossed with the zero offset and the one-hot offsets +m*e_k and -m*e_k.

    Members are shift-canonicalised and deduplicated, and the neutral calibrator is moved to the front. With the
    defaults this gives 9, 21 and 63 calibrators for K = 2, 3 and 10.

    :param K: Number of classes.
    :param betas: Exponents; must contain 1.
    :param alpha_magnitudes: Magnitudes m of the one-hot offsets.
    :return: The grid.
    """
    if K < 2:
        raise ConfigError(f"K must be at least 2, got {K}")
    betas = [float(b) for b in betas]
    if not betas:
        raise ConfigError("betas must not be empty")
    if 1.0 not in betas:
        raise ConfigError(f"betas must contain 1 so the neutral calibrator exists, got {betas}")
    if any(not np.isfinite(b) or b <= 0.0 for b in betas):
        raise ConfigError(f"betas must be positive reals, got {betas}")

    offsets = [np.zeros(K)]
    for sign in (1.0, -1.0):
        for m in alpha_magnitudes:
            for k in range(K):
                offset = np.zeros(K)
                offset[k] = sign * float(m)
                offsets.append(offset)

    members: List[ThetaParams] = []
    for beta in betas:
        for offset in offsets:
            theta = ThetaParams(alpha=tuple(offset), beta=beta)
            if not any(theta.same_as(seen) for seen in members):
                members.append(theta)

    members.sort(key=lambda t: not t.is_neutral)
    logger.debug("built calibrator grid with %d members for K=%d", len(members), K)
    return ThetaGrid(members)


# ******************************************    Demo / Test Routine         ****************************************** #
if __name__ == "__main__":
    print("Cox calibrators for p = [0.8, 0.2]:")
    base = ProbVector([0.8, 0.2])
    for member in build_default_grid(2):
        print(f"  {member} -> {cox_apply(base, member).tolist()}")
