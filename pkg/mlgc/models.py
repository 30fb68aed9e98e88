from dataclasses import dataclass, field
import enum

import numpy as np

from mlgc.errors import InvariantViolation


# ------------------------
# ENUMS
# ------------------------

class WeightMode(str, enum.Enum):
    DISSIMILARITY = "dissimilarity"
    LITERAL = "literal"


class Verdict(str, enum.Enum):
    FACE = "face"
    NONFACE = "nonface"


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


# ------------------------
# METRIC MODEL
# ------------------------

@dataclass(frozen=True)
class MetricModel:
    """
    Linear SVM over standardized pair features.
    `weights` and `bias` live in standardized space; callers pass raw phi.
    """

    weights: np.ndarray
    bias: float
    platt_scale: float = 1.0
    standardize_mean: np.ndarray | None = None
    standardize_std: np.ndarray | None = None

    def __post_init__(self):
        weights = _frozen_array(self.weights).reshape(-1)
        d = weights.shape[0]
        mean = np.zeros(d) if self.standardize_mean is None else self.standardize_mean
        std = np.ones(d) if self.standardize_std is None else self.standardize_std
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "standardize_mean", _frozen_array(mean).reshape(-1))
        object.__setattr__(self, "standardize_std", _frozen_array(std).reshape(-1))
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "platt_scale", float(self.platt_scale))

        if self.standardize_mean.shape[0] != d or self.standardize_std.shape[0] != d:
            raise InvariantViolation("standardization constants must match weights length")
        if not (np.all(np.isfinite(weights)) and np.isfinite(self.bias)):
            raise InvariantViolation("model weights must be finite")
        if self.platt_scale <= 0:
            raise InvariantViolation("platt_scale must be positive")
        if np.any(self.standardize_std <= 0):
            raise InvariantViolation("standardize_std entries must be positive")

    @property
    def feature_dim(self) -> int:
        return int(self.weights.shape[0])

    def standardize(self, phis: np.ndarray) -> np.ndarray:
        return (np.asarray(phis, dtype=float) - self.standardize_mean) / self.standardize_std

    def decision(self, pair_features: np.ndarray) -> np.ndarray:
        """Raw decision value on raw pair features (one row per pair)."""
        scaled = np.asarray(pair_features, dtype=float) / self.standardize_std
        return self.platt_scale * (scaled @ self.weights + self.bias)

    def predict(self, pair_features: np.ndarray) -> np.ndarray:
        return (self.decision(pair_features) >= 0).astype(int)


# ------------------------
# GRAPH MATRICES
# ------------------------

def _square(entries, name: str) -> np.ndarray:
    arr = _frozen_array(entries)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvariantViolation(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvariantViolation(f"{name} has non-finite entries")
    if not np.array_equal(arr, arr.T):
        raise InvariantViolation(f"{name} must be symmetric")
    return arr


@dataclass(frozen=True)
class SimilarityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        arr = _square(self.entries, "similarity matrix")
        if not np.all(np.diag(arr) == 1.0):
            raise InvariantViolation("similarity matrix must have unit diagonal")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise InvariantViolation("similarity entries must lie in [0, 1]")
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class WeightMatrix:
    entries: np.ndarray

    def __post_init__(self):
        arr = _square(self.entries, "weight matrix")
        if np.any(np.diag(arr) != 0.0):
            raise InvariantViolation("weight matrix must have zero diagonal")
        if np.any(arr < 0.0):
            raise InvariantViolation("edge weights must be non-negative")
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class Laplacian:
    entries: np.ndarray

    def __post_init__(self):
        arr = _square(self.entries, "laplacian")
        n = arr.shape[0]
        scale = max(1.0, float(np.abs(arr).max())) if n else 1.0
        if n and np.abs(arr.sum(axis=1)).max() > 1e-10 * n * scale:
            raise InvariantViolation("laplacian rows must sum to zero")
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class Partition:
    """Group assignment of n vertices; every group in [0, k) is nonempty."""

    k: int
    assign: np.ndarray

    def __post_init__(self):
        assign = _frozen_array(self.assign, dtype=int).reshape(-1)
        object.__setattr__(self, "assign", assign)
        if self.k < 1:
            raise InvariantViolation(f"partition needs k >= 1, got {self.k}")
        if assign.size and (assign.min() < 0 or assign.max() >= self.k):
            raise InvariantViolation(f"group ids must lie in [0, {self.k})")
        sizes = np.bincount(assign, minlength=self.k)
        if np.any(sizes == 0):
            empty = [int(g) for g in np.flatnonzero(sizes == 0)]
            raise InvariantViolation(f"empty groups {empty}")

    @property
    def n(self) -> int:
        return int(self.assign.shape[0])

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assign, minlength=self.k)

    def members(self, group: int) -> np.ndarray:
        return np.flatnonzero(self.assign == group)


@dataclass(frozen=True)
class Embedding:
    rows: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rows", _frozen_array(self.rows))
        object.__setattr__(self, "eigenvalues", _frozen_array(self.eigenvalues))

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def k(self) -> int:
        return self.rows.shape[1]


# ------------------------
# PAIRS / REFINE / EVAL
# ------------------------

@dataclass(frozen=True)
class PairSample:
    feature: np.ndarray
    label: int
    image_id: str
    i: int
    j: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise InvariantViolation(f"pair label must be 0 or 1, got {self.label}")
        if self.i == self.j:
            raise InvariantViolation("pair sample needs two distinct candidates")
        object.__setattr__(self, "feature", _frozen_array(self.feature))


@dataclass(frozen=True)
class GroupVerdict:
    group_id: int
    verdict: Verdict
    votes_for: int
    votes_against: int

    @property
    def size(self) -> int:
        return self.votes_for + self.votes_against


@dataclass(frozen=True)
class RefinedDetections:
    image_id: str
    kept: tuple = ()              # (candidate index, original score)
    group_verdicts: tuple = ()    # GroupVerdict per group
    eigenvalues: tuple = ()       # ascending Laplacian spectrum, for debug dumps

    @property
    def kept_indices(self) -> list[int]:
        return [i for i, _ in self.kept]


@dataclass(frozen=True)
class FlaggedDetection:
    score: float
    tp: bool


@dataclass(frozen=True)
class PRPoint:
    threshold: float
    recall: float
    precision: float


@dataclass(frozen=True)
class PRCurve:
    points: tuple = field(default_factory=tuple)
    ap: float = 0.0
