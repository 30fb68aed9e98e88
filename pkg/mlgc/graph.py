import logging
from pathlib import Path

import numpy as np

from mlgc.errors import DimensionError
from mlgc.models import Laplacian, Partition, SimilarityMatrix, WeightMatrix, WeightMode
from mlgc.schemas import Config

logger = logging.getLogger(__name__)

RESCALE_EPS = 1e-12


def rescale_similarity(s: SimilarityMatrix) -> SimilarityMatrix:
    """
    Stretch the off-diagonal entries linearly onto [0, 1]; the diagonal stays 1.

    Symmetrized similarities sit in a narrow band below sigma(bias), which the
    kernel would turn into near-uniform weights. A constant off-diagonal maps
    to all ones.
    """
    entries = np.array(s.entries, dtype=float)
    n = entries.shape[0]
    if n < 2:
        return SimilarityMatrix(entries)

    off = ~np.eye(n, dtype=bool)
    low, high = entries[off].min(), entries[off].max()
    if high - low > RESCALE_EPS:
        entries = (entries - low) / (high - low)
    else:
        entries = np.ones_like(entries)
    np.fill_diagonal(entries, 1.0)
    return SimilarityMatrix(np.clip(entries, 0.0, 1.0))


def edge_weights(s: SimilarityMatrix, cfg: Config) -> WeightMatrix:
    """
    dissimilarity: w = exp(-(1 - S) / (2 delta^2)), heavier edge for more similar pairs
    literal:       w = exp(-S / (2 delta^2))
    """
    scale = 2.0 * cfg.delta ** 2
    if cfg.weight_mode == WeightMode.LITERAL:
        w = np.exp(-s.entries / scale)
    else:
        w = np.exp(-(1.0 - s.entries) / scale)
    np.fill_diagonal(w, 0.0)
    return WeightMatrix(w)


def _one_hot(p: Partition) -> np.ndarray:
    h = np.zeros((p.n, p.k))
    h[np.arange(p.n), p.assign] = 1.0
    return h


def group_cut_weights(w: WeightMatrix, p: Partition) -> np.ndarray:
    """W(A_i, complement of A_i) for every group i."""
    if p.n != w.n:
        raise DimensionError(f"partition covers {p.n} vertices but the graph has {w.n}")
    h = _one_hot(p)
    incident = h.T @ w.entries.sum(axis=1)
    internal = np.einsum("mi,mn,ni->i", h, w.entries, h)
    return incident - internal


def cut_value(w: WeightMatrix, p: Partition) -> float:
    return float(0.5 * group_cut_weights(w, p).sum())


def ratio_cut_value(w: WeightMatrix, p: Partition) -> float:
    # Partition guarantees every |A_i| > 0
    return float(0.5 * (group_cut_weights(w, p) / p.sizes).sum())


def laplacian(w: WeightMatrix) -> Laplacian:
    """Unnormalized L = D - W."""
    degrees = w.entries.sum(axis=1)
    return Laplacian(np.diag(degrees) - w.entries)


def write_matrix(entries: np.ndarray, path) -> None:
    """Plain text, one row per line, space-separated full-precision decimals."""
    lines = (" ".join(repr(float(v)) for v in row) for row in np.atleast_2d(entries))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
