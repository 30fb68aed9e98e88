"""
Ratio-cut relaxation: the eigenvectors of the k smallest Laplacian eigenvalues
embed the candidates, and k-means on that embedding gives the partition.
"""
import logging
import math

import numpy as np

from mlgc.errors import NumericError, ParameterError
from mlgc.models import Embedding, Laplacian, Partition
from mlgc.schemas import Config

logger = logging.getLogger(__name__)

JACOBI_RTOL = 1e-12
JACOBI_MAX_SWEEPS = 100
KMEANS_MAX_ITER = 100
SIGN_EPS = 1e-10
GAP_EPS = 1e-12


# ------------------------
# EIGENSOLVER
# ------------------------

def _off_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    apq = a[p, q]
    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
    if abs(theta) > 1e150:
        t = 0.5 / theta
    else:
        t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c

    # columns p, q go through [[c, s], [-s, c]], rows through its transpose
    pq = [p, q]
    rot = np.array([[c, s], [-s, c]])
    a[:, pq] = a[:, pq] @ rot
    a[pq, :] = rot.T @ a[pq, :]
    a[p, q] = a[q, p] = 0.0
    v[:, pq] = v[:, pq] @ rot


def eigh(matrix) -> tuple[np.ndarray, np.ndarray]:
    """
    Symmetric eigendecomposition by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, eigenvectors as columns). Each eigenvector's
    first nonzero component is positive. A sweep costs O(n^3) with n^2/2 Python
    level rotations, so a few hundred candidates take seconds and a few
    thousand take minutes per image.
    """
    a = np.array(matrix.entries if isinstance(matrix, Laplacian) else matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError(f"eigh needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError("matrix has non-finite entries")

    n = a.shape[0]
    v = np.eye(n)
    tol = JACOBI_RTOL * float(np.linalg.norm(a))

    for sweep in range(JACOBI_MAX_SWEEPS):
        if _off_norm(a) <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] != 0.0:
                    _rotate(a, v, p, q)
    else:
        if _off_norm(a) > tol:
            raise NumericError(f"jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")

    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    values, v = values[order], v[:, order]

    for col in range(n):
        nonzero = np.flatnonzero(np.abs(v[:, col]) > SIGN_EPS)
        if nonzero.size and v[nonzero[0], col] < 0:
            v[:, col] = -v[:, col]
    return values, v


def embed(lap: Laplacian, k: int, decomposition=None) -> Embedding:
    if not 1 <= k <= lap.n:
        raise ParameterError(f"embedding size k={k} must lie in [1, {lap.n}]")
    values, vectors = decomposition if decomposition is not None else eigh(lap)
    return Embedding(rows=vectors[:, :k], eigenvalues=values[:k])


# ------------------------
# K-MEANS
# ------------------------

def relabel(assign: np.ndarray) -> np.ndarray:
    """Renumber group ids in order of first appearance."""
    mapping: dict[int, int] = {}
    out = np.empty(len(assign), dtype=int)
    for idx, g in enumerate(assign):
        out[idx] = mapping.setdefault(int(g), len(mapping))
    return out


def _sq_dist(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def _plus_plus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = _sq_dist(points, points[chosen]).min(axis=1)

    while len(chosen) < k:
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            # every remaining point duplicates a chosen one
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(rest))
        chosen.append(nxt)
        d2 = np.minimum(d2, _sq_dist(points, points[[nxt]])[:, 0])
    return points[chosen].copy()


def _reseed_empty(assign: np.ndarray, d2: np.ndarray, points: np.ndarray, centers: np.ndarray, k: int) -> np.ndarray:
    """Give every empty cluster the point farthest from its own centroid."""
    assign = assign.copy()
    sizes = np.bincount(assign, minlength=k)
    own = d2[np.arange(len(assign)), assign].copy()
    for j in np.flatnonzero(sizes == 0):
        movable = np.where(sizes[assign] > 1, own, -np.inf)
        pt = int(np.argmax(movable))
        sizes[assign[pt]] -= 1
        assign[pt] = j
        sizes[j] += 1
        own[pt] = -np.inf
        centers[j] = points[pt]
    return assign


def kmeans(rows, k: int, seed: int) -> Partition:
    points = np.atleast_2d(np.asarray(rows, dtype=float))
    n = points.shape[0]
    if k < 1 or n < k:
        raise ParameterError(f"k-means needs 1 <= k <= n, got k={k}, n={n}")

    rng = np.random.default_rng(seed)
    centers = _plus_plus(points, k, rng)
    assign = None

    for _ in range(KMEANS_MAX_ITER):
        d2 = _sq_dist(points, centers)
        updated = _reseed_empty(d2.argmin(axis=1), d2, points, centers, k)
        if assign is not None and np.array_equal(updated, assign):
            break
        assign = updated
        centers = np.vstack([points[assign == j].mean(axis=0) for j in range(k)])

    return Partition(k=k, assign=relabel(assign))


# ------------------------
# MODEL ORDER
# ------------------------

def choose_k(eigenvalues, k_max: int) -> int:
    """Eigengap: the i in [1, min(k_max, n)) with the largest lambda_{i+1} - lambda_i."""
    values = np.asarray(eigenvalues, dtype=float)
    upper = min(k_max, values.shape[0])
    best_k, best_gap = 1, -np.inf
    for i in range(1, upper):
        gap = values[i] - values[i - 1]
        if gap > best_gap + GAP_EPS:
            best_k, best_gap = i, gap
    return best_k


def cluster_with_spectrum(lap: Laplacian, cfg: Config) -> tuple[Partition, np.ndarray]:
    if lap.n == 0:
        raise ParameterError("cannot cluster an empty graph")
    if lap.n == 1:
        return Partition(k=1, assign=[0]), np.zeros(1)

    values, vectors = eigh(lap)
    k = choose_k(values, cfg.k_max)
    embedding = embed(lap, k, decomposition=(values, vectors))
    partition = kmeans(embedding.rows, k, cfg.rng_seed)
    logger.debug("n=%d k=%d lambda[:k+1]=%s", lap.n, k, values[: k + 1])
    return partition, values


def spectral_cluster(lap: Laplacian, cfg: Config) -> Partition:
    return cluster_with_spectrum(lap, cfg)[0]
