"""
Per-candidate cue vector phi(x) and the learned pairwise similarity.

phi layout: [cx / image_w, cy / image_h, log(w * h), log(w / h), score, deep...]
"""
import logging
from typing import Iterable, Sequence

import numpy as np

from mlgc.errors import DimensionError, TrainingError, TrainingDataError
from mlgc.models import MetricModel, PairSample, SimilarityMatrix
from mlgc.schemas import Candidate, CandidateSet, Config

logger = logging.getLogger(__name__)

N_GEOMETRY = 5
MIN_STD = 1e-12


def phi(c: Candidate, image_w: float, image_h: float) -> np.ndarray:
    cx, cy = c.box.center
    head = [
        cx / image_w,
        cy / image_h,
        np.log(c.box.w * c.box.h),
        np.log(c.box.w / c.box.h),
        c.score,
    ]
    return np.array(head + list(c.features), dtype=float)


def phi_matrix(cset: CandidateSet) -> np.ndarray:
    """One phi row per candidate, in candidate order."""
    if cset.n == 0:
        return np.zeros((0, N_GEOMETRY + cset.d_deep))
    return np.vstack([phi(c, cset.image_w, cset.image_h) for c in cset.candidates])


def pair_feature(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"pair feature needs equal lengths, got {a.shape[0]} and {b.shape[0]}")
    return a - b


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500.0, 500.0)))


# ------------------------
# TRAINING
# ------------------------

def _unpack(train_pairs) -> tuple[np.ndarray, np.ndarray]:
    features, labels = [], []
    for item in train_pairs:
        if isinstance(item, PairSample):
            vec, label = item.feature, item.label
        else:
            vec, label = item
        features.append(np.asarray(vec, dtype=float))
        labels.append(int(label))

    if not features:
        raise TrainingDataError("no training pairs")
    dims = {f.shape[0] for f in features}
    if len(dims) > 1:
        raise DimensionError(f"training pairs have mixed dimensions {sorted(dims)}")
    return np.vstack(features), np.array(labels, dtype=int)


def _objective(w: np.ndarray, xb: np.ndarray, y: np.ndarray, lam: float) -> float:
    hinge = np.maximum(0.0, 1.0 - y * (xb @ w))
    return 0.5 * lam * float(w @ w) + float(hinge.mean())


def train_metric(
    train_pairs: Iterable,
    cfg: Config,
    pool: np.ndarray | None = None,
) -> MetricModel:
    """
    Fit a linear SVM (hinge loss, L2 weight 1/(C n)) on labeled pair features by
    epochs of stochastic subgradient steps over a seeded shuffle.

    `train_pairs` holds PairSample objects or (vector, label) tuples. `pool` is
    the raw phi matrix the standardization constants come from; without it the
    mean is zero and the std is taken from the pair features themselves.
    """
    x, labels = _unpack(train_pairs)
    n, d = x.shape

    if np.any((labels != 0) & (labels != 1)):
        raise TrainingError("pair labels must be 0 or 1")
    if labels.min() == labels.max():
        raise TrainingError(f"training pairs hold a single class (label {labels[0]})")
    if not np.all(np.isfinite(x)):
        raise TrainingError("training pairs contain non-finite values")

    if pool is not None:
        pool = np.asarray(pool, dtype=float)
        if pool.ndim != 2 or pool.shape[1] != d:
            raise DimensionError(f"standardization pool must have {d} columns")
        mean, std = pool.mean(axis=0), pool.std(axis=0)
    else:
        mean, std = np.zeros(d), x.std(axis=0)
    std = np.where(std > MIN_STD, std, 1.0)

    # bias folded in as a constant unit feature
    xb = np.hstack([x / std, np.ones((n, 1))])
    y = 2.0 * labels - 1.0
    lam = 1.0 / (cfg.svm_c * n)

    w = np.zeros(d + 1)
    rng = np.random.default_rng(cfg.rng_seed)
    previous = _objective(w, xb, y, lam)
    current = previous

    # per-sample subgradient steps with eta_t = 1 / (lam * t)
    t = 0
    epoch = 0
    for epoch in range(1, cfg.svm_max_epochs + 1):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            violated = y[i] * float(xb[i] @ w) < 1.0
            w *= 1.0 - eta * lam
            if violated:
                w += (eta * y[i]) * xb[i]

        current = _objective(w, xb, y, lam)
        if abs(previous - current) < cfg.svm_tol:
            break
        previous = current
    else:
        logger.info("svm stopped at max epochs (%d)", cfg.svm_max_epochs)

    model = MetricModel(
        weights=w[:d],
        bias=w[d],
        platt_scale=1.0,
        standardize_mean=mean,
        standardize_std=std,
    )
    accuracy = float((model.predict(x) == labels).mean())
    logger.info(
        "trained metric on %d pairs (%d positive) in %d epoch(s), objective %.6g, accuracy %.3f",
        n, int(labels.sum()), epoch, current, accuracy,
    )
    return model


# ------------------------
# SIMILARITY
# ------------------------

def _check_dim(model: MetricModel, length: int) -> None:
    if length != model.feature_dim:
        raise DimensionError(
            f"phi has {length} dimensions but the model expects {model.feature_dim}"
        )


def similarity(model: MetricModel, a: np.ndarray, b: np.ndarray) -> float:
    """
    s = (sigma(g(a - b)) + sigma(g(b - a))) / 2, hence s(a, b) == s(b, a) exactly.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_dim(model, a.shape[0])
    _check_dim(model, b.shape[0])

    t = float(model.weights @ (model.standardize(a) - model.standardize(b)))
    forward = sigmoid(model.platt_scale * (t + model.bias))
    backward = sigmoid(model.platt_scale * ((-t) + model.bias))
    return float(0.5 * (forward + backward))


def similarity_matrix(model: MetricModel, phis: Sequence[np.ndarray]) -> SimilarityMatrix:
    phis = np.atleast_2d(np.asarray(phis, dtype=float))
    if phis.shape[0] == 0:
        raise DimensionError("similarity matrix needs at least one candidate")
    _check_dim(model, phis.shape[1])

    proj = model.standardize(phis) @ model.weights
    t = proj[:, None] - proj[None, :]
    forward = sigmoid(model.platt_scale * (t + model.bias))
    s = 0.5 * (forward + forward.T)
    np.fill_diagonal(s, 1.0)
    return SimilarityMatrix(s)
