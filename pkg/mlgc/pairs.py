"""
Training-set construction: rank candidates by score, take the top and bottom
fractions, and label top-top pairs similar (1) and top-bottom pairs
dissimilar (0). Pairs never cross images.
"""
import logging
import math
from typing import List, Sequence

import numpy as np

from mlgc.errors import DimensionError, TrainingDataError
from mlgc.metric import pair_feature, phi_matrix
from mlgc.models import PairSample
from mlgc.schemas import CandidateSet, Config

logger = logging.getLogger(__name__)

# absorbs products like 0.1 * 30 landing a hair above an integer
_CEIL_SLACK = 1e-9


def _ceil_count(frac: float, n: int) -> int:
    return max(0, math.ceil(frac * n - _CEIL_SLACK))


def split_top_bottom(cset: CandidateSet, cfg: Config) -> tuple[List[int], List[int]]:
    """Top and bottom index lists, both in descending-score order."""
    n = cset.n
    order = sorted(range(n), key=lambda i: (-cset.candidates[i].score, i))

    n_top = min(_ceil_count(cfg.top_frac, n), n)
    n_bottom = min(_ceil_count(cfg.bottom_frac, n), n - n_top)

    top = order[:n_top]
    bottom = order[n - n_bottom:] if n_bottom else []
    return top, bottom


def image_pairs(cset: CandidateSet, cfg: Config) -> List[PairSample]:
    top, bottom = split_top_bottom(cset, cfg)
    phis = phi_matrix(cset)

    index_pairs = []
    for a in range(len(top)):
        for b in range(a + 1, len(top)):
            i, j = sorted((top[a], top[b]))
            index_pairs.append((i, j, 1))
    for i in top:
        for j in bottom:
            index_pairs.append((i, j, 0))
    index_pairs.sort()

    return [
        PairSample(
            feature=pair_feature(phis[i], phis[j]),
            label=label,
            image_id=cset.image_id,
            i=i,
            j=j,
        )
        for i, j, label in index_pairs
    ]


def build_training_pairs(sets: Sequence[CandidateSet], cfg: Config) -> List[PairSample]:
    samples: List[PairSample] = []
    for cset in sets:
        if cset.n < 2:
            logger.debug("skipping image %s with %d candidate(s)", cset.image_id, cset.n)
            continue
        samples.extend(image_pairs(cset, cfg))

    if not samples:
        raise TrainingDataError("no training pairs could be built from the candidate sets")

    positives = sum(s.label for s in samples)
    logger.info(
        "built %d training pairs (%d positive, %d negative) from %d image(s)",
        len(samples), positives, len(samples) - positives, len(sets),
    )
    return samples


def training_pool(sets: Sequence[CandidateSet]) -> np.ndarray | None:
    """Raw phi rows of every candidate; the standardization pool for train_metric."""
    blocks = [phi_matrix(s) for s in sets if s.n]
    if not blocks:
        return None
    widths = {b.shape[1] for b in blocks}
    if len(widths) > 1:
        raise DimensionError(f"candidate sets disagree on phi length: {sorted(widths)}")
    return np.vstack(blocks)
