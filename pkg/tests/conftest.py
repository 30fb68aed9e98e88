import numpy as np
import pytest

from mlgc.models import MetricModel, Partition, WeightMatrix
from mlgc.schemas import Box, Candidate, CandidateSet


@pytest.fixture
def make_cset():
    """Build a CandidateSet from (x, y, w, h, score[, features]) tuples."""

    def _make(rows, image_id="img", image_w=100.0, image_h=100.0):
        candidates = []
        for row in rows:
            x, y, w, h, score = row[:5]
            features = tuple(row[5]) if len(row) > 5 else ()
            candidates.append(Candidate(box=Box(x=x, y=y, w=w, h=h), score=score, features=features))
        return CandidateSet(image_id=image_id, image_w=image_w, image_h=image_h, candidates=tuple(candidates))

    return _make


@pytest.fixture
def scored_cset(make_cset):
    """n candidates with distinct descending scores and 2 deep features."""

    def _make(n, image_id="img", seed=0):
        rng = np.random.default_rng(seed)
        scores = np.linspace(0.99, 0.01, n) if n > 1 else [0.5]
        rows = [
            (float(rng.uniform(0, 80)), float(rng.uniform(0, 80)), float(rng.uniform(5, 20)),
             float(rng.uniform(5, 20)), float(s), rng.standard_normal(2).tolist())
            for s in scores
        ]
        return make_cset(rows, image_id=image_id)

    return _make


@pytest.fixture
def random_weights():
    def _make(n, rng):
        w = rng.uniform(0, 1, size=(n, n))
        w = np.triu(w, 1)
        return WeightMatrix(w + w.T)

    return _make


@pytest.fixture
def random_partition():
    def _make(n, k, rng):
        # every group gets at least one vertex
        assign = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
        return Partition(k=k, assign=rng.permutation(assign))

    return _make


@pytest.fixture
def planted_weights():
    """Block-structured W: `within` inside blocks, `across` between, small seeded noise."""

    def _make(sizes, within, across, rng, noise=0.01):
        labels = np.repeat(np.arange(len(sizes)), sizes)
        same = labels[:, None] == labels[None, :]
        w = np.where(same, within, across) + rng.uniform(-noise, noise, size=same.shape)
        w = np.clip(np.triu(w, 1), 0.0, 1.0)
        return WeightMatrix(w + w.T), labels

    return _make


@pytest.fixture
def unit_model():
    def _make(weights, bias=0.0, platt_scale=1.0):
        return MetricModel(weights=np.asarray(weights, dtype=float), bias=bias, platt_scale=platt_scale)

    return _make
