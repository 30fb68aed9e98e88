from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from mlgc.models import Verdict, WeightMode


class FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)


# ------------------------
# CANDIDATES
# ------------------------

class Box(FrozenModel):
    x: float
    y: float
    w: float = Field(gt=0)
    h: float = Field(gt=0)

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center(self) -> Tuple[float, float]:
        return self.x + self.w / 2.0, self.y + self.h / 2.0


class Candidate(FrozenModel):
    box: Box
    score: float = Field(ge=0.0, le=1.0)
    features: Tuple[float, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def lift_flat_box(cls, data):
        # file records carry x/y/w/h flat next to score
        if isinstance(data, dict) and "box" not in data and "x" in data:
            data = dict(data)
            data["box"] = {k: data.pop(k) for k in ("x", "y", "w", "h") if k in data}
        return data

    def to_record(self) -> dict:
        return {
            "x": self.box.x,
            "y": self.box.y,
            "w": self.box.w,
            "h": self.box.h,
            "score": self.score,
            "features": list(self.features),
        }


class CandidateSet(FrozenModel):
    image_id: str
    image_w: float = Field(gt=0)
    image_h: float = Field(gt=0)
    candidates: Tuple[Candidate, ...] = ()

    @model_validator(mode="after")
    def check_feature_length(self):
        lengths = {len(c.features) for c in self.candidates}
        if len(lengths) > 1:
            raise ValueError(
                f"inconsistent feature lengths {sorted(lengths)} in image {self.image_id}"
            )
        return self

    @property
    def n(self) -> int:
        return len(self.candidates)

    @property
    def d_deep(self) -> int:
        return len(self.candidates[0].features) if self.candidates else 0

    @property
    def scores(self) -> List[float]:
        return [c.score for c in self.candidates]

    def to_record(self) -> dict:
        return {
            "image_id": self.image_id,
            "image_w": self.image_w,
            "image_h": self.image_h,
            "candidates": [c.to_record() for c in self.candidates],
        }


class GroundTruth(FrozenModel):
    image_id: str
    boxes: Tuple[Box, ...] = ()


class ImageLabels(FrozenModel):
    image_id: str
    labels: Tuple[int, ...] = ()

    @model_validator(mode="after")
    def check_binary(self):
        if any(label not in (0, 1) for label in self.labels):
            raise ValueError("labels must be 0 or 1")
        return self


# ------------------------
# CONFIG
# ------------------------

class Config(FrozenModel):
    top_frac: float = Field(default=0.10, ge=0.0, le=1.0)
    bottom_frac: float = Field(default=0.10, ge=0.0, le=1.0)
    # kernel width, measured on the rescaled [0, 1] similarity range
    delta: float = Field(default=0.25, gt=0)
    weight_mode: WeightMode = WeightMode.DISSIMILARITY
    rescale_similarity: bool = True
    k_max: int = Field(default=10, ge=1)
    vote_threshold: float = Field(default=0.5, ge=0.0, le=1.0)
    iou_threshold: float = Field(default=0.5, ge=0.0, le=1.0)
    rng_seed: int = Field(default=0, ge=0)
    svm_c: float = Field(default=1.0, gt=0)
    svm_max_epochs: int = Field(default=200, ge=1)
    svm_tol: float = Field(default=1e-6, ge=0)

    @model_validator(mode="after")
    def check_fractions(self):
        if self.top_frac + self.bottom_frac > 1.0:
            raise ValueError("top_frac + bottom_frac must not exceed 1")
        return self


class GenSpec(FrozenModel):
    n_images: int = Field(default=20, ge=0)
    faces_per_image: int = Field(default=15, ge=0)
    bg_per_image: int = Field(default=25, ge=0)
    cluster_spread: float = Field(default=0.05, ge=0)
    feature_noise: float = Field(default=0.1, ge=0)
    score_overlap: float = Field(default=0.3, ge=0.0, le=1.0)
    d_deep: int = Field(default=16, ge=0)
    seed: int = Field(default=0, ge=0)
    score_threshold: float = Field(default=0.5, ge=0.0, le=1.0)


# ------------------------
# MODEL FILE
# ------------------------

class MetricModelRecord(FrozenModel):
    weights: List[float]
    bias: float
    platt_scale: float = Field(gt=0)
    feature_dim: int = Field(ge=0)
    standardize_mean: List[float]
    standardize_std: List[float]

    @model_validator(mode="after")
    def check_lengths(self):
        for name in ("weights", "standardize_mean", "standardize_std"):
            if len(getattr(self, name)) != self.feature_dim:
                raise ValueError(f"{name} length must equal feature_dim={self.feature_dim}")
        if any(s <= 0 for s in self.standardize_std):
            raise ValueError("standardize_std entries must be positive")
        return self


class PairRecord(FrozenModel):
    feature: List[float]
    label: int = Field(ge=0, le=1)
    image_id: str
    i: int
    j: int


# ------------------------
# REFINE OUTPUT
# ------------------------

class DetectionRecord(FrozenModel):
    x: float
    y: float
    w: float = Field(gt=0)
    h: float = Field(gt=0)
    score: float = Field(ge=0.0, le=1.0)

    @property
    def box(self) -> Box:
        return Box(x=self.x, y=self.y, w=self.w, h=self.h)


class GroupRecord(FrozenModel):
    id: int
    verdict: Verdict
    size: int = Field(ge=1)


class DetectionsRecord(FrozenModel):
    image_id: str
    detections: List[DetectionRecord] = []
    groups: List[GroupRecord] = []


# ------------------------
# EVAL REPORT
# ------------------------

class Report(FrozenModel):
    ap_baseline: float
    ap_refined: float
    delta: float
    n_images: int
    n_gt: int
    pair_ap: Optional[float] = None


