"""Scalar geometric similarity: box IoU and object keypoint similarity (OKS).

OKS between a predicted and a ground-truth pose is the mean, over the
ground truth's labeled joints, of exp(-d_i^2 / (2 * area * k_i^2)) where
d_i is the Euclidean displacement of joint i and k_i is twice the
per-joint falloff constant sigma_i.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import BoundingBox, NUM_JOINTS, PoseAnnotation
from .errors import NoLabeledKeypoints, NonPositiveArea

# Standard per-joint falloff constants (sigma), nose through ankles.
COCO_SIGMAS = (
    0.026, 0.025, 0.025, 0.035, 0.035, 0.079, 0.079, 0.072, 0.072,
    0.062, 0.062, 0.107, 0.107, 0.087, 0.087, 0.089, 0.089,
)


class MetricKind(str, Enum):
    IOU = "iou"
    OKS = "oks"


@dataclass(frozen=True)
class SimilarityScore:
    value: float
    kind: MetricKind

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise ValueError(f"similarity must lie in [0, 1], got {self.value}")


@dataclass(frozen=True)
class OksParams:
    """Per-joint falloff constants k_i = 2 * sigma_i; only ground-truth
    labeling gates which joints contribute."""

    per_joint_k: tuple[float, ...] = tuple(2.0 * s for s in COCO_SIGMAS)

    def __post_init__(self):
        if len(self.per_joint_k) != NUM_JOINTS:
            raise ValueError(f"need {NUM_JOINTS} falloff constants, got {len(self.per_joint_k)}")
        if any(k <= 0 for k in self.per_joint_k):
            raise ValueError("falloff constants must be positive")

    @property
    def k_array(self) -> np.ndarray:
        return np.asarray(self.per_joint_k, dtype=np.float64)


DEFAULT_OKS_PARAMS = OksParams()


def iou(a: BoundingBox, b: BoundingBox) -> SimilarityScore:
    """Intersection over union of two boxes; 0 when the union is empty."""
    ix = max(0.0, min(a.x + a.w, b.x + b.w) - max(a.x, b.x))
    iy = max(0.0, min(a.y + a.h, b.y + b.h) - max(a.y, b.y))
    inter = ix * iy
    union = a.area + b.area - inter
    # clamp: rounding can push inter a hair past union for coincident boxes
    value = min(1.0, inter / union) if union > 0 else 0.0
    return SimilarityScore(value, MetricKind.IOU)


def oks(pred: PoseAnnotation, gt: PoseAnnotation, gt_area: float,
        params: OksParams = DEFAULT_OKS_PARAMS) -> SimilarityScore:
    """Object keypoint similarity of a predicted pose against a ground truth.

    Only joints labeled in the ground truth contribute; the prediction's
    visibility flags are ignored. ``gt_area`` sets the scale.
    """
    if gt_area <= 0:
        raise NonPositiveArea(f"ground-truth area must be positive, got {gt_area}")
    labeled = gt.vis > 0
    n = int(labeled.sum())
    if n == 0:
        raise NoLabeledKeypoints("ground-truth pose has no labeled keypoints")
    d2 = ((pred.xy[labeled] - gt.xy[labeled]) ** 2).sum(axis=1)
    k2 = params.k_array[labeled] ** 2
    terms = np.exp(-d2 / (2.0 * gt_area * k2))
    return SimilarityScore(float(terms.mean()), MetricKind.OKS)
