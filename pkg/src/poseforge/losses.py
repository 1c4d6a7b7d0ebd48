"""Task and combined training losses as plain scalar functions.

Two combination flavours over a task loss L_T and a perceptual
consistency term L_p:

    comb1 = L_T + L_T * L_p          (adaptive weighting)
    comb2 = lambda1 * L_T + lambda2 * L_p

comb2 with lambda1 = 1 and lambda2 = L_T reduces exactly to comb1.
No network forward passes happen here; callers supply the tensors and
head outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .adain import FeatureTensor
from .errors import LengthMismatch, NegativeComponent, NegativeInput, ShapeMismatch

# Weights found by hyperparameter search for the comb2 flavour.
DETECTION_LAMBDAS = (0.43, 0.92)
POSE_LAMBDAS = (0.47, 0.018)


class TaskKind(str, Enum):
    DETECTION = "detection"
    POSE = "pose"


@dataclass(frozen=True)
class LossWeights:
    lambda1: float
    lambda2: float
    task: TaskKind

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise NegativeInput("loss weights must be non-negative")
        if self.lambda1 == 0 and self.lambda2 == 0:
            raise NegativeInput("at least one loss weight must be positive")

    @classmethod
    def tuned(cls, task: TaskKind) -> "LossWeights":
        """The searched optima: (0.43, 0.92) detection, (0.47, 0.018) pose."""
        l1, l2 = DETECTION_LAMBDAS if task == TaskKind.DETECTION else POSE_LAMBDAS
        return cls(l1, l2, task)


def pose_loss(pred_heatmaps: FeatureTensor, gt_heatmaps: FeatureTensor) -> float:
    """Mean squared error over all heatmap elements."""
    if pred_heatmaps.shape != gt_heatmaps.shape:
        raise ShapeMismatch(f"{pred_heatmaps.shape} vs {gt_heatmaps.shape}")
    diff = pred_heatmaps.data - gt_heatmaps.data
    return float(np.mean(diff * diff))


def detection_loss(cls_loss: float, reg_loss: float) -> float:
    """Sum of the classification and box-regression components."""
    if cls_loss < 0 or reg_loss < 0:
        raise NegativeComponent(f"components must be non-negative, got ({cls_loss}, {reg_loss})")
    return cls_loss + reg_loss


def perceptual_loss(feats_a: Sequence[FeatureTensor], feats_b: Sequence[FeatureTensor],
                    layer_weights: Optional[Sequence[float]] = None) -> float:
    """Weighted mean over layers of the per-layer feature MSE.

    Weights default to uniform.
    """
    if len(feats_a) != len(feats_b):
        raise LengthMismatch(f"{len(feats_a)} layers vs {len(feats_b)}")
    if len(feats_a) == 0:
        raise LengthMismatch("need at least one feature layer")
    if layer_weights is None:
        weights = np.ones(len(feats_a))
    else:
        if len(layer_weights) != len(feats_a):
            raise LengthMismatch(f"{len(layer_weights)} weights for {len(feats_a)} layers")
        weights = np.asarray(layer_weights, dtype=np.float64)
        if (weights < 0).any() or weights.sum() <= 0:
            raise NegativeInput("layer weights must be non-negative with positive sum")
    per_layer = np.array([pose_loss(a, b) for a, b in zip(feats_a, feats_b)])
    return float((weights * per_layer).sum() / weights.sum())


def combined_loss_1(task_loss: float, perceptual: float) -> float:
    """task + task * perceptual: penalty scales with the task loss itself."""
    if task_loss < 0 or perceptual < 0:
        raise NegativeInput(f"inputs must be non-negative, got ({task_loss}, {perceptual})")
    return task_loss + task_loss * perceptual


def combined_loss_2(task_loss: float, perceptual: float, weights: LossWeights) -> float:
    """lambda1 * task + lambda2 * perceptual."""
    if task_loss < 0 or perceptual < 0:
        raise NegativeInput(f"inputs must be non-negative, got ({task_loss}, {perceptual})")
    return weights.lambda1 * task_loss + weights.lambda2 * perceptual
