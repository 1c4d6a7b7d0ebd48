"""
Combining task and perceptual losses
====================================

Two composition rules are supported: a parameter-free product form
t + t*p, and a weighted sum lambda1*t + lambda2*p with tuned weights
per task.  The product form is the weighted sum at (1, t).
"""

import numpy as np

from poseforge import (
    DETECTION_LAMBDAS,
    FeatureTensor,
    LossWeights,
    TaskKind,
    combined_loss_1,
    combined_loss_2,
    detection_loss,
    perceptual_loss,
    pose_loss,
)

rng = np.random.default_rng(11)

# Task losses: pose uses mean squared error over heatmaps, detection
# sums its classification and regression parts.
pred = FeatureTensor(rng.normal(size=(17, 8, 8)))
gt = FeatureTensor(pred.data + 0.1)
print("pose loss at +0.1 offset:", round(pose_loss(pred, gt), 10))
print("detection loss:", detection_loss(1.5, 1.00000001))

# Perceptual loss averages per-layer MSE between feature stacks, with
# optional layer weights.
feats_a = [FeatureTensor(rng.normal(size=(4, 6, 6))) for _ in range(3)]
feats_b = [FeatureTensor(f.data + off) for f, off in zip(feats_a, (1.0, 2.0, 3.0))]
print("uniform layers:", perceptual_loss(feats_a, feats_b))
print("weighted [3, 1, 0]:", perceptual_loss(feats_a, feats_b, [3.0, 1.0, 0.0]))

# The product form amplifies the task loss by the perceptual term.
print("combined_1(1.5, 1.0):", combined_loss_1(1.5, 1.0))

# The weighted sum uses tuned lambdas; detection and pose differ.
print("tuned detection weights:", DETECTION_LAMBDAS)
w = LossWeights(*DETECTION_LAMBDAS, TaskKind.DETECTION)
print("combined_2(1.0, 1.0):", round(combined_loss_2(1.0, 1.0, w), 6))

# Setting the weights to (1, t) recovers the product form exactly.
for t, p in rng.uniform(0.0, 5.0, size=(5, 2)):
    ident = LossWeights(1.0, t, TaskKind.DETECTION)
    assert combined_loss_2(t, p, ident) == combined_loss_1(t, p)
print("identity combined_2(t, p; 1, t) == combined_1(t, p) holds")
