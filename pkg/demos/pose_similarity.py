"""
Measuring pose similarity with object keypoint similarity
=========================================================

OKS turns per-joint pixel distances into a score in [0, 1].  Each joint
has its own tolerance constant, distances are normalized by the object
area, and only joints labeled in the ground truth count.
"""

import numpy as np

from poseforge import BoundingBox, DEFAULT_OKS_PARAMS, iou, normalize_pose, oks

rng = np.random.default_rng(7)

# A ground-truth pose: 17 joints scattered over a 200x300 person.
xy = rng.uniform((100, 50), (300, 350), size=(17, 2))
flat = np.column_stack([xy, np.full(17, 2.0)]).ravel()
gt = normalize_pose(flat)
area = 200.0 * 300.0

# Scores come back as a tagged value; a perfect prediction is exactly 1.
print("perfect copy:", oks(gt, gt, area))

# Shift one joint and the score drops by a known amount: displacing
# joint j by k_j * sqrt(area) contributes exp(-1/2) for that joint.
k0 = DEFAULT_OKS_PARAMS.per_joint_k[0]
moved = flat.copy()
moved[0] += k0 * np.sqrt(area)
print("one joint at its tolerance:", oks(normalize_pose(moved), gt, area).value)
print("expected:", (16.0 + np.exp(-0.5)) / 17.0)

# The score ignores where the pose sits in the image.
both = np.column_stack([xy + (500.0, -120.0), np.full(17, 2.0)]).ravel()
shifted = flat.copy()
shifted[0::3] += 500.0
shifted[1::3] -= 120.0
print("translated pair:", oks(normalize_pose(shifted), normalize_pose(both), area).value)

# Growing the tolerance area makes the same pixel error more forgivable.
jittered = normalize_pose(flat + rng.normal(0.0, 4.0, size=51) * np.tile([1, 1, 0], 17))
print("jittered, tight area:", oks(jittered, gt, area).value)
print("jittered, loose area:", oks(jittered, gt, 4.0 * area).value)

# Boxes use plain intersection over union.
a = BoundingBox(0.0, 0.0, 100.0, 100.0)
b = BoundingBox(50.0, 0.0, 100.0, 100.0)
print("box iou:", iou(a, b).value)
