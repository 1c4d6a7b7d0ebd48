"""
Scoring a detector with AP and AR
=================================

The evaluation protocol matches predictions to ground truth greedily at
ten similarity thresholds, accumulates a precision/recall curve over all
images, and reports 101-point interpolated AP plus final recall.
"""

import numpy as np

from poseforge import BoundingBox, MatchConfig, PersonInstance, evaluate, normalize_pose

rng = np.random.default_rng(21)


def person(pid, image_id, flat, score=None):
    xy = flat.reshape(17, 3)[:, :2]
    x0, y0 = xy.min(axis=0)
    w, h = xy.max(axis=0) - xy.min(axis=0)
    box = BoundingBox(x0, y0, w, h)
    return PersonInstance(pid, image_id, box, area=1e4, pose=normalize_pose(flat), score=score)


# Three images, two people each.  Predictions re-use the ground-truth
# joints with a few pixels of jitter, plus one spurious low-confidence
# detection per image.
gts, preds = {}, {}
for img in range(3):
    gts[img], preds[img] = [], []
    for i, center in enumerate([(150.0, 200.0), (420.0, 210.0)]):
        xy = center + rng.uniform(-40, 40, size=(17, 2))
        flat = np.column_stack([xy, np.full(17, 2.0)]).ravel()
        gts[img].append(person(2 * img + i, img, flat))
        jitter = rng.normal(0.0, 3.0, size=51) * np.tile([1.0, 1.0, 0.0], 17)
        preds[img].append(person(100 + 3 * img + i, img, flat + jitter, score=0.9 - 0.1 * i))
    junk = np.column_stack([rng.uniform(0, 60, size=(17, 2)), np.full(17, 2.0)]).ravel()
    preds[img].append(person(900 + img, img, junk, score=0.05))

report = evaluate(preds, gts, MatchConfig())
print(report.to_text())

# AP can only fall as the threshold gets stricter.
aps = [t.ap for t in report.per_threshold]
print("ap monotone non-increasing:", all(a >= b for a, b in zip(aps, aps[1:])))

# Capping detections per image keeps only the highest-scoring ones, so a
# cap of 1 forfeits the second person in every image and recall halves.
capped = evaluate(preds, gts, MatchConfig(max_detections=1))
print(f"mAR all detections: {report.mean_ar:.4f}   capped at 1: {capped.mean_ar:.4f}")
