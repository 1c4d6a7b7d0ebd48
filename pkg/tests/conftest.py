"""Shared builders for randomized poses, instances, and fixture paths."""

from pathlib import Path

import numpy as np
import pytest

from poseforge import BoundingBox, PersonInstance, normalize_pose

FIXTURES = Path(__file__).parent / "fixtures"


def random_flat_pose(rng, center=(200.0, 200.0), spread=50.0, min_labeled=1,
                     all_labeled=False):
    """A canonical 51-number pose around ``center``."""
    if all_labeled:
        flags = rng.choice([1, 2], size=17)
    else:
        flags = rng.choice([0, 1, 2], size=17, p=[0.25, 0.15, 0.6])
        while int((flags > 0).sum()) < min_labeled:
            flags = rng.choice([0, 1, 2], size=17, p=[0.25, 0.15, 0.6])
    flat = []
    for v in flags:
        if v == 0:
            flat.extend([0.0, 0.0, 0.0])
        else:
            flat.extend([float(center[0] + rng.normal(0, spread)),
                         float(center[1] + rng.normal(0, spread)), float(v)])
    return flat


def make_instance(iid, image_id=1, flat=None, score=None, area=None, box=None):
    pose = normalize_pose(flat) if flat is not None else None
    if box is None:
        if pose is not None and pose.num_labeled:
            pts = pose.xy[pose.vis > 0]
            x0, y0 = pts.min(axis=0)
            w = max(float(pts[:, 0].max() - x0), 1.0)
            h = max(float(pts[:, 1].max() - y0), 1.0)
            box = BoundingBox(float(x0), float(y0), w, h)
        else:
            box = BoundingBox(0.0, 0.0, 10.0, 10.0)
    if area is None:
        area = box.area
    return PersonInstance(id=iid, image_id=image_id, box=box, area=area,
                          pose=pose, score=score)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
