"""Domain types shared by every module: poses, boxes, persons, images.

Keypoints follow the standard 17-joint person layout used by keypoint
annotation tooling; the flat wire encoding is 51 numbers, three
(x, y, visibility) per joint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InvalidVisibilityFlag, NonFiniteValue, WrongLength

NUM_JOINTS = 17
FLAT_POSE_LENGTH = 3 * NUM_JOINTS

KEYPOINT_NAMES = (
    "nose", "left_eye", "right_eye", "left_ear", "right_ear",
    "left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
    "left_wrist", "right_wrist", "left_hip", "right_hip",
    "left_knee", "right_knee", "left_ankle", "right_ankle",
)

# 1-indexed joint pairs of the standard person skeleton.
SKELETON_EDGES = (
    (16, 14), (14, 12), (17, 15), (15, 13), (12, 13), (6, 12), (7, 13),
    (6, 7), (6, 8), (7, 9), (8, 10), (9, 11), (2, 3), (1, 2), (1, 3),
    (2, 4), (3, 5), (4, 6), (5, 7),
)

PersonId = Union[int, str]
ImageId = Union[int, str]


class Visibility(IntEnum):
    NOT_LABELED = 0
    LABELED_HIDDEN = 1
    LABELED_VISIBLE = 2


@dataclass(frozen=True)
class Keypoint:
    """One joint location. Unlabeled joints are canonicalized to the origin."""

    x: float
    y: float
    visibility: Visibility

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise NonFiniteValue(f"keypoint coordinates must be finite, got ({self.x}, {self.y})")
        if self.visibility == Visibility.NOT_LABELED and (self.x != 0.0 or self.y != 0.0):
            object.__setattr__(self, "x", 0.0)
            object.__setattr__(self, "y", 0.0)

    @property
    def labeled(self) -> bool:
        return self.visibility != Visibility.NOT_LABELED


@dataclass(frozen=True)
class PoseAnnotation:
    """A fixed set of 17 keypoints in the standard joint order."""

    keypoints: tuple[Keypoint, ...]

    def __post_init__(self):
        if len(self.keypoints) != NUM_JOINTS:
            raise WrongLength(f"pose needs exactly {NUM_JOINTS} keypoints, got {len(self.keypoints)}")

    @property
    def num_labeled(self) -> int:
        return sum(1 for k in self.keypoints if k.labeled)

    @cached_property
    def xy(self) -> np.ndarray:
        """(17, 2) float64 coordinate array; read-only."""
        a = np.array([(k.x, k.y) for k in self.keypoints], dtype=np.float64)
        a.flags.writeable = False
        return a

    @cached_property
    def vis(self) -> np.ndarray:
        """(17,) int visibility flags; read-only."""
        a = np.array([int(k.visibility) for k in self.keypoints], dtype=np.int64)
        a.flags.writeable = False
        return a

    def to_flat(self) -> tuple[float, ...]:
        """Flat 51-number triplet encoding (x, y, v per joint)."""
        out: list[float] = []
        for k in self.keypoints:
            out.extend((k.x, k.y, float(int(k.visibility))))
        return tuple(out)


def normalize_pose(raw: Sequence[float]) -> PoseAnnotation:
    """Canonicalize a flat 51-number triplet sequence into a PoseAnnotation.

    Unlabeled joints (v = 0) have their coordinates forced to zero so that
    pose equality is well defined.
    """
    if len(raw) != FLAT_POSE_LENGTH:
        raise WrongLength(f"expected {FLAT_POSE_LENGTH} values, got {len(raw)}")
    kps = []
    for j in range(NUM_JOINTS):
        x, y, v = raw[3 * j], raw[3 * j + 1], raw[3 * j + 2]
        for val in (x, y, v):
            if not math.isfinite(val):
                raise NonFiniteValue(f"joint {j}: non-finite value {val}")
        if v not in (0, 1, 2):
            raise InvalidVisibilityFlag(f"joint {j}: visibility must be 0, 1 or 2, got {v}")
        vis = Visibility(int(v))
        if vis == Visibility.NOT_LABELED:
            kps.append(Keypoint(0.0, 0.0, vis))
        else:
            kps.append(Keypoint(float(x), float(y), vis))
    return PoseAnnotation(tuple(kps))


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box, (x, y) top-left corner, in pixels."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        for val in (self.x, self.y, self.w, self.h):
            if not math.isfinite(val):
                raise NonFiniteValue(f"box values must be finite, got {(self.x, self.y, self.w, self.h)}")
        if self.w < 0 or self.h < 0:
            raise ValueError(f"box extent must be non-negative, got w={self.w}, h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_xywh(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


@dataclass(frozen=True)
class PersonInstance:
    """One annotated or predicted person.

    Ground-truth instances carry no score; predictions must have one.
    ``area`` is the segment area when known, otherwise the box area.
    """

    id: PersonId
    image_id: ImageId
    box: BoundingBox
    area: float
    pose: Optional[PoseAnnotation] = None
    score: Optional[float] = None

    def __post_init__(self):
        if not math.isfinite(self.area):
            raise NonFiniteValue(f"instance {self.id!r}: area must be finite")
        if self.score is not None and not (0.0 <= self.score <= 1.0):
            raise ValueError(f"instance {self.id!r}: score must lie in [0, 1], got {self.score}")

    @property
    def is_prediction(self) -> bool:
        return self.score is not None


@dataclass(frozen=True)
class ImageRecord:
    """Image header plus optional collection labels."""

    image_id: ImageId
    width: int
    height: int
    file_name: str = ""
    scene_label: Optional[str] = None
    character_labels: tuple[tuple[PersonId, str], ...] = field(default=())

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"image {self.image_id!r}: dimensions must be positive")
