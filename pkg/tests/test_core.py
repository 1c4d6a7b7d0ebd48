import math

import numpy as np
import pytest

from poseforge import (
    FLAT_POSE_LENGTH,
    KEYPOINT_NAMES,
    NUM_JOINTS,
    SKELETON_EDGES,
    BoundingBox,
    ImageRecord,
    Keypoint,
    PersonInstance,
    PoseAnnotation,
    Visibility,
    normalize_pose,
)
from poseforge.errors import (
    InvalidVisibilityFlag,
    NonFiniteValue,
    WrongLength,
)

from conftest import random_flat_pose


class TestKeypoint:
    def test_unlabeled_coordinates_are_zeroed(self):
        kp = Keypoint(5.0, 7.0, Visibility.NOT_LABELED)
        assert (kp.x, kp.y) == (0.0, 0.0)
        assert not kp.labeled

    def test_labeled_coordinates_kept(self):
        kp = Keypoint(5.0, 7.0, Visibility.LABELED_VISIBLE)
        assert (kp.x, kp.y) == (5.0, 7.0)
        assert kp.labeled

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), float("-inf")])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(NonFiniteValue):
            Keypoint(bad, 0.0, Visibility.LABELED_VISIBLE)


class TestNormalizePose:
    def test_all_zero_input(self):
        pose = normalize_pose([0.0] * FLAT_POSE_LENGTH)
        assert pose.num_labeled == 0
        assert all(k.visibility == Visibility.NOT_LABELED for k in pose.keypoints)

    def test_single_visible_joint(self):
        flat = [5.0, 7.0, 2.0] + [0.0] * 48
        pose = normalize_pose(flat)
        assert pose.keypoints[0] == Keypoint(5.0, 7.0, Visibility.LABELED_VISIBLE)
        assert pose.num_labeled == 1

    def test_unlabeled_joint_coordinates_zeroed(self):
        flat = [5.0, 7.0, 0.0] + [0.0] * 48
        pose = normalize_pose(flat)
        assert pose.keypoints[0] == Keypoint(0.0, 0.0, Visibility.NOT_LABELED)

    def test_wrong_length(self):
        with pytest.raises(WrongLength):
            normalize_pose([0.0] * 50)
        with pytest.raises(WrongLength):
            normalize_pose([0.0] * 52)

    def test_bad_visibility_flag(self):
        flat = [1.0, 1.0, 3.0] + [0.0] * 48
        with pytest.raises(InvalidVisibilityFlag):
            normalize_pose(flat)

    def test_non_finite_value(self):
        flat = [math.nan, 1.0, 2.0] + [0.0] * 48
        with pytest.raises(NonFiniteValue):
            normalize_pose(flat)

    def test_idempotent_and_round_trip_on_canonical(self, rng):
        for _ in range(50):
            flat = random_flat_pose(rng)
            pose = normalize_pose(flat)
            again = normalize_pose(pose.to_flat())
            assert again == pose
            assert list(again.to_flat()) == list(pose.to_flat())
            # canonical input reproduces its own encoding
            assert list(pose.to_flat()) == flat

    def test_num_labeled_matches_recount(self, rng):
        for _ in range(50):
            pose = normalize_pose(random_flat_pose(rng))
            assert pose.num_labeled == sum(1 for k in pose.keypoints if k.labeled)

    def test_array_views(self):
        flat = [5.0, 7.0, 2.0, 1.0, 2.0, 1.0] + [0.0] * 45
        pose = normalize_pose(flat)
        np.testing.assert_array_equal(pose.xy[:2], [[5.0, 7.0], [1.0, 2.0]])
        np.testing.assert_array_equal(pose.vis[:3], [2, 1, 0])
        with pytest.raises(ValueError):
            pose.xy[0, 0] = 99.0


class TestPoseAnnotation:
    def test_requires_17_joints(self):
        kps = tuple(Keypoint(0, 0, Visibility.NOT_LABELED) for _ in range(16))
        with pytest.raises(WrongLength):
            PoseAnnotation(kps)


class TestBoundingBox:
    def test_area(self):
        assert BoundingBox(1.0, 2.0, 10.0, 5.0).area == 50.0

    def test_negative_extent_rejected(self):
        with pytest.raises(ValueError):
            BoundingBox(0, 0, -1.0, 5.0)

    def test_non_finite_rejected(self):
        with pytest.raises(NonFiniteValue):
            BoundingBox(0, 0, math.inf, 5.0)

    def test_as_xywh(self):
        assert BoundingBox(1, 2, 3, 4).as_xywh() == (1, 2, 3, 4)


class TestPersonInstance:
    def test_ground_truth_has_no_score(self):
        inst = PersonInstance(id=1, image_id=1, box=BoundingBox(0, 0, 5, 5), area=25.0)
        assert not inst.is_prediction

    def test_prediction_score_range(self):
        with pytest.raises(ValueError):
            PersonInstance(id=1, image_id=1, box=BoundingBox(0, 0, 5, 5),
                           area=25.0, score=1.5)

    def test_prediction_flag(self):
        inst = PersonInstance(id=1, image_id=1, box=BoundingBox(0, 0, 5, 5),
                              area=25.0, score=0.5)
        assert inst.is_prediction


class TestImageRecord:
    def test_dimensions_must_be_positive(self):
        with pytest.raises(ValueError):
            ImageRecord(image_id=1, width=0, height=5)

    def test_labels_default_empty(self):
        rec = ImageRecord(image_id=1, width=4, height=5)
        assert rec.scene_label is None
        assert rec.character_labels == ()


class TestConstants:
    def test_joint_bookkeeping(self):
        assert NUM_JOINTS == 17
        assert FLAT_POSE_LENGTH == 51
        assert len(KEYPOINT_NAMES) == 17
        assert len(set(KEYPOINT_NAMES)) == 17

    def test_skeleton_indices_in_range(self):
        for a, b in SKELETON_EDGES:
            assert 1 <= a <= NUM_JOINTS
            assert 1 <= b <= NUM_JOINTS
