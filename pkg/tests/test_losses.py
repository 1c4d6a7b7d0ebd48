import numpy as np
import pytest

from poseforge import (
    DETECTION_LAMBDAS,
    FeatureTensor,
    LossWeights,
    POSE_LAMBDAS,
    TaskKind,
    combined_loss_1,
    combined_loss_2,
    detection_loss,
    perceptual_loss,
    pose_loss,
)
from poseforge.errors import (
    LengthMismatch,
    NegativeComponent,
    NegativeInput,
    ShapeMismatch,
)


def tensor(values):
    return FeatureTensor(np.asarray(values, dtype=np.float64))


def random_tensor(rng, c=3, h=4, w=4):
    return FeatureTensor(rng.normal(0, 1, size=(c, h, w)))


class TestPoseLoss:
    def test_identical_heatmaps(self, rng):
        t = random_tensor(rng)
        assert pose_loss(t, t) == 0.0

    def test_unit_offset(self, rng):
        a = random_tensor(rng)
        b = FeatureTensor(a.data + 1.0)
        assert pose_loss(a, b) == pytest.approx(1.0, abs=1e-12)

    def test_matches_elementwise_oracle(self, rng):
        for _ in range(20):
            a = random_tensor(rng)
            b = random_tensor(rng)
            expect = sum((x - y) ** 2 for x, y in zip(a.data.ravel(), b.data.ravel()))
            expect /= a.data.size
            assert pose_loss(a, b) == pytest.approx(expect, abs=1e-9)

    def test_shape_mismatch(self, rng):
        with pytest.raises(ShapeMismatch):
            pose_loss(random_tensor(rng, h=4), random_tensor(rng, h=5))


class TestDetectionLoss:
    def test_zero(self):
        assert detection_loss(0.0, 0.0) == 0.0

    def test_plain_sum(self):
        assert detection_loss(0.4, 0.6) == 1.0
        assert detection_loss(1e-8, 2.5) == pytest.approx(2.50000001, abs=1e-15)

    def test_negative_component(self):
        with pytest.raises(NegativeComponent):
            detection_loss(-0.1, 0.5)
        with pytest.raises(NegativeComponent):
            detection_loss(0.5, -0.1)


class TestPerceptualLoss:
    def test_identical_stacks(self, rng):
        feats = [random_tensor(rng) for _ in range(3)]
        assert perceptual_loss(feats, feats) == 0.0

    def test_single_layer_constant_offset(self, rng):
        a = random_tensor(rng)
        b = FeatureTensor(a.data + 2.0)
        assert perceptual_loss([a], [b]) == pytest.approx(4.0, abs=1e-12)

    def test_uniform_weighting_is_layer_mean(self, rng):
        feats_a = [random_tensor(rng) for _ in range(4)]
        feats_b = [random_tensor(rng) for _ in range(4)]
        per_layer = [pose_loss(a, b) for a, b in zip(feats_a, feats_b)]
        expect = sum(per_layer) / 4.0
        assert perceptual_loss(feats_a, feats_b) == pytest.approx(expect, abs=1e-12)

    def test_explicit_weights(self, rng):
        feats_a = [random_tensor(rng) for _ in range(3)]
        feats_b = [random_tensor(rng) for _ in range(3)]
        weights = [3.0, 1.0, 0.0]
        per_layer = [pose_loss(a, b) for a, b in zip(feats_a, feats_b)]
        expect = (3.0 * per_layer[0] + 1.0 * per_layer[1]) / 4.0
        assert perceptual_loss(feats_a, feats_b, weights) == pytest.approx(expect, abs=1e-12)

    def test_layer_count_mismatch(self, rng):
        with pytest.raises(LengthMismatch):
            perceptual_loss([random_tensor(rng)], [random_tensor(rng)] * 2)

    def test_empty_stack(self):
        with pytest.raises(LengthMismatch):
            perceptual_loss([], [])

    def test_weight_validation(self, rng):
        feats = [random_tensor(rng) for _ in range(2)]
        with pytest.raises(LengthMismatch):
            perceptual_loss(feats, feats, [1.0])
        with pytest.raises(NegativeInput):
            perceptual_loss(feats, feats, [1.0, -1.0])
        with pytest.raises(NegativeInput):
            perceptual_loss(feats, feats, [0.0, 0.0])


class TestLossWeights:
    def test_tuned_optima(self):
        det = LossWeights.tuned(TaskKind.DETECTION)
        assert (det.lambda1, det.lambda2) == DETECTION_LAMBDAS == (0.43, 0.92)
        pose = LossWeights.tuned(TaskKind.POSE)
        assert (pose.lambda1, pose.lambda2) == POSE_LAMBDAS == (0.47, 0.018)

    def test_negative_weight_rejected(self):
        with pytest.raises(NegativeInput):
            LossWeights(-0.1, 0.5, TaskKind.POSE)

    def test_all_zero_rejected(self):
        with pytest.raises(NegativeInput):
            LossWeights(0.0, 0.0, TaskKind.POSE)


class TestCombinedLosses:
    def test_comb1_worked_value(self):
        assert combined_loss_1(2.0, 0.5) == 3.0
        assert combined_loss_1(0.0, 5.0) == 0.0
        assert combined_loss_1(1.0, 0.0) == 1.0

    def test_comb2_worked_values(self):
        det = LossWeights.tuned(TaskKind.DETECTION)
        assert combined_loss_2(1.0, 1.0, det) == pytest.approx(1.35, abs=1e-12)
        pose = LossWeights.tuned(TaskKind.POSE)
        assert combined_loss_2(1.0, 0.0, pose) == pytest.approx(0.47, abs=1e-12)

    def test_comb2_reduces_to_comb1(self, rng):
        # lambda1 = 1, lambda2 = task loss: the flavours coincide exactly
        for _ in range(10_000):
            t = float(rng.uniform(1e-6, 10))
            p = float(rng.uniform(0, 10))
            weights = LossWeights(1.0, t, TaskKind.POSE)
            assert abs(combined_loss_2(t, p, weights) - combined_loss_1(t, p)) <= 1e-12

    def test_negative_inputs_rejected(self):
        weights = LossWeights.tuned(TaskKind.POSE)
        with pytest.raises(NegativeInput):
            combined_loss_1(-1.0, 0.5)
        with pytest.raises(NegativeInput):
            combined_loss_1(1.0, -0.5)
        with pytest.raises(NegativeInput):
            combined_loss_2(-1.0, 0.5, weights)

    def test_comb1_penalty_scales_with_task_loss(self):
        # the perceptual penalty (comb1 - task) grows with the task loss
        p = 0.8
        penalties = [combined_loss_1(t, p) - t for t in (0.5, 1.0, 2.0, 4.0)]
        assert all(a < b for a, b in zip(penalties, penalties[1:]))

    def test_monotone_in_each_argument(self, rng):
        weights = LossWeights.tuned(TaskKind.DETECTION)
        for _ in range(100):
            t = float(rng.uniform(0, 5))
            p = float(rng.uniform(0, 5))
            dt = float(rng.uniform(0.01, 1))
            assert combined_loss_1(t + dt, p) > combined_loss_1(t, p) or t == 0
            assert combined_loss_2(t + dt, p, weights) > combined_loss_2(t, p, weights)
            assert combined_loss_1(t, p + dt) >= combined_loss_1(t, p)
            assert combined_loss_2(t, p + dt, weights) > combined_loss_2(t, p, weights)

    def test_gradients_match_central_differences(self):
        h = 1e-6
        t, p = 1.7, 0.9
        # comb1: d/dt = 1 + p, d/dp = t
        dt = (combined_loss_1(t + h, p) - combined_loss_1(t - h, p)) / (2 * h)
        dp = (combined_loss_1(t, p + h) - combined_loss_1(t, p - h)) / (2 * h)
        assert dt == pytest.approx(1.0 + p, abs=1e-6)
        assert dp == pytest.approx(t, abs=1e-6)
        # comb2: d/dt = lambda1, d/dp = lambda2
        weights = LossWeights.tuned(TaskKind.DETECTION)
        dt = (combined_loss_2(t + h, p, weights) - combined_loss_2(t - h, p, weights)) / (2 * h)
        dp = (combined_loss_2(t, p + h, weights) - combined_loss_2(t, p - h, weights)) / (2 * h)
        assert dt == pytest.approx(weights.lambda1, abs=1e-6)
        assert dp == pytest.approx(weights.lambda2, abs=1e-6)
