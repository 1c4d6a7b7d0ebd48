import json

import numpy as np
import pytest

from poseforge import (
    DEFAULT_THRESHOLDS,
    EvalReport,
    MatchConfig,
    MetricKind,
    evaluate,
    match_greedy,
    oks,
    parse_annotations,
)
from poseforge.errors import EmptyGroundTruth, MissingScore

from conftest import FIXTURES, make_instance, random_flat_pose

GOLDEN_SETS = ("perfect_oks", "jittered_oks", "crowded_oks", "tied_scores_oks",
               "boxes_iou")


def load_pair(name):
    gt = parse_annotations((FIXTURES / "eval" / f"{name}_gt.json").read_bytes())
    pred = parse_annotations((FIXTURES / "eval" / f"{name}_pred.json").read_bytes())
    return pred.instances_by_image(), gt.instances_by_image()


def load_golden(name):
    return json.loads((FIXTURES / "eval" / f"{name}_golden.json").read_text())


def reference_greedy(preds, gts, threshold):
    """Brute-force restatement of the matching rule: predictions in score
    order each take the unmatched ground truth of highest similarity at or
    above the threshold, lowest gt id on ties."""
    order = sorted(range(len(preds)), key=lambda i: -preds[i].score)
    taken = set()
    pairs = []
    for i in order:
        best = None
        best_sim = threshold
        for g in sorted(gts, key=lambda g: g.id):
            if g.id in taken:
                continue
            sim = oks(preds[i].pose, g.pose, g.area).value
            if sim > best_sim or (best is None and sim >= threshold):
                best, best_sim = g, sim
        if best is not None:
            taken.add(best.id)
            pairs.append((preds[i].id, best.id))
        else:
            pairs.append((preds[i].id, None))
    return pairs


class TestMatchGreedy:
    def test_single_pair_above_threshold(self, rng):
        flat = random_flat_pose(rng, min_labeled=5)
        gt = make_instance("g1", flat=flat)
        pred = make_instance("p1", flat=flat, score=0.9)
        assert match_greedy([pred], [gt], 0.5, MetricKind.OKS) == [("p1", "g1")]

    def test_single_pair_below_threshold(self, rng):
        flat = random_flat_pose(rng, min_labeled=5)
        far = [v + 400.0 if i % 3 == 0 else v for i, v in enumerate(flat)]
        gt = make_instance("g1", flat=flat)
        pred = make_instance("p1", flat=far, score=0.9)
        assert match_greedy([pred], [gt], 0.5, MetricKind.OKS) == [("p1", None)]

    def test_higher_score_takes_the_gt(self, rng):
        flat = random_flat_pose(rng, min_labeled=5)
        gt = make_instance("g1", flat=flat)
        low = make_instance("p_low", flat=flat, score=0.2)
        high = make_instance("p_high", flat=flat, score=0.8)
        pairs = dict(match_greedy([low, high], [gt], 0.5, MetricKind.OKS))
        assert pairs == {"p_high": "g1", "p_low": None}

    def test_exact_tie_goes_to_lowest_gt_id(self, rng):
        flat = random_flat_pose(rng, min_labeled=5)
        gt_b = make_instance(2, flat=flat)
        gt_a = make_instance(1, flat=flat)
        pred = make_instance("p", flat=flat, score=0.5)
        assert match_greedy([pred], [gt_b, gt_a], 0.5, MetricKind.OKS) == [("p", 1)]

    def test_agrees_with_reference_on_random_scenes(self, rng):
        for _ in range(60):
            n_gt = int(rng.integers(1, 4))
            n_pred = int(rng.integers(1, 4))
            gts = [make_instance(g, flat=random_flat_pose(rng, spread=30, min_labeled=4))
                   for g in range(n_gt)]
            preds = []
            for p in range(n_pred):
                base = gts[int(rng.integers(0, n_gt))].pose.to_flat()
                noisy = [v + rng.normal(0, 15) if i % 3 != 2 else v
                         for i, v in enumerate(base)]
                preds.append(make_instance(f"p{p}", flat=noisy,
                                           score=float(rng.uniform(0.05, 1))))
            for threshold in (0.3, 0.5, 0.75):
                got = match_greedy(preds, gts, threshold, MetricKind.OKS)
                assert got == reference_greedy(preds, gts, threshold)


class TestMatchConfig:
    def test_default_max_detections(self):
        assert MatchConfig(metric_kind=MetricKind.OKS).resolved_max_detections == 20
        assert MatchConfig(metric_kind=MetricKind.IOU).resolved_max_detections == 100

    def test_explicit_max_detections(self):
        cfg = MatchConfig(metric_kind=MetricKind.OKS, max_detections=3)
        assert cfg.resolved_max_detections == 3

    def test_default_thresholds(self):
        cfg = MatchConfig(metric_kind=MetricKind.OKS)
        assert cfg.thresholds == DEFAULT_THRESHOLDS
        assert len(cfg.thresholds) == 10
        assert cfg.thresholds[0] == 0.5
        assert cfg.thresholds[-1] == pytest.approx(0.95)

    def test_thresholds_must_ascend(self):
        with pytest.raises(ValueError):
            MatchConfig(metric_kind=MetricKind.OKS, thresholds=(0.9, 0.5))

    def test_thresholds_must_lie_in_unit_interval(self):
        for bad in ((0.0,), (1.5,), (-0.1,)):
            with pytest.raises(ValueError):
                MatchConfig(metric_kind=MetricKind.OKS, thresholds=bad)


class TestEvaluateGoldens:
    @pytest.mark.parametrize("name", GOLDEN_SETS)
    def test_matches_reference_scores(self, name):
        preds, gts = load_pair(name)
        golden = load_golden(name)
        cfg = MatchConfig(metric_kind=MetricKind(golden["kind"]),
                          max_detections=golden["max_detections"])
        report = evaluate(preds, gts, cfg)
        for got, want in zip(report.per_threshold, golden["per_threshold"]):
            assert got.threshold == pytest.approx(want["threshold"], abs=1e-12)
            assert got.ap == pytest.approx(want["ap"], abs=1e-6)
            assert got.ar == pytest.approx(want["ar"], abs=1e-6)
        assert report.mean_ap == pytest.approx(golden["map"], abs=1e-6)
        assert report.mean_ar == pytest.approx(golden["mar"], abs=1e-6)

    def test_perfect_predictions_score_exactly_one(self):
        preds, gts = load_pair("perfect_oks")
        report = evaluate(preds, gts, MatchConfig(metric_kind=MetricKind.OKS))
        assert report.mean_ap == 1.0
        assert report.mean_ar == 1.0
        assert all(t.ap == 1.0 and t.ar == 1.0 for t in report.per_threshold)


class TestEvaluateEdges:
    def test_no_predictions_scores_zero(self, rng):
        gts = {1: [make_instance("g", flat=random_flat_pose(rng, min_labeled=3))]}
        report = evaluate({}, gts, MatchConfig(metric_kind=MetricKind.OKS))
        assert report.mean_ap == 0.0
        assert report.mean_ar == 0.0

    def test_empty_ground_truth_raises(self):
        with pytest.raises(EmptyGroundTruth):
            evaluate({}, {}, MatchConfig(metric_kind=MetricKind.OKS))

    def test_prediction_without_score_raises(self, rng):
        flat = random_flat_pose(rng, min_labeled=3)
        gts = {1: [make_instance("g", flat=flat)]}
        preds = {1: [make_instance("p", flat=flat)]}
        with pytest.raises(MissingScore):
            evaluate(preds, gts, MatchConfig(metric_kind=MetricKind.OKS))

    def test_prediction_for_unknown_image_rejected(self, rng):
        flat = random_flat_pose(rng, min_labeled=3)
        gts = {1: [make_instance("g", flat=flat)]}
        preds = {2: [make_instance("p", flat=flat, score=0.5)]}
        with pytest.raises(ValueError):
            evaluate(preds, gts, MatchConfig(metric_kind=MetricKind.OKS))

    def test_max_detections_truncates_low_scores(self, rng):
        flat = random_flat_pose(rng, min_labeled=4)
        gts = {1: [make_instance("g", flat=flat)]}
        # the sole true match is outscored by junk; with max_detections=2
        # only the junk survives truncation
        junk = [v + 300.0 if i % 3 == 0 else v for i, v in enumerate(flat)]
        preds = {1: [make_instance("good", flat=flat, score=0.1),
                     make_instance("j1", flat=junk, score=0.9),
                     make_instance("j2", flat=junk, score=0.8)]}
        cfg = MatchConfig(metric_kind=MetricKind.OKS, max_detections=2)
        report = evaluate(preds, gts, cfg)
        assert report.mean_ar == 0.0
        full = evaluate(preds, gts, MatchConfig(metric_kind=MetricKind.OKS))
        assert full.mean_ar == 1.0


class TestEvaluateInvariants:
    def test_ap_and_ar_never_increase_with_threshold(self):
        for name in GOLDEN_SETS:
            preds, gts = load_pair(name)
            kind = MetricKind.IOU if name.endswith("iou") else MetricKind.OKS
            report = evaluate(preds, gts, MatchConfig(metric_kind=kind))
            aps = [t.ap for t in report.per_threshold]
            ars = [t.ar for t in report.per_threshold]
            assert all(a >= b - 1e-12 for a, b in zip(aps, aps[1:]))
            assert all(a >= b - 1e-12 for a, b in zip(ars, ars[1:]))

    def test_false_positive_below_all_matches_never_raises_ap(self, rng):
        preds, gts = load_pair("jittered_oks")
        base = evaluate(preds, gts, MatchConfig(metric_kind=MetricKind.OKS))
        image_id = next(iter(gts))
        junk = make_instance("junk_fp", flat=random_flat_pose(rng, center=(9000, 9000)),
                             score=1e-6)
        with_fp = dict(preds)
        with_fp[image_id] = list(with_fp.get(image_id, [])) + [junk]
        spoiled = evaluate(with_fp, gts, MatchConfig(metric_kind=MetricKind.OKS))
        for a, b in zip(spoiled.per_threshold, base.per_threshold):
            assert a.ap <= b.ap + 1e-12
            assert a.ar == b.ar

    def test_duplicating_every_image_changes_nothing(self):
        preds, gts = load_pair("jittered_oks")

        def doubled(block):
            out = {}
            for image_id, instances in block.items():
                out[image_id] = instances
                out[f"copy_{image_id}"] = [
                    make_instance(f"copy_{inst.id}", image_id=f"copy_{image_id}",
                                  flat=list(inst.pose.to_flat()), score=inst.score,
                                  area=inst.area, box=inst.box)
                    for inst in instances
                ]
            return out

        base = evaluate(preds, gts, MatchConfig(metric_kind=MetricKind.OKS))
        twice = evaluate(doubled(preds), doubled(gts),
                         MatchConfig(metric_kind=MetricKind.OKS))
        for a, b in zip(twice.per_threshold, base.per_threshold):
            assert a.ap == b.ap
            assert a.ar == b.ar

    def test_report_means_are_plain_averages(self):
        preds, gts = load_pair("crowded_oks")
        report = evaluate(preds, gts, MatchConfig(metric_kind=MetricKind.OKS))
        assert report.mean_ap == np.mean([t.ap for t in report.per_threshold])
        assert report.mean_ar == np.mean([t.ar for t in report.per_threshold])


class TestEvalReport:
    def make_report(self):
        preds, gts = load_pair("perfect_oks")
        return evaluate(preds, gts, MatchConfig(metric_kind=MetricKind.OKS))

    def test_text_layout(self):
        text = self.make_report().to_text()
        lines = text.splitlines()
        assert lines[0] == "metric=oks thresholds=10 max_detections=20"
        assert lines[1] == "threshold=0.50 ap=1.000000 ar=1.000000"
        assert lines[-1] == "mAP=1.000000 mAR=1.000000"

    def test_json_round_trip(self):
        report = self.make_report()
        doc = json.loads(report.to_json())
        assert doc == report.to_json_dict()
        rebuilt = EvalReport.from_json_dict(doc)
        assert rebuilt == report
