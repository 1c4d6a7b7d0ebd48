"""Greedy detection matching and AP/AR aggregation.

Per threshold, detections are processed in descending score order and
matched greedily to the unmatched ground truth with the highest
similarity at or above the threshold (ties to the lower ground-truth
id). Average precision interpolates the precision envelope at 101
evenly spaced recall points; average recall is the final recall with at
most ``max_detections`` detections per image. mAP and mAR average the
per-threshold values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import ImageId, PersonId, PersonInstance
from .errors import EmptyGroundTruth, MissingScore
from .metrics import DEFAULT_OKS_PARAMS, MetricKind, OksParams, iou, oks

DEFAULT_THRESHOLDS = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))
RECALL_POINTS = np.linspace(0.0, 1.0, 101)

_DEFAULT_MAX_DETECTIONS = {MetricKind.OKS: 20, MetricKind.IOU: 100}


@dataclass(frozen=True)
class MatchConfig:
    metric_kind: MetricKind = MetricKind.OKS
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    max_detections: Optional[int] = None
    oks_params: OksParams = DEFAULT_OKS_PARAMS

    def __post_init__(self):
        if not self.thresholds:
            raise ValueError("need at least one threshold")
        if any(not (0.0 < t <= 1.0) for t in self.thresholds):
            raise ValueError("thresholds must lie in (0, 1]")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be strictly ascending")
        if self.max_detections is not None and self.max_detections < 1:
            raise ValueError("max_detections must be positive")

    @property
    def resolved_max_detections(self) -> int:
        if self.max_detections is not None:
            return self.max_detections
        return _DEFAULT_MAX_DETECTIONS[self.metric_kind]


@dataclass(frozen=True)
class ThresholdResult:
    threshold: float
    ap: float
    ar: float


@dataclass(frozen=True)
class PrCurve:
    """Interpolated precision over the 101 standard recall points."""

    threshold: float
    recall: tuple[float, ...]
    precision: tuple[float, ...]


@dataclass(frozen=True)
class EvalReport:
    metric_kind: MetricKind
    max_detections: int
    per_threshold: tuple[ThresholdResult, ...]
    pr_curves: tuple[PrCurve, ...]

    @property
    def mean_ap(self) -> float:
        return float(np.mean([t.ap for t in self.per_threshold]))

    @property
    def mean_ar(self) -> float:
        return float(np.mean([t.ar for t in self.per_threshold]))

    def to_text(self) -> str:
        lines = [f"metric={self.metric_kind.value} thresholds={len(self.per_threshold)} "
                 f"max_detections={self.max_detections}"]
        for t in self.per_threshold:
            lines.append(f"threshold={t.threshold:.2f} ap={t.ap:.6f} ar={t.ar:.6f}")
        lines.append(f"mAP={self.mean_ap:.6f} mAR={self.mean_ar:.6f}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "metric": self.metric_kind.value,
            "max_detections": self.max_detections,
            "per_threshold": [
                {"threshold": t.threshold, "ap": t.ap, "ar": t.ar}
                for t in self.per_threshold
            ],
            "map": self.mean_ap,
            "mar": self.mean_ar,
            "pr_curves": [
                {"threshold": c.threshold,
                 "recall": list(c.recall),
                 "precision": list(c.precision)}
                for c in self.pr_curves
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"

    @classmethod
    def from_json_dict(cls, doc: dict) -> "EvalReport":
        return cls(
            metric_kind=MetricKind(doc["metric"]),
            max_detections=int(doc["max_detections"]),
            per_threshold=tuple(
                ThresholdResult(threshold=t["threshold"], ap=t["ap"], ar=t["ar"])
                for t in doc["per_threshold"]),
            pr_curves=tuple(
                PrCurve(threshold=c["threshold"], recall=tuple(c["recall"]),
                        precision=tuple(c["precision"]))
                for c in doc.get("pr_curves", ())),
        )


def _similarity(pred: PersonInstance, gt: PersonInstance, kind: MetricKind,
                params: OksParams) -> float:
    if kind == MetricKind.IOU:
        return iou(pred.box, gt.box).value
    if gt.pose is None:
        raise MissingScore(f"ground truth {gt.id!r} has no pose for keypoint evaluation")
    if pred.pose is None:
        raise MissingScore(f"prediction {pred.id!r} has no pose for keypoint evaluation")
    return oks(pred.pose, gt.pose, gt.area, params).value


def _check_scores(preds: Sequence[PersonInstance]) -> None:
    for p in preds:
        if p.score is None:
            raise MissingScore(f"prediction {p.id!r} has no score")


def _score_sorted(preds: Sequence[PersonInstance]) -> list[PersonInstance]:
    return sorted(preds, key=lambda p: -p.score)  # stable: input order on ties


def _id_key(identifier):
    # ints numerically, strings lexically; never compares across the two
    return (isinstance(identifier, str), identifier)


def match_greedy(preds: Sequence[PersonInstance], gts: Sequence[PersonInstance],
                 threshold: float, metric_kind: MetricKind,
                 oks_params: OksParams = DEFAULT_OKS_PARAMS,
                 ) -> list[tuple[PersonId, Optional[PersonId]]]:
    """Match one image's predictions to ground truths at one threshold.

    Returns (prediction id, matched gt id or None) pairs in descending
    score order.
    """
    _check_scores(preds)
    ordered = _score_sorted(preds)
    gts_sorted = sorted(gts, key=lambda g: _id_key(g.id))
    sim = np.array([[_similarity(p, g, metric_kind, oks_params) for g in gts_sorted]
                    for p in ordered], dtype=np.float64).reshape(len(ordered), len(gts_sorted))
    taken = np.zeros(len(gts_sorted), dtype=bool)
    out: list[tuple[PersonId, Optional[PersonId]]] = []
    for d, pred in enumerate(ordered):
        best_val = -1.0
        best_g = -1
        for g in range(len(gts_sorted)):
            if taken[g] or sim[d, g] < threshold:
                continue
            if sim[d, g] > best_val:
                best_val = sim[d, g]
                best_g = g
        if best_g >= 0:
            taken[best_g] = True
            out.append((pred.id, gts_sorted[best_g].id))
        else:
            out.append((pred.id, None))
    return out


def evaluate(preds: Mapping[ImageId, Sequence[PersonInstance]],
             gts: Mapping[ImageId, Sequence[PersonInstance]],
             cfg: MatchConfig = MatchConfig()) -> EvalReport:
    """Score a prediction set against ground truth over all thresholds."""
    unknown = set(preds) - set(gts)
    if unknown:
        raise ValueError(f"predictions reference images absent from ground truth: {sorted(map(str, unknown))}")
    n_gt_total = sum(len(v) for v in gts.values())
    if n_gt_total == 0:
        raise EmptyGroundTruth("no ground-truth instances in any image")

    max_det = cfg.resolved_max_detections
    thresholds = cfg.thresholds
    n_thr = len(thresholds)

    # Per image: greedy matching at every threshold over a shared
    # similarity matrix; detections kept in descending score order.
    all_scores: list[np.ndarray] = []
    all_matched: list[np.ndarray] = []  # (n_thr, n_det) bool blocks
    for image_id in sorted(gts, key=_id_key):
        image_gts = sorted(gts[image_id], key=lambda g: _id_key(g.id))
        image_preds = list(preds.get(image_id, ()))
        _check_scores(image_preds)
        ordered = _score_sorted(image_preds)[:max_det]
        if not ordered:
            continue
        scores = np.array([p.score for p in ordered], dtype=np.float64)
        sim = np.array([[_similarity(p, g, cfg.metric_kind, cfg.oks_params)
                         for g in image_gts] for p in ordered],
                       dtype=np.float64).reshape(len(ordered), len(image_gts))
        matched = np.zeros((n_thr, len(ordered)), dtype=bool)
        for ti, thr in enumerate(thresholds):
            taken = np.zeros(len(image_gts), dtype=bool)
            for d in range(len(ordered)):
                best_val = -1.0
                best_g = -1
                for g in range(len(image_gts)):
                    if taken[g] or sim[d, g] < thr:
                        continue
                    if sim[d, g] > best_val:
                        best_val = sim[d, g]
                        best_g = g
                if best_g >= 0:
                    taken[best_g] = True
                    matched[ti, d] = True
        all_scores.append(scores)
        all_matched.append(matched)

    if all_scores:
        scores = np.concatenate(all_scores)
        matched = np.concatenate(all_matched, axis=1)
        order = np.argsort(-scores, kind="mergesort")
        matched = matched[:, order]
    else:
        matched = np.zeros((n_thr, 0), dtype=bool)

    results = []
    curves = []
    for ti, thr in enumerate(thresholds):
        tp = np.cumsum(matched[ti]).astype(np.float64)
        fp = np.cumsum(~matched[ti]).astype(np.float64)
        n_det = matched.shape[1]
        if n_det == 0:
            results.append(ThresholdResult(thr, 0.0, 0.0))
            curves.append(PrCurve(thr, tuple(RECALL_POINTS), tuple(np.zeros(101))))
            continue
        recall = tp / n_gt_total
        precision = tp / (tp + fp)
        # precision envelope: monotone non-increasing from the right
        envelope = np.maximum.accumulate(precision[::-1])[::-1]
        idx = np.searchsorted(recall, RECALL_POINTS, side="left")
        q = np.where(idx < n_det, envelope[np.minimum(idx, n_det - 1)], 0.0)
        results.append(ThresholdResult(thr, float(q.mean()), float(recall[-1])))
        curves.append(PrCurve(thr, tuple(RECALL_POINTS), tuple(q)))

    return EvalReport(metric_kind=cfg.metric_kind,
                      max_detections=max_det,
                      per_threshold=tuple(results),
                      pr_curves=tuple(curves))
