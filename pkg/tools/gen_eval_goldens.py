#!/usr/bin/env python3
"""Generate evaluation fixtures and their golden reports.

This script is the independent reference for the detection evaluation
protocol: greedy per-threshold matching of score-sorted detections,
101-point interpolated average precision, and final-recall average
recall. It is a direct port of the canonical COCO evaluation loops
(computeOks / computeIoU / evaluateImg / accumulate), specialized to a
single category with no ignore regions or area ranges, which is the
protocol under test; the fixtures it emits carry neither crowds nor
ignores, so the dropped machinery is inert for them. It intentionally
imports nothing from the package being tested.

Outputs, per fixture set NAME:
  tests/fixtures/eval/NAME_gt.json      ground-truth annotation file
  tests/fixtures/eval/NAME_pred.json    prediction annotation file
  tests/fixtures/eval/NAME_golden.json  per-threshold AP/AR + mAP/mAR
  tests/fixtures/eval/NAME_report.txt   the same numbers in the text
                                        report layout (for byte checks)

Run from the repository root:  python3 tools/gen_eval_goldens.py
"""

import json
from pathlib import Path

import numpy as np

OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "eval"

SIGMAS = np.array([
    .026, .025, .025, .035, .035, .079, .079, .072, .072,
    .062, .062, .107, .107, .087, .087, .089, .089])
THRESHOLDS = np.linspace(0.5, 0.95, 10)
RECALL_POINTS = np.linspace(0.0, 1.0, 101)

KEYPOINT_NAMES = [
    "nose", "left_eye", "right_eye", "left_ear", "right_ear",
    "left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
    "left_wrist", "right_wrist", "left_hip", "right_hip",
    "left_knee", "right_knee", "left_ankle", "right_ankle"]
SKELETON = [
    [16, 14], [14, 12], [17, 15], [15, 13], [12, 13], [6, 12], [7, 13],
    [6, 7], [6, 8], [7, 9], [8, 10], [9, 11], [2, 3], [1, 2], [1, 3],
    [2, 4], [3, 5], [4, 6], [5, 7]]


# --- reference similarity ----------------------------------------------------

def compute_oks(dts, gts):
    """OKS matrix, canonical formulation (prediction flags ignored)."""
    ious = np.zeros((len(dts), len(gts)))
    vars_ = (SIGMAS * 2) ** 2
    for j, gt in enumerate(gts):
        g = np.array(gt["keypoints"])
        xg, yg, vg = g[0::3], g[1::3], g[2::3]
        k1 = np.count_nonzero(vg > 0)
        for i, dt in enumerate(dts):
            d = np.array(dt["keypoints"])
            xd, yd = d[0::3], d[1::3]
            dx = xd - xg
            dy = yd - yg
            e = (dx ** 2 + dy ** 2) / vars_ / (gt["area"] + np.spacing(1)) / 2
            if k1 > 0:
                e = e[vg > 0]
            ious[i, j] = np.sum(np.exp(-e)) / e.shape[0]
    return ious


def compute_iou(dts, gts):
    """Box IoU matrix on [x, y, w, h] boxes."""
    ious = np.zeros((len(dts), len(gts)))
    for j, gt in enumerate(gts):
        gx, gy, gw, gh = gt["bbox"]
        for i, dt in enumerate(dts):
            dx, dy, dw, dh = dt["bbox"]
            iw = min(dx + dw, gx + gw) - max(dx, gx)
            ih = min(dy + dh, gy + gh) - max(dy, gy)
            if iw <= 0 or ih <= 0:
                continue
            inter = iw * ih
            union = dw * dh + gw * gh - inter
            ious[i, j] = inter / union
    return ious


# --- reference matching and accumulation -------------------------------------

def evaluate_img(dts, gts, ious):
    """Greedy matching at every threshold; dts already score-sorted."""
    T, D, G = len(THRESHOLDS), len(dts), len(gts)
    dtm = np.zeros((T, D))
    gtm = np.zeros((T, G))
    for tind, t in enumerate(THRESHOLDS):
        for dind in range(D):
            iou = min(t, 1 - 1e-10)
            m = -1
            for gind in range(G):
                if gtm[tind, gind] > 0:
                    continue
                if ious[dind, gind] < iou:
                    continue
                iou = ious[dind, gind]
                m = gind
            if m == -1:
                continue
            dtm[tind, dind] = 1
            gtm[tind, m] = 1
    return dtm


def accumulate(images, kind, max_det):
    """Reference accumulate over per-image gt/dt dicts keyed by image id."""
    per_img = []
    for img_id in sorted(images):
        gts, dts = images[img_id]
        dts = sorted(dts, key=lambda d: -d["score"])[:max_det]
        if not dts:
            continue
        sim = compute_oks(dts, gts) if kind == "oks" else compute_iou(dts, gts)
        per_img.append((np.array([d["score"] for d in dts]),
                        evaluate_img(dts, gts, sim)))
    npig = sum(len(gts) for gts, _ in images.values())
    assert npig > 0

    if per_img:
        scores = np.concatenate([s for s, _ in per_img])
        dtm = np.concatenate([m for _, m in per_img], axis=1)
        inds = np.argsort(-scores, kind="mergesort")
        dtm = dtm[:, inds]
    else:
        dtm = np.zeros((len(THRESHOLDS), 0))

    ap = np.zeros(len(THRESHOLDS))
    ar = np.zeros(len(THRESHOLDS))
    for tind in range(len(THRESHOLDS)):
        tps = dtm[tind] > 0
        fps = dtm[tind] == 0
        tp_sum = np.cumsum(tps).astype(float)
        fp_sum = np.cumsum(fps).astype(float)
        nd = len(tp_sum)
        if nd == 0:
            continue
        rc = tp_sum / npig
        pr = (tp_sum / (fp_sum + tp_sum + np.spacing(1))).tolist()
        ar[tind] = rc[-1]
        q = [0.0] * len(RECALL_POINTS)
        for i in range(nd - 1, 0, -1):
            if pr[i] > pr[i - 1]:
                pr[i - 1] = pr[i]
        inds = np.searchsorted(rc, RECALL_POINTS, side="left")
        for ri, pi in enumerate(inds):
            if pi < nd:
                q[ri] = pr[pi]
        ap[tind] = np.mean(q)
    return ap, ar


# --- fixture synthesis --------------------------------------------------------

def random_pose(rng, cx, cy, spread, min_labeled=3):
    """A plausible canonical 51-tuple around (cx, cy)."""
    kps = []
    if min_labeled >= 17:
        flags = [int(v) for v in rng.choice([1, 2], size=17, p=[0.2, 0.8])]
    else:
        labeled, flags = 0, []
        while labeled < min_labeled:
            flags = [int(v) for v in rng.choice([0, 1, 2], size=17, p=[0.25, 0.15, 0.6])]
            labeled = sum(1 for v in flags if v > 0)
    for v in flags:
        if v == 0:
            kps.extend([0.0, 0.0, 0.0])
        else:
            kps.extend([round(float(cx + rng.normal(0, spread)), 2),
                        round(float(cy + rng.normal(0, spread)), 2), float(v)])
    return kps


def pose_bbox(kps):
    xs = [kps[i] for i in range(0, 51, 3) if kps[i + 2] > 0]
    ys = [kps[i + 1] for i in range(0, 51, 3) if kps[i + 2] > 0]
    x0, y0 = min(xs), min(ys)
    w = max(max(xs) - x0, 1.0)
    h = max(max(ys) - y0, 1.0)
    return [round(x0, 2), round(y0, 2), round(w, 2), round(h, 2)]


def jitter_pose(rng, kps, sigma):
    """Prediction from a gt pose: every joint reported, flags all 2."""
    out = []
    ref_x = [kps[i] for i in range(0, 51, 3) if kps[i + 2] > 0]
    ref_y = [kps[i + 1] for i in range(0, 51, 3) if kps[i + 2] > 0]
    cx, cy = float(np.mean(ref_x)), float(np.mean(ref_y))
    for j in range(17):
        x, y, v = kps[3 * j], kps[3 * j + 1], kps[3 * j + 2]
        if v == 0:
            x, y = cx, cy  # invent something near the body for unlabeled gt joints
        out.extend([round(x + float(rng.normal(0, sigma)), 2),
                    round(y + float(rng.normal(0, sigma)), 2), 2.0])
    return out


def build_oks_fixture(rng, n_images, persons_per_image, jitter, fp_rate, miss_rate,
                      score_ties=False):
    images, gt_anns, pred_anns = [], [], []
    next_gt, next_dt = 1, 1
    for i in range(n_images):
        img_id = i + 1
        images.append({"id": img_id, "width": 640, "height": 640,
                       "file_name": f"img_{img_id:04d}.jpg"})
        n_persons = int(rng.integers(persons_per_image[0], persons_per_image[1] + 1))
        for _ in range(n_persons):
            cx, cy = rng.uniform(100, 540, size=2)
            kps = random_pose(rng, cx, cy, spread=40.0)
            bbox = pose_bbox(kps)
            area = round(bbox[2] * bbox[3], 2)
            gt_anns.append({"id": next_gt, "image_id": img_id, "bbox": bbox,
                            "area": area,
                            "keypoints": kps,
                            "num_keypoints": sum(1 for j in range(2, 51, 3) if kps[j] > 0)})
            next_gt += 1
            if rng.random() >= miss_rate:
                pk = jitter_pose(rng, kps, sigma=jitter * np.sqrt(area))
                score = (round(float(rng.integers(1, 10)) / 10.0, 6) if score_ties
                         else round(float(rng.uniform(0.05, 0.99)), 6))
                pred_anns.append({"id": next_dt, "image_id": img_id,
                                  "bbox": pose_bbox(pk),
                                  "area": round(pose_bbox(pk)[2] * pose_bbox(pk)[3], 2),
                                  "keypoints": pk,
                                  "num_keypoints": 17,
                                  "score": score})
                next_dt += 1
        n_fp = int(rng.binomial(2 * max(n_persons, 1), min(0.9, fp_rate)))
        for _ in range(n_fp):
            cx, cy = rng.uniform(100, 540, size=2)
            kps = random_pose(rng, cx, cy, spread=35.0, min_labeled=17)
            pk = [v if (i % 3) != 2 else 2.0 for i, v in enumerate(kps)]
            score = (round(float(rng.integers(1, 10)) / 10.0, 6) if score_ties
                     else round(float(rng.uniform(0.05, 0.99)), 6))
            pred_anns.append({"id": next_dt, "image_id": img_id,
                              "bbox": pose_bbox(pk),
                              "area": round(pose_bbox(pk)[2] * pose_bbox(pk)[3], 2),
                              "keypoints": pk, "num_keypoints": 17,
                              "score": score})
            next_dt += 1
    return images, gt_anns, pred_anns


def build_perfect_fixture(rng, n_images=4):
    images, gt_anns, pred_anns = [], [], []
    next_id = 1
    for i in range(n_images):
        img_id = i + 1
        images.append({"id": img_id, "width": 640, "height": 640,
                       "file_name": f"img_{img_id:04d}.jpg"})
        for _ in range(int(rng.integers(2, 5))):
            cx, cy = rng.uniform(150, 500, size=2)
            kps = random_pose(rng, cx, cy, spread=45.0, min_labeled=17)
            bbox = pose_bbox(kps)
            gt_anns.append({"id": next_id, "image_id": img_id, "bbox": bbox,
                            "area": round(bbox[2] * bbox[3], 2), "keypoints": kps,
                            "num_keypoints": 17})
            pred_anns.append({"id": next_id, "image_id": img_id, "bbox": bbox,
                              "area": round(bbox[2] * bbox[3], 2), "keypoints": kps,
                              "num_keypoints": 17,
                              "score": round(float(rng.uniform(0.5, 0.99)), 6)})
            next_id += 1
    return images, gt_anns, pred_anns


def build_iou_fixture(rng, n_images=8):
    images, gt_anns, pred_anns = [], [], []
    next_gt, next_dt = 1, 1
    for i in range(n_images):
        img_id = i + 1
        images.append({"id": img_id, "width": 800, "height": 600,
                       "file_name": f"box_{img_id:04d}.jpg"})
        for _ in range(int(rng.integers(1, 7))):
            x, y = rng.uniform(0, 600), rng.uniform(0, 400)
            w, h = rng.uniform(40, 180), rng.uniform(40, 180)
            bbox = [round(v, 2) for v in (x, y, w, h)]
            gt_anns.append({"id": next_gt, "image_id": img_id, "bbox": bbox,
                            "area": round(bbox[2] * bbox[3], 2)})
            next_gt += 1
            if rng.random() < 0.85:
                shift = rng.normal(0, 0.12 * min(w, h), size=4)
                pb = [round(max(v, 1.0), 2) for v in
                      (x + shift[0], y + shift[1], w + shift[2], h + shift[3])]
                pred_anns.append({"id": next_dt, "image_id": img_id, "bbox": pb,
                                  "area": round(pb[2] * pb[3], 2),
                                  "score": round(float(rng.uniform(0.05, 0.99)), 6)})
                next_dt += 1
        for _ in range(int(rng.integers(0, 3))):
            x, y = rng.uniform(0, 600), rng.uniform(0, 400)
            w, h = rng.uniform(30, 120), rng.uniform(30, 120)
            pb = [round(v, 2) for v in (x, y, w, h)]
            pred_anns.append({"id": next_dt, "image_id": img_id, "bbox": pb,
                              "area": round(pb[2] * pb[3], 2),
                              "score": round(float(rng.uniform(0.05, 0.99)), 6)})
            next_dt += 1
    return images, gt_anns, pred_anns


def write_fixture(name, kind, images, gt_anns, pred_anns, max_det):
    category = {"id": 1, "name": "person", "keypoints": KEYPOINT_NAMES,
                "skeleton": SKELETON}
    for fname, anns in ((f"{name}_gt.json", gt_anns), (f"{name}_pred.json", pred_anns)):
        doc = {"images": images, "annotations": anns, "categories": [category]}
        (OUT_DIR / fname).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")

    by_img = {img["id"]: ([g for g in gt_anns if g["image_id"] == img["id"]],
                          [d for d in pred_anns if d["image_id"] == img["id"]])
              for img in images}
    ap, ar = accumulate(by_img, kind, max_det)
    golden = {
        "kind": kind,
        "max_detections": max_det,
        "per_threshold": [
            {"threshold": round(float(t), 2), "ap": float(a), "ar": float(r)}
            for t, a, r in zip(THRESHOLDS, ap, ar)],
        "map": float(np.mean(ap)),
        "mar": float(np.mean(ar)),
    }
    (OUT_DIR / f"{name}_golden.json").write_text(
        json.dumps(golden, indent=2) + "\n", encoding="utf-8")

    lines = [f"metric={kind} thresholds={len(THRESHOLDS)} max_detections={max_det}"]
    for t, a, r in zip(THRESHOLDS, ap, ar):
        lines.append(f"threshold={t:.2f} ap={a:.6f} ar={r:.6f}")
    lines.append(f"mAP={np.mean(ap):.6f} mAR={np.mean(ar):.6f}")
    (OUT_DIR / f"{name}_report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"{name:14s} kind={kind} gts={len(gt_anns):3d} dts={len(pred_anns):3d} "
          f"mAP={np.mean(ap):.6f} mAR={np.mean(ar):.6f}")


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20210614)

    images, g, p = build_perfect_fixture(rng)
    write_fixture("perfect_oks", "oks", images, g, p, max_det=20)

    images, g, p = build_oks_fixture(rng, n_images=6, persons_per_image=(1, 5),
                                     jitter=0.04, fp_rate=0.2, miss_rate=0.15)
    write_fixture("jittered_oks", "oks", images, g, p, max_det=20)

    # one image deliberately exceeds the 20-detection cap
    images, g, p = build_oks_fixture(rng, n_images=3, persons_per_image=(9, 12),
                                     jitter=0.08, fp_rate=0.6, miss_rate=0.05)
    write_fixture("crowded_oks", "oks", images, g, p, max_det=20)

    # integer-decile scores force exact ties across images
    images, g, p = build_oks_fixture(rng, n_images=5, persons_per_image=(1, 4),
                                     jitter=0.06, fp_rate=0.3, miss_rate=0.2,
                                     score_ties=True)
    write_fixture("tied_scores_oks", "oks", images, g, p, max_det=20)

    images, g, p = build_iou_fixture(rng)
    write_fixture("boxes_iou", "iou", images, g, p, max_det=100)


if __name__ == "__main__":
    main()
