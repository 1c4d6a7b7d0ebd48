#!/usr/bin/env python3
"""Generate the ClassArch validation-split fixture.

Emits a dataset with the published validation counts (303 images, 531
person boxes, 303 pose annotations), a person label table, the closed
label vocabulary, and the split-count manifest for all three datasets.
Poses are drawn from one template per character with noise, so
same-character poses really are nearer to each other and retrieval
summaries on this fixture are meaningful.

Run from the repository root:  python3 tools/gen_ca_fixture.py
"""

import csv
import io
import json
from pathlib import Path

import numpy as np

FIX_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
CA_DIR = FIX_DIR / "ca_val"

N_IMAGES = 303
N_PERSONS = 531
N_POSES = 303

CHARACTERS = [
    "persecutor", "fleeing", "bride", "wrestler", "groom",
    "athlete", "youth", "maiden", "satyr", "warrior",
    "charioteer", "musician", "dancer", "goddess", "herald"]
SCENES = ["pursuit", "leading_bride", "abduction", "wrestling", "komos"]

KEYPOINT_NAMES = [
    "nose", "left_eye", "right_eye", "left_ear", "right_ear",
    "left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
    "left_wrist", "right_wrist", "left_hip", "right_hip",
    "left_knee", "right_knee", "left_ankle", "right_ankle"]
SKELETON = [
    [16, 14], [14, 12], [17, 15], [15, 13], [12, 13], [6, 12], [7, 13],
    [6, 7], [6, 8], [7, 9], [8, 10], [9, 11], [2, 3], [1, 2], [1, 3],
    [2, 4], [3, 5], [4, 6], [5, 7]]

# rough standing figure in a unit box: (x, y) per joint, y grows downward
BASE_FIGURE = np.array([
    [0.50, 0.08], [0.47, 0.06], [0.53, 0.06], [0.44, 0.08], [0.56, 0.08],
    [0.38, 0.22], [0.62, 0.22], [0.32, 0.38], [0.68, 0.38],
    [0.28, 0.52], [0.72, 0.52], [0.42, 0.52], [0.58, 0.52],
    [0.40, 0.72], [0.60, 0.72], [0.38, 0.92], [0.62, 0.92]])


def character_templates(rng):
    """One deformation of the base figure per character."""
    out = {}
    for name in CHARACTERS:
        warp = rng.normal(0.0, 0.06, size=(17, 2))
        out[name] = np.clip(BASE_FIGURE + warp, 0.02, 0.98)
    return out


def make_pose(rng, template, origin, scale):
    pts = template + rng.normal(0.0, 0.015, size=(17, 2))
    pts = origin + pts * scale
    flags = rng.choice([0, 1, 2], size=17, p=[0.12, 0.18, 0.70])
    if not (flags > 0).any():
        flags[0] = 2
    kps = []
    for (x, y), v in zip(pts, flags):
        if v == 0:
            kps.extend([0.0, 0.0, 0])
        else:
            kps.extend([round(float(x), 2), round(float(y), 2), int(v)])
    return kps


def bbox_of(kps):
    xs = [kps[i] for i in range(0, 51, 3) if kps[i + 2] > 0]
    ys = [kps[i + 1] for i in range(0, 51, 3) if kps[i + 2] > 0]
    x0, y0 = min(xs), min(ys)
    w, h = max(max(xs) - x0, 4.0), max(max(ys) - y0, 4.0)
    return [round(x0, 2), round(y0, 2), round(w, 2), round(h, 2)]


def main():
    CA_DIR.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(19520303)
    templates = character_templates(rng)

    images = []
    annotations = []
    label_rows = []
    # one posed central figure per image; remaining boxes are unposed extras
    extra_per_image = rng.multinomial(N_PERSONS - N_POSES, np.ones(N_IMAGES) / N_IMAGES)
    person_serial = 0
    for i in range(N_IMAGES):
        img_id = i + 1
        width, height = 640, 480
        images.append({"id": img_id, "width": width, "height": height,
                       "file_name": f"vase_{img_id:04d}.jpg"})
        scene = SCENES[int(rng.integers(len(SCENES)))]
        character = CHARACTERS[int(rng.integers(len(CHARACTERS)))]

        person_serial += 1
        pid = f"ca_{person_serial:04d}"
        # central figures sit roughly centered at similar scale, as in
        # cropped vase photographs; OKS compares absolute coordinates
        scale = float(rng.uniform(180, 230))
        origin = np.array([(width - scale) / 2 + rng.uniform(-25, 25),
                           (height - scale * 0.9) / 2 + rng.uniform(-20, 20)])
        kps = make_pose(rng, templates[character], origin, scale)
        bbox = bbox_of(kps)
        annotations.append({
            "id": pid, "image_id": img_id, "bbox": bbox,
            "area": round(bbox[2] * bbox[3], 2), "keypoints": kps,
            "num_keypoints": sum(1 for j in range(2, 51, 3) if kps[j] > 0)})
        label_rows.append((pid, character, scene))

        for _ in range(int(extra_per_image[i])):
            person_serial += 1
            x, y = rng.uniform(0, width - 60), rng.uniform(0, height - 80)
            w, h = rng.uniform(30, 120), rng.uniform(50, 160)
            bbox = [round(v, 2) for v in (x, y, w, h)]
            annotations.append({
                "id": f"ca_{person_serial:04d}", "image_id": img_id, "bbox": bbox,
                "area": round(bbox[2] * bbox[3], 2)})

    doc = {"images": images, "annotations": annotations,
           "categories": [{"id": 1, "name": "person",
                           "keypoints": KEYPOINT_NAMES, "skeleton": SKELETON}]}
    (CA_DIR / "annotations.json").write_text(json.dumps(doc, indent=2) + "\n",
                                             encoding="utf-8")

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["person_id", "character", "scene"])
    writer.writerows(label_rows)
    (CA_DIR / "labels.csv").write_text(buf.getvalue(), encoding="utf-8")

    (CA_DIR / "vocabulary.json").write_text(
        json.dumps({"characters": CHARACTERS, "scenes": SCENES}, indent=2) + "\n",
        encoding="utf-8")

    manifest = {"datasets": [
        {"name": "CP",
         "train": {"images": 64115, "persons": 257252, "poses": 149813},
         "val": {"images": 2693, "persons": 10777, "poses": 6352},
         "total": {"images": 66808, "persons": 268029, "poses": 156165}},
        {"name": "SCP",
         "train": {"images": 64115, "persons": 257252, "poses": 149813},
         "val": {"images": 2693, "persons": 10777, "poses": 6352},
         "total": {"images": 66808, "persons": 268029, "poses": 156165}},
        {"name": "CA",
         "train": {"images": 1210, "persons": 2098, "poses": 1425},
         "val": {"images": 303, "persons": 531, "poses": 303},
         "total": {"images": 1513, "persons": 2629, "poses": 1728}},
    ]}
    (FIX_DIR / "manifest_table1.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8")

    n_posed = sum(1 for a in annotations if "keypoints" in a)
    print(f"images={len(images)} persons={len(annotations)} poses={n_posed} "
          f"labels={len(label_rows)}")


if __name__ == "__main__":
    main()
