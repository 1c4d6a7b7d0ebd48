"""
Parsing and writing keypoint annotation files
=============================================

The ingest layer reads COCO-style JSON, validates every field, and can
serialize a document back to bytes that re-parse to the same object.
"""

import json

from poseforge import parse_annotations, write_annotations
from poseforge.errors import PoseforgeError

DOC = {
    "images": [
        {"id": 1, "width": 640, "height": 480, "file_name": "frame_0001.png"},
    ],
    "annotations": [
        {
            "id": 10,
            "image_id": 1,
            "bbox": [100.0, 80.0, 120.0, 260.0],
            "area": 31200.0,
            "num_keypoints": 2,
            # x, y, visibility for 17 joints; only the first two are labeled
            "keypoints": [160.0, 95.0, 2.0, 170.0, 92.0, 1.0] + [0.0] * 45,
        },
    ],
    "categories": [],
}

doc = parse_annotations(json.dumps(DOC))
person = doc.annotations[0].instance
print("images:", len(doc.images), " annotations:", len(doc.annotations))
print("box:", person.box, " area:", person.area)
print("labeled joints:", int((person.pose.vis > 0).sum()))

# Serialization is deterministic: write, re-parse, compare.
blob = write_annotations(doc)
assert parse_annotations(blob) == doc
print("round trip: identical,", len(blob), "bytes")

# Validation failures carry the path of the offending field.
bad = json.loads(json.dumps(DOC))
bad["annotations"][0]["keypoints"][2] = 7.0  # visibility must be 0, 1, or 2
try:
    parse_annotations(json.dumps(bad))
except PoseforgeError as err:
    print("rejected:", err)
