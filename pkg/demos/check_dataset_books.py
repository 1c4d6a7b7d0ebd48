"""
Checking dataset bookkeeping with manifests
===========================================

Every dataset ships as a train/val pair.  A manifest records how many
images, person boxes, and posed annotations each split holds, and the
validator re-derives the published totals from the split counts.
"""

from poseforge import DatasetManifest, DatasetName, Split, validate_manifests

# Published totals per dataset: images, persons, poses.
TOTALS = {
    DatasetName.CP: {"images": 122999, "persons": 262742, "poses": 156165},
    DatasetName.SCP: {"images": 57863, "persons": 71052, "poses": 0},
    DatasetName.CA: {"images": 1774, "persons": 3142, "poses": 1728},
}

# Split-level counts as they would arrive from the ingest pipeline.
manifests = [
    DatasetManifest(DatasetName.CP, Split.TRAIN, 110992, 237034, 140684),
    DatasetManifest(DatasetName.CP, Split.VAL, 12007, 25708, 15481),
    DatasetManifest(DatasetName.SCP, Split.TRAIN, 52228, 64110, 0),
    DatasetManifest(DatasetName.SCP, Split.VAL, 5635, 6942, 0),
    DatasetManifest(DatasetName.CA, Split.TRAIN, 1597, 2829, 1555),
    DatasetManifest(DatasetName.CA, Split.VAL, 177, 313, 173),
]

report = validate_manifests(manifests, TOTALS)
print(report.to_text())
print("all passed:", report.all_passed)

# A transcription slip in one split count shows up as a signed delta.
broken = list(manifests)
broken[0] = DatasetManifest(DatasetName.CP, Split.TRAIN, 110992, 237034, 140600)
report = validate_manifests(broken, TOTALS)
for row in report.rows:
    if not row.passed:
        print(f"{row.dataset.value} {row.quantity}: off by {row.delta}")
