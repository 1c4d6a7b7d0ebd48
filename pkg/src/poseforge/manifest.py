"""Dataset split bookkeeping: per-split counts and total identities.

A manifest file records, for each dataset, the train/val counts of images,
person boxes and pose annotations together with the published totals; the
validator checks every train + val = total identity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .errors import MissingSplit, SchemaViolation

QUANTITIES = ("images", "persons", "poses")


class DatasetName(str, Enum):
    CP = "CP"
    SCP = "SCP"
    CA = "CA"


class Split(str, Enum):
    TRAIN = "train"
    VAL = "val"


@dataclass(frozen=True)
class DatasetManifest:
    """Counts for one (dataset, split) pair."""

    name: DatasetName
    split: Split
    image_count: int
    person_count: int
    pose_count: int

    def __post_init__(self):
        for label, value in (("image", self.image_count),
                             ("person", self.person_count),
                             ("pose", self.pose_count)):
            if value < 0:
                raise ValueError(f"{label} count must be non-negative, got {value}")

    def count(self, quantity: str) -> int:
        return {"images": self.image_count,
                "persons": self.person_count,
                "poses": self.pose_count}[quantity]


@dataclass(frozen=True)
class ValidationRow:
    """Outcome of one train + val = total identity check."""

    dataset: DatasetName
    quantity: str
    train: int
    val: int
    total: int
    expected_total: int

    @property
    def passed(self) -> bool:
        return self.total == self.expected_total

    @property
    def delta(self) -> int:
        return self.total - self.expected_total


@dataclass(frozen=True)
class ValidationReport:
    rows: tuple[ValidationRow, ...]

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_text(self) -> str:
        lines = []
        for r in self.rows:
            status = "pass" if r.passed else f"FAIL delta={r.delta:+d}"
            lines.append(f"{r.dataset.value:<4} {r.quantity:<8} "
                         f"{r.train} + {r.val} = {r.total} (expected {r.expected_total}) {status}")
        verdict = "all identities hold" if self.all_passed else "identity violations found"
        lines.append(f"summary: {verdict} ({sum(r.passed for r in self.rows)}/{len(self.rows)} pass)")
        return "\n".join(lines) + "\n"


def validate_manifests(manifests: Iterable[DatasetManifest],
                       expected_totals: Mapping[DatasetName, Mapping[str, int]]) -> ValidationReport:
    """Check train + val = total for every dataset and quantity.

    Raises MissingSplit when a dataset named in ``expected_totals`` lacks
    either split.
    """
    by_key = {(m.name, m.split): m for m in manifests}
    rows = []
    for name in sorted(expected_totals, key=lambda n: n.value):
        for split in (Split.TRAIN, Split.VAL):
            if (name, split) not in by_key:
                raise MissingSplit(f"dataset {name.value} has no {split.value} manifest")
        train = by_key[(name, Split.TRAIN)]
        val = by_key[(name, Split.VAL)]
        for quantity in QUANTITIES:
            rows.append(ValidationRow(
                dataset=name,
                quantity=quantity,
                train=train.count(quantity),
                val=val.count(quantity),
                total=train.count(quantity) + val.count(quantity),
                expected_total=int(expected_totals[name][quantity]),
            ))
    return ValidationReport(tuple(rows))


def load_manifest_file(path) -> tuple[list[DatasetManifest], dict[DatasetName, dict[str, int]]]:
    """Read a manifest JSON file; returns (split manifests, expected totals)."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "datasets" not in doc:
        raise SchemaViolation("manifest file needs a top-level 'datasets' list", "datasets")
    manifests: list[DatasetManifest] = []
    totals: dict[DatasetName, dict[str, int]] = {}
    for i, entry in enumerate(doc["datasets"]):
        path_prefix = f"datasets[{i}]"
        try:
            name = DatasetName(entry["name"])
        except (KeyError, ValueError) as exc:
            raise SchemaViolation(f"bad dataset name: {exc}", f"{path_prefix}.name")
        for split in (Split.TRAIN, Split.VAL):
            counts = entry.get(split.value)
            if counts is None:
                raise MissingSplit(f"dataset {name.value} has no {split.value} manifest")
            manifests.append(DatasetManifest(
                name=name, split=split,
                image_count=int(counts["images"]),
                person_count=int(counts["persons"]),
                pose_count=int(counts["poses"]),
            ))
        if "total" not in entry:
            raise SchemaViolation(f"dataset {name.value} has no totals", f"{path_prefix}.total")
        totals[name] = {q: int(entry["total"][q]) for q in QUANTITIES}
    return manifests, totals
