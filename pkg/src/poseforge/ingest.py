"""Annotation and label file ingest.

Parses and writes keypoint annotation documents in the COCO interchange
layout, and comma-separated person label files for retrieval. Parsing
is total: every input either yields a document or raises one
categorized error. Unknown fields on records are preserved verbatim so
that files produced by other tools survive a round-trip.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from .core import (
    FLAT_POSE_LENGTH,
    KEYPOINT_NAMES,
    NUM_JOINTS,
    SKELETON_EDGES,
    BoundingBox,
    ImageId,
    PersonId,
    PersonInstance,
    PoseAnnotation,
    normalize_pose,
)
from .errors import (
    AnnotationSyntaxError,
    DanglingImageReference,
    DuplicateId,
    DuplicatePersonId,
    PoseforgeError,
    SchemaViolation,
    UnknownCharacter,
    UnknownScene,
)

MAX_CHARACTERS = 15
MAX_SCENES = 5

LABEL_HEADER = ("person_id", "character", "scene")


@dataclass(frozen=True)
class ImageEntry:
    """Raw image header from an annotation file."""

    id: ImageId
    width: int
    height: int
    file_name: str = ""
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PersonEntry:
    """One annotation record: the parsed instance plus preserved extras."""

    instance: PersonInstance
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CategoryDescriptor:
    """Person category: joint names and skeleton edge list."""

    id: int = 1
    name: str = "person"
    keypoint_names: tuple[str, ...] = KEYPOINT_NAMES
    skeleton: tuple[tuple[int, int], ...] = SKELETON_EDGES
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AnnotationDocument:
    images: tuple[ImageEntry, ...]
    annotations: tuple[PersonEntry, ...]
    categories: tuple[CategoryDescriptor, ...] = (CategoryDescriptor(),)

    def __post_init__(self):
        image_ids: set = set()
        for img in self.images:
            if img.id in image_ids:
                raise DuplicateId("image", img.id)
            image_ids.add(img.id)
        seen: set = set()
        for entry in self.annotations:
            if entry.instance.id in seen:
                raise DuplicateId("annotation", entry.instance.id)
            seen.add(entry.instance.id)
            if entry.instance.image_id not in image_ids:
                raise DanglingImageReference(entry.instance.id)

    def instances_by_image(self) -> dict[ImageId, list[PersonInstance]]:
        out: dict[ImageId, list[PersonInstance]] = {img.id: [] for img in self.images}
        for entry in self.annotations:
            out[entry.instance.image_id].append(entry.instance)
        return out

    @property
    def pose_count(self) -> int:
        return sum(1 for e in self.annotations if e.instance.pose is not None)


@dataclass(frozen=True)
class LabelVocabulary:
    """Closed character and scene name sets for retrieval labels."""

    characters: frozenset[str]
    scenes: frozenset[str]

    def __post_init__(self):
        if len(self.characters) > MAX_CHARACTERS:
            raise SchemaViolation(
                f"vocabulary lists {len(self.characters)} characters, cap is {MAX_CHARACTERS}",
                field_path="characters")
        if len(self.scenes) > MAX_SCENES:
            raise SchemaViolation(
                f"vocabulary lists {len(self.scenes)} scenes, cap is {MAX_SCENES}",
                field_path="scenes")


@dataclass(frozen=True)
class RetrievalLabel:
    character: str
    scene: str


_IMAGE_KEYS = ("id", "width", "height", "file_name")
_ANNOTATION_KEYS = ("id", "image_id", "bbox", "area", "keypoints", "num_keypoints", "score")
_CATEGORY_KEYS = ("id", "name", "keypoints", "skeleton")


def _fail(message: str, path: str) -> SchemaViolation:
    return SchemaViolation(f"{path}: {message}", field_path=path)


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise _fail(f"missing required field {key!r}", path)
    return obj[key]


def _as_object(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise _fail(f"expected an object, got {type(value).__name__}", path)
    return value


def _as_array(value, path: str) -> list:
    if not isinstance(value, list):
        raise _fail(f"expected an array, got {type(value).__name__}", path)
    return value


def _as_id(value, path: str) -> Union[int, str]:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise _fail(f"id must be an integer or string, got {type(value).__name__}", path)
    return value


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(f"expected an integer, got {value!r}", path)
    return value


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(f"expected a number, got {value!r}", path)
    if not math.isfinite(value):
        raise _fail(f"expected a finite number, got {value!r}", path)
    return float(value)


def _as_string(value, path: str) -> str:
    if not isinstance(value, str):
        raise _fail(f"expected a string, got {type(value).__name__}", path)
    return value


def _decode(data: Union[bytes, str]) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise AnnotationSyntaxError(f"not valid UTF-8: {exc.reason}", position=exc.start) from exc


def _parse_image(raw, path: str) -> ImageEntry:
    obj = _as_object(raw, path)
    image_id = _as_id(_require(obj, "id", path), f"{path}.id")
    width = _as_int(_require(obj, "width", path), f"{path}.width")
    height = _as_int(_require(obj, "height", path), f"{path}.height")
    if width <= 0 or height <= 0:
        raise _fail(f"dimensions must be positive, got {width}x{height}", path)
    file_name = _as_string(obj.get("file_name", ""), f"{path}.file_name")
    extras = {k: v for k, v in obj.items() if k not in _IMAGE_KEYS}
    return ImageEntry(id=image_id, width=width, height=height,
                      file_name=file_name, extras=extras)


def _parse_annotation(raw, path: str, image_ids: set) -> PersonEntry:
    obj = _as_object(raw, path)
    ann_id = _as_id(_require(obj, "id", path), f"{path}.id")
    image_id = _as_id(_require(obj, "image_id", path), f"{path}.image_id")
    if image_id not in image_ids:
        raise DanglingImageReference(ann_id)

    bbox = _as_array(_require(obj, "bbox", path), f"{path}.bbox")
    if len(bbox) != 4:
        raise _fail(f"bbox needs 4 numbers, got {len(bbox)}", f"{path}.bbox")
    bx, by, bw, bh = (_as_number(v, f"{path}.bbox[{i}]") for i, v in enumerate(bbox))
    try:
        box = BoundingBox(bx, by, bw, bh)
    except (PoseforgeError, ValueError) as exc:
        raise _fail(str(exc), f"{path}.bbox") from exc

    area = _as_number(_require(obj, "area", path), f"{path}.area")
    if area < 0:
        raise _fail(f"area must be non-negative, got {area}", f"{path}.area")

    pose: Optional[PoseAnnotation] = None
    if "keypoints" in obj:
        flat = _as_array(obj["keypoints"], f"{path}.keypoints")
        if len(flat) != FLAT_POSE_LENGTH:
            raise _fail(f"keypoints needs {FLAT_POSE_LENGTH} numbers, got {len(flat)}",
                        f"{path}.keypoints")
        values = [_as_number(v, f"{path}.keypoints[{i}]") for i, v in enumerate(flat)]
        try:
            pose = normalize_pose(values)
        except PoseforgeError as exc:
            raise _fail(str(exc), f"{path}.keypoints") from exc
        if "num_keypoints" in obj:
            declared = _as_int(obj["num_keypoints"], f"{path}.num_keypoints")
            if declared != pose.num_labeled:
                raise _fail(f"num_keypoints is {declared} but {pose.num_labeled} joints are labeled",
                            f"{path}.num_keypoints")
    elif "num_keypoints" in obj:
        raise _fail("num_keypoints given without keypoints", f"{path}.num_keypoints")

    score: Optional[float] = None
    if "score" in obj:
        score = _as_number(obj["score"], f"{path}.score")

    try:
        instance = PersonInstance(id=ann_id, image_id=image_id, box=box,
                                  area=area, pose=pose, score=score)
    except (PoseforgeError, ValueError) as exc:
        raise _fail(str(exc), path) from exc
    extras = {k: v for k, v in obj.items() if k not in _ANNOTATION_KEYS}
    return PersonEntry(instance=instance, extras=extras)


def _parse_category(raw, path: str) -> CategoryDescriptor:
    obj = _as_object(raw, path)
    cat_id = _as_int(obj.get("id", 1), f"{path}.id")
    name = _as_string(obj.get("name", "person"), f"{path}.name")
    names = tuple(_as_string(v, f"{path}.keypoints[{i}]")
                  for i, v in enumerate(_as_array(_require(obj, "keypoints", path),
                                                  f"{path}.keypoints")))
    if len(names) != NUM_JOINTS:
        raise _fail(f"category needs {NUM_JOINTS} keypoint names, got {len(names)}",
                    f"{path}.keypoints")
    edges = []
    for i, pair in enumerate(_as_array(_require(obj, "skeleton", path), f"{path}.skeleton")):
        edge_path = f"{path}.skeleton[{i}]"
        pair = _as_array(pair, edge_path)
        if len(pair) != 2:
            raise _fail("edge needs exactly 2 joint indices", edge_path)
        a, b = (_as_int(v, edge_path) for v in pair)
        if not (1 <= a <= NUM_JOINTS and 1 <= b <= NUM_JOINTS):
            raise _fail(f"joint indices must lie in [1, {NUM_JOINTS}], got ({a}, {b})", edge_path)
        edges.append((a, b))
    extras = {k: v for k, v in obj.items() if k not in _CATEGORY_KEYS}
    return CategoryDescriptor(id=cat_id, name=name, keypoint_names=names,
                              skeleton=tuple(edges), extras=extras)


def parse_annotations(data: Union[bytes, str]) -> AnnotationDocument:
    """Parse a COCO-layout keypoint annotation document.

    Raises AnnotationSyntaxError for malformed text, SchemaViolation for
    structural problems, DuplicateId and DanglingImageReference for
    broken cross-references.
    """
    text = _decode(data)
    try:
        root = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AnnotationSyntaxError(f"line {exc.lineno}: {exc.msg}", position=exc.pos) from exc

    root = _as_object(root, "$")
    images = []
    image_ids: set = set()
    for i, raw in enumerate(_as_array(_require(root, "images", "$"), "$.images")):
        entry = _parse_image(raw, f"$.images[{i}]")
        if entry.id in image_ids:
            raise DuplicateId("image", entry.id)
        image_ids.add(entry.id)
        images.append(entry)

    annotations = []
    seen_ann: set = set()
    for i, raw in enumerate(_as_array(_require(root, "annotations", "$"), "$.annotations")):
        entry = _parse_annotation(raw, f"$.annotations[{i}]", image_ids)
        if entry.instance.id in seen_ann:
            raise DuplicateId("annotation", entry.instance.id)
        seen_ann.add(entry.instance.id)
        annotations.append(entry)

    categories = tuple(
        _parse_category(raw, f"$.categories[{i}]")
        for i, raw in enumerate(_as_array(root.get("categories", []), "$.categories")))
    if not categories:
        categories = (CategoryDescriptor(),)

    return AnnotationDocument(images=tuple(images), annotations=tuple(annotations),
                              categories=categories)


def _image_to_json(entry: ImageEntry) -> dict:
    out = {"id": entry.id, "width": entry.width, "height": entry.height,
           "file_name": entry.file_name}
    out.update(sorted(entry.extras.items()))
    return out


def _annotation_to_json(entry: PersonEntry) -> dict:
    inst = entry.instance
    out: dict = {"id": inst.id, "image_id": inst.image_id,
                 "bbox": list(inst.box.as_xywh()), "area": inst.area}
    if inst.pose is not None:
        out["keypoints"] = list(inst.pose.to_flat())
        out["num_keypoints"] = inst.pose.num_labeled
    if inst.score is not None:
        out["score"] = inst.score
    out.update(sorted(entry.extras.items()))
    return out


def _category_to_json(cat: CategoryDescriptor) -> dict:
    out: dict = {"id": cat.id, "name": cat.name,
                 "keypoints": list(cat.keypoint_names),
                 "skeleton": [list(e) for e in cat.skeleton]}
    out.update(sorted(cat.extras.items()))
    return out


def write_annotations(doc: AnnotationDocument) -> bytes:
    """Serialize a document; output is deterministic and re-parses equal."""
    root = {
        "images": [_image_to_json(e) for e in doc.images],
        "annotations": [_annotation_to_json(e) for e in doc.annotations],
        "categories": [_category_to_json(c) for c in doc.categories],
    }
    return (json.dumps(root, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def find_out_of_bounds(doc: AnnotationDocument) -> list[tuple[PersonId, int]]:
    """Flag labeled joints lying outside their image frame.

    Returns (annotation id, joint index) pairs; out-of-frame joints are
    reported, not rejected, because source annotations legitimately
    extend past crop borders.
    """
    frames = {img.id: (img.width, img.height) for img in doc.images}
    flagged = []
    for entry in doc.annotations:
        inst = entry.instance
        if inst.pose is None:
            continue
        w, h = frames[inst.image_id]
        for j, kp in enumerate(inst.pose.keypoints):
            if kp.labeled and not (0.0 <= kp.x <= w and 0.0 <= kp.y <= h):
                flagged.append((inst.id, j))
    return flagged


def load_vocabulary(data: Union[bytes, str]) -> LabelVocabulary:
    """Read a JSON vocabulary: {"characters": [...], "scenes": [...]}."""
    text = _decode(data)
    try:
        root = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AnnotationSyntaxError(f"line {exc.lineno}: {exc.msg}", position=exc.pos) from exc
    root = _as_object(root, "$")
    characters = frozenset(_as_string(v, f"$.characters[{i}]")
                           for i, v in enumerate(_as_array(_require(root, "characters", "$"),
                                                           "$.characters")))
    scenes = frozenset(_as_string(v, f"$.scenes[{i}]")
                       for i, v in enumerate(_as_array(_require(root, "scenes", "$"),
                                                       "$.scenes")))
    return LabelVocabulary(characters=characters, scenes=scenes)


def parse_retrieval_labels(data: Union[bytes, str],
                           vocabulary: Optional[LabelVocabulary] = None,
                           ) -> dict[str, RetrievalLabel]:
    """Parse a person label table: header person_id,character,scene.

    With a vocabulary, names outside it raise UnknownCharacter or
    UnknownScene. Without one, the vocabulary is inferred but still
    capped at 15 characters and 5 scenes.
    """
    text = _decode(data)
    rows = csv.reader(io.StringIO(text))
    try:
        header = next(rows)
    except StopIteration:
        raise SchemaViolation("empty label file", field_path="header") from None
    except csv.Error as exc:
        raise AnnotationSyntaxError(f"malformed csv: {exc}") from exc
    if tuple(header) != LABEL_HEADER:
        raise SchemaViolation(f"header must be {','.join(LABEL_HEADER)}, got {','.join(header)}",
                              field_path="header")

    out: dict[str, RetrievalLabel] = {}
    seen_characters: set[str] = set()
    seen_scenes: set[str] = set()
    try:
        for lineno, row in enumerate(rows, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise SchemaViolation(f"line {lineno}: expected 3 fields, got {len(row)}",
                                      field_path=f"line {lineno}")
            person_id, character, scene = (v.strip() for v in row)
            if not person_id:
                raise SchemaViolation(f"line {lineno}: empty person_id",
                                      field_path=f"line {lineno}")
            if person_id in out:
                raise DuplicatePersonId(person_id)
            if vocabulary is not None:
                if character not in vocabulary.characters:
                    raise UnknownCharacter(character)
                if scene not in vocabulary.scenes:
                    raise UnknownScene(scene)
            else:
                seen_characters.add(character)
                seen_scenes.add(scene)
                if len(seen_characters) > MAX_CHARACTERS:
                    raise UnknownCharacter(character)
                if len(seen_scenes) > MAX_SCENES:
                    raise UnknownScene(scene)
            out[person_id] = RetrievalLabel(character=character, scene=scene)
    except csv.Error as exc:
        raise AnnotationSyntaxError(f"malformed csv: {exc}") from exc
    return out


def write_retrieval_labels(labels: Mapping[str, RetrievalLabel]) -> bytes:
    """Serialize a label map in insertion order with the standard header."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LABEL_HEADER)
    for person_id, label in labels.items():
        writer.writerow((person_id, label.character, label.scene))
    return buf.getvalue().encode("utf-8")
