"""Pose retrieval: an OKS-ranked index with P@k and mean-AP summaries.

The query pose plays the ground-truth role in the asymmetric OKS, so
its area and its labeled joints gate which terms contribute. Self
matches are excluded by person id. Per-query average precision is the
information-retrieval convention: the mean of precision at each
relevant rank, with label equality as relevance; a query with no
same-label partner scores 0.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .core import FLAT_POSE_LENGTH, PoseAnnotation, normalize_pose
from .errors import (
    CorruptIndex,
    DuplicatePersonId,
    EmptyIndex,
    NonPositiveArea,
    PoseforgeError,
    TooFewResults,
    UnknownCharacter,
    UnknownPersonId,
    UnknownScene,
    UnlabeledPose,
    UnlabeledQuery,
)
from .ingest import MAX_CHARACTERS, MAX_SCENES
from .metrics import DEFAULT_OKS_PARAMS, MetricKind, OksParams, SimilarityScore

INDEX_MAGIC = b"PIDX"
INDEX_VERSION = 1

DEFAULT_RESULT_COUNT = 5


class LabelMode(str, Enum):
    CHARACTER = "character"
    SCENE = "scene"


@dataclass(frozen=True)
class IndexEntry:
    person_id: str
    pose: PoseAnnotation
    area: float
    character: str
    scene: str

    def label(self, mode: LabelMode) -> str:
        return self.character if mode == LabelMode.CHARACTER else self.scene


@dataclass(frozen=True)
class RankedResult:
    person_id: str
    score: SimilarityScore
    rank: int


@dataclass(frozen=True)
class RetrievalIndex:
    """Immutable OKS-queryable pose collection; build with build_index."""

    entries: tuple[IndexEntry, ...]
    built: bool = False
    # dense mirrors of the entry poses for vectorized scoring
    _xy: np.ndarray = field(default=None, repr=False, compare=False)
    _vis: np.ndarray = field(default=None, repr=False, compare=False)
    _params: OksParams = field(default=DEFAULT_OKS_PARAMS, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.entries)

    def entry(self, person_id: str) -> IndexEntry:
        for e in self.entries:
            if e.person_id == person_id:
                return e
        raise UnknownPersonId(person_id)


def build_index(entries: Iterable[IndexEntry],
                params: OksParams = DEFAULT_OKS_PARAMS) -> RetrievalIndex:
    """Validate entries and freeze them into a queryable index.

    Entries are stored sorted by person id, so insertion order never
    affects query results.
    """
    ordered = sorted(entries, key=lambda e: e.person_id)
    seen: set[str] = set()
    characters: set[str] = set()
    scenes: set[str] = set()
    for e in ordered:
        if e.person_id in seen:
            raise DuplicatePersonId(e.person_id)
        seen.add(e.person_id)
        if e.pose.num_labeled == 0:
            raise UnlabeledPose(f"entry {e.person_id!r} has no labeled keypoints")
        if e.area <= 0:
            raise NonPositiveArea(f"entry {e.person_id!r}: area must be positive, got {e.area}")
        characters.add(e.character)
        scenes.add(e.scene)
        if len(characters) > MAX_CHARACTERS:
            raise UnknownCharacter(e.character)
        if len(scenes) > MAX_SCENES:
            raise UnknownScene(e.scene)
    if ordered:
        xy = np.stack([e.pose.xy for e in ordered])
        vis = np.stack([e.pose.vis for e in ordered])
    else:
        xy = np.zeros((0, 17, 2))
        vis = np.zeros((0, 17), dtype=np.int64)
    xy.flags.writeable = False
    vis.flags.writeable = False
    return RetrievalIndex(entries=tuple(ordered), built=True,
                          _xy=xy, _vis=vis, _params=params)


def _scores_against(index: RetrievalIndex, query_pose: PoseAnnotation,
                    query_area: float) -> np.ndarray:
    """OKS of every entry pose (as prediction) against the query (as gt)."""
    gated = query_pose.vis > 0
    d2 = ((index._xy[:, gated, :] - query_pose.xy[gated]) ** 2).sum(axis=2)
    k2 = index._params.k_array[gated] ** 2
    return np.exp(-d2 / (2.0 * query_area * k2)).mean(axis=1)


def _rank(index: RetrievalIndex, scores: np.ndarray, keep: np.ndarray,
          k: int) -> list[RankedResult]:
    # stable sort over ascending-id storage gives the id tie-break for free
    kept = np.flatnonzero(keep)
    order = kept[np.argsort(-scores[kept], kind="mergesort")][:k]
    return [RankedResult(person_id=index.entries[i].person_id,
                         score=SimilarityScore(float(min(1.0, scores[i])), MetricKind.OKS),
                         rank=r)
            for r, i in enumerate(order, start=1)]


def query(index: RetrievalIndex, query_pose: PoseAnnotation, query_area: float,
          query_id: Optional[str] = None, k: int = DEFAULT_RESULT_COUNT,
          ) -> list[RankedResult]:
    """Rank index entries against a query pose and return the top k.

    The entry whose id equals ``query_id`` is removed before ranking.
    Ties break toward the lower person id. Fewer than k survivors are
    returned as-is.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if len(index) == 0:
        raise EmptyIndex("query against an empty index")
    if query_pose.num_labeled == 0:
        raise UnlabeledQuery("query pose has no labeled keypoints")
    if query_area <= 0:
        raise NonPositiveArea(f"query area must be positive, got {query_area}")
    scores = _scores_against(index, query_pose, query_area)
    keep = np.array([e.person_id != query_id for e in index.entries])
    return _rank(index, scores, keep, k)


def query_by_person(index: RetrievalIndex, person_id: str,
                    k: int = DEFAULT_RESULT_COUNT) -> list[RankedResult]:
    """Use a database entry as the query, excluding itself."""
    e = index.entry(person_id)
    return query(index, e.pose, e.area, query_id=person_id, k=k)


def precision_at_k(results: Sequence[RankedResult], query_label: str,
                   label_of: Callable[[str], str], k: int) -> float:
    """Fraction of the top k results whose label equals the query's."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if len(results) < k:
        raise TooFewResults(f"need {k} results, have {len(results)}")
    hits = sum(1 for r in results[:k] if label_of(r.person_id) == query_label)
    return hits / k


@dataclass(frozen=True)
class RetrievalSummary:
    mode: LabelMode
    query_count: int
    mean_p1: float
    mean_p5: float
    mean_ap: float

    AP_DEFINITION = "mean precision at relevant ranks, label match, self excluded"

    def to_text(self) -> str:
        return (f"mode={self.mode.value} queries={self.query_count}\n"
                f"mean_p@1={self.mean_p1:.6f}\n"
                f"mean_p@5={self.mean_p5:.6f}\n"
                f"mean_ap={self.mean_ap:.6f}\n"
                f"ap={self.AP_DEFINITION}\n")

    def to_json_dict(self) -> dict:
        return {"mode": self.mode.value, "queries": self.query_count,
                "mean_p1": self.mean_p1, "mean_p5": self.mean_p5,
                "mean_ap": self.mean_ap, "ap_definition": self.AP_DEFINITION}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"


def _average_precision(relevant: np.ndarray, cutoff: Optional[int]) -> float:
    """AP of one ranked relevance vector; 0 when nothing is relevant."""
    total = int(relevant.sum())
    if total == 0:
        return 0.0
    if cutoff is not None:
        relevant = relevant[:cutoff]
        denom = min(total, cutoff)
    else:
        denom = total
    hits = np.flatnonzero(relevant)
    if hits.size == 0:
        return 0.0
    ranks = hits + 1.0
    precisions = np.arange(1, hits.size + 1) / ranks
    return float(precisions.sum() / denom)


def retrieval_map(index: RetrievalIndex, mode: LabelMode,
                  k: Optional[int] = None) -> RetrievalSummary:
    """Run every entry as a query and average P@1, P@5 and AP.

    P@k here counts an absent slot as a miss (denominator stays k) so
    tiny collections still summarize; ``k`` optionally truncates the
    ranking AP is computed over.
    """
    n = len(index)
    if n == 0:
        raise EmptyIndex("retrieval summary of an empty index")
    labels = np.array([e.label(mode) for e in index.entries])
    p1 = np.zeros(n)
    p5 = np.zeros(n)
    ap = np.zeros(n)
    keep = np.ones(n, dtype=bool)
    for i, e in enumerate(index.entries):
        scores = _scores_against(index, e.pose, e.area)
        keep[i] = False
        kept = np.flatnonzero(keep)
        order = kept[np.argsort(-scores[kept], kind="mergesort")]
        keep[i] = True
        relevant = labels[order] == labels[i]
        p1[i] = relevant[:1].sum() / 1.0
        p5[i] = relevant[:5].sum() / 5.0
        ap[i] = _average_precision(relevant, k)
    return RetrievalSummary(mode=mode, query_count=n,
                            mean_p1=float(p1.mean()), mean_p5=float(p5.mean()),
                            mean_ap=float(ap.mean()))


# -- persistence -------------------------------------------------------------

def _pack_str(value: str) -> bytes:
    raw = value.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError(f"string too long to persist ({len(raw)} bytes)")
    return struct.pack("<H", len(raw)) + raw


def save_index(index: RetrievalIndex, path: Union[str, Path]) -> None:
    """Write the index as a single binary file (coordinates as 32-bit floats)."""
    table: list[str] = sorted({e.character for e in index.entries}
                              | {e.scene for e in index.entries})
    slot = {name: i for i, name in enumerate(table)}
    parts = [INDEX_MAGIC, struct.pack("<BI", INDEX_VERSION, len(index))]
    for e in index.entries:
        parts.append(_pack_str(e.person_id))
        parts.append(struct.pack(f"<{FLAT_POSE_LENGTH}f", *e.pose.to_flat()))
        parts.append(struct.pack("<f", e.area))
        parts.append(struct.pack("<HH", slot[e.character], slot[e.scene]))
    parts.append(struct.pack("<H", len(table)))
    for name in table:
        parts.append(_pack_str(name))
    Path(path).write_bytes(b"".join(parts))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise CorruptIndex(f"truncated index file at byte {self.pos}")
        out = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return out

    def take_str(self) -> str:
        (length,) = self.take("<H")
        if self.pos + length > len(self.data):
            raise CorruptIndex(f"truncated string at byte {self.pos}")
        raw = self.data[self.pos:self.pos + length]
        self.pos += length
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptIndex(f"string at byte {self.pos - length} is not UTF-8") from exc


def load_index(path: Union[str, Path],
               params: OksParams = DEFAULT_OKS_PARAMS) -> RetrievalIndex:
    """Read an index file written by save_index; integrity failures raise
    CorruptIndex."""
    data = Path(path).read_bytes()
    r = _Reader(data)
    if data[:4] != INDEX_MAGIC:
        raise CorruptIndex(f"bad magic {data[:4]!r}")
    r.pos = 4
    version, count = r.take("<BI")
    if version != INDEX_VERSION:
        raise CorruptIndex(f"unsupported index version {version}")
    raw_entries = []
    for _ in range(count):
        person_id = r.take_str()
        flat = r.take(f"<{FLAT_POSE_LENGTH}f")
        (area,) = r.take("<f")
        char_idx, scene_idx = r.take("<HH")
        raw_entries.append((person_id, flat, area, char_idx, scene_idx))
    (table_len,) = r.take("<H")
    table = [r.take_str() for _ in range(table_len)]
    if r.pos != len(data):
        raise CorruptIndex(f"{len(data) - r.pos} trailing bytes after string table")

    entries = []
    for person_id, flat, area, char_idx, scene_idx in raw_entries:
        if char_idx >= table_len or scene_idx >= table_len:
            raise CorruptIndex(f"entry {person_id!r}: label index out of range")
        try:
            pose = normalize_pose([float(v) for v in flat])
        except PoseforgeError as exc:
            raise CorruptIndex(f"entry {person_id!r}: {exc}") from exc
        entries.append(IndexEntry(person_id=person_id, pose=pose, area=float(area),
                                  character=table[char_idx], scene=table[scene_idx]))
    try:
        return build_index(entries, params=params)
    except PoseforgeError as exc:
        raise CorruptIndex(f"index contents invalid: {exc}") from exc
