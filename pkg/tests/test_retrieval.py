import struct

import numpy as np
import pytest

from poseforge import (
    IndexEntry,
    LabelMode,
    MetricKind,
    RetrievalIndex,
    build_index,
    load_index,
    normalize_pose,
    oks,
    parse_annotations,
    parse_retrieval_labels,
    precision_at_k,
    query,
    query_by_person,
    retrieval_map,
    save_index,
)
from poseforge.errors import (
    CorruptIndex,
    DuplicatePersonId,
    EmptyIndex,
    NonPositiveArea,
    TooFewResults,
    UnknownCharacter,
    UnknownPersonId,
    UnknownScene,
    UnlabeledPose,
    UnlabeledQuery,
)
from poseforge.retrieval import INDEX_MAGIC

from conftest import FIXTURES, random_flat_pose


def entry(person_id, flat, area=1e4, character="hero", scene="chase"):
    return IndexEntry(person_id=person_id, pose=normalize_pose(flat), area=area,
                      character=character, scene=scene)


def random_entries(rng, n, characters=("hero", "maiden"), scenes=("chase", "feast")):
    out = []
    for i in range(n):
        out.append(entry(f"p{i:03d}",
                         random_flat_pose(rng, min_labeled=4),
                         area=float(rng.uniform(1e3, 1e4)),
                         character=characters[int(rng.integers(0, len(characters)))],
                         scene=scenes[int(rng.integers(0, len(scenes)))]))
    return out


def ca_index():
    doc = parse_annotations((FIXTURES / "ca_val" / "annotations.json").read_bytes())
    labels = parse_retrieval_labels((FIXTURES / "ca_val" / "labels.csv").read_bytes())
    entries = []
    for record in doc.annotations:
        inst = record.instance
        label = labels.get(str(inst.id))
        if inst.pose is None or label is None:
            continue
        entries.append(IndexEntry(person_id=str(inst.id), pose=inst.pose,
                                  area=inst.area, character=label.character,
                                  scene=label.scene))
    return build_index(entries)


class TestBuildIndex:
    def test_entries_stored_sorted_by_id(self, rng):
        scrambled = random_entries(rng, 8)[::-1]
        index = build_index(scrambled)
        assert index.built
        assert len(index) == 8
        ids = [e.person_id for e in index.entries]
        assert ids == sorted(ids)

    def test_insertion_order_is_irrelevant(self, rng):
        entries = random_entries(rng, 8)
        assert build_index(entries) == build_index(entries[::-1])

    def test_empty_index_builds(self):
        assert len(build_index([])) == 0

    def test_duplicate_person_id(self, rng):
        flat = random_flat_pose(rng)
        with pytest.raises(DuplicatePersonId):
            build_index([entry("p1", flat), entry("p1", flat)])

    def test_unlabeled_pose_rejected(self):
        with pytest.raises(UnlabeledPose):
            build_index([entry("p1", [0.0] * 51)])

    def test_non_positive_area_rejected(self, rng):
        with pytest.raises(NonPositiveArea):
            build_index([entry("p1", random_flat_pose(rng), area=0.0)])

    def test_character_cap(self, rng):
        entries = [entry(f"p{i}", random_flat_pose(rng), character=f"c{i}")
                   for i in range(16)]
        with pytest.raises(UnknownCharacter):
            build_index(entries)

    def test_scene_cap(self, rng):
        entries = [entry(f"p{i}", random_flat_pose(rng), scene=f"s{i}")
                   for i in range(6)]
        with pytest.raises(UnknownScene):
            build_index(entries)

    def test_large_synthetic_build(self, rng):
        index = build_index(random_entries(rng, 531))
        assert len(index) == 531

    def test_entry_lookup(self, rng):
        index = build_index(random_entries(rng, 5))
        assert index.entry("p003").person_id == "p003"
        with pytest.raises(UnknownPersonId):
            index.entry("ghost")


class TestQuery:
    def test_identity_query_ranks_itself_first_with_score_one(self, rng):
        index = build_index(random_entries(rng, 10))
        target = index.entries[4]
        results = query(index, target.pose, target.area, k=3)
        assert results[0].person_id == target.person_id
        assert results[0].score.value == 1.0
        assert results[0].rank == 1

    def test_self_exclusion(self, rng):
        index = build_index(random_entries(rng, 10))
        results = query_by_person(index, "p004", k=10)
        assert len(results) == 9
        assert all(r.person_id != "p004" for r in results)

    def test_ranks_are_one_based_and_dense(self, rng):
        index = build_index(random_entries(rng, 10))
        results = query_by_person(index, "p000", k=6)
        assert [r.rank for r in results] == [1, 2, 3, 4, 5, 6]

    def test_agrees_with_per_pair_oks(self, rng):
        index = build_index(random_entries(rng, 10))
        flat = random_flat_pose(rng, min_labeled=4)
        q_pose = normalize_pose(flat)
        q_area = 5e3
        expect = sorted(
            ((e.person_id, oks(e.pose, q_pose, q_area).value) for e in index.entries),
            key=lambda pair: (-pair[1], pair[0]))
        got = query(index, q_pose, q_area, k=10)
        assert [r.person_id for r in got] == [pid for pid, _ in expect]
        assert [r.score.value for r in got] == [s for _, s in expect]

    def test_k_larger_than_index_truncates_silently(self, rng):
        index = build_index(random_entries(rng, 3))
        assert len(query_by_person(index, "p000", k=50)) == 2

    def test_k_must_be_positive(self, rng):
        index = build_index(random_entries(rng, 3))
        with pytest.raises(ValueError):
            query_by_person(index, "p000", k=0)

    def test_empty_index(self, rng):
        with pytest.raises(EmptyIndex):
            query(build_index([]), normalize_pose(random_flat_pose(rng)), 100.0)

    def test_unlabeled_query(self, rng):
        index = build_index(random_entries(rng, 3))
        with pytest.raises(UnlabeledQuery):
            query(index, normalize_pose([0.0] * 51), 100.0)

    def test_non_positive_query_area(self, rng):
        index = build_index(random_entries(rng, 3))
        with pytest.raises(NonPositiveArea):
            query(index, normalize_pose(random_flat_pose(rng)), 0.0)

    def test_unknown_person(self, rng):
        index = build_index(random_entries(rng, 3))
        with pytest.raises(UnknownPersonId):
            query_by_person(index, "ghost")

    def test_query_area_gates_falloff(self, rng):
        # a larger query area is more forgiving: scores never decrease
        index = build_index(random_entries(rng, 10))
        q_pose = normalize_pose(random_flat_pose(rng, min_labeled=4))
        tight = {r.person_id: r.score.value for r in query(index, q_pose, 1e3, k=10)}
        loose = {r.person_id: r.score.value for r in query(index, q_pose, 1e5, k=10)}
        assert all(loose[pid] >= tight[pid] for pid in tight)

    def test_exact_ties_break_toward_lower_id_deterministically(self, rng):
        flat = random_flat_pose(rng, min_labeled=5)
        clones = [entry(f"t{i}", flat) for i in (3, 1, 4, 0, 2)]
        index = build_index(clones + random_entries(rng, 3))
        baseline = None
        for _ in range(10):
            results = query(index, normalize_pose(flat), 1e4, k=5)
            ids = [r.person_id for r in results]
            assert ids == ["t0", "t1", "t2", "t3", "t4"]
            assert all(r.score.value == 1.0 for r in results)
            if baseline is None:
                baseline = results
            assert results == baseline


class TestPrecisionAtK:
    def label_of(self, labels):
        return lambda pid: labels[pid]

    def run(self, rng, hits, k):
        flat = random_flat_pose(rng)
        index = build_index([entry(f"p{i}", flat) for i in range(k + 1)])
        results = query_by_person(index, "p0", k=k)
        labels = {f"p{i}": ("match" if i - 1 < hits else "other")
                  for i in range(1, k + 1)}
        return precision_at_k(results, "match", self.label_of(labels), k)

    def test_all_relevant(self, rng):
        assert self.run(rng, hits=5, k=5) == 1.0

    def test_none_relevant(self, rng):
        assert self.run(rng, hits=0, k=5) == 0.0

    def test_fractions(self, rng):
        assert self.run(rng, hits=2, k=5) == pytest.approx(0.4)
        assert self.run(rng, hits=1, k=2) == 0.5

    def test_product_with_k_is_a_hit_count(self, rng):
        for hits in range(6):
            p = self.run(rng, hits=hits, k=5)
            assert p * 5 == hits

    def test_too_few_results(self, rng):
        index = build_index(random_entries(rng, 3))
        results = query_by_person(index, "p000", k=5)  # only 2 available
        with pytest.raises(TooFewResults):
            precision_at_k(results, "hero", lambda pid: "hero", 5)

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            precision_at_k([], "hero", lambda pid: "hero", 0)


def reference_summary(index: RetrievalIndex, mode: LabelMode, k=None):
    """Scalar-oracle restatement of retrieval_map using per-pair oks()."""
    p1s, p5s, aps = [], [], []
    for q_entry in index.entries:
        scored = sorted(
            ((e.person_id, oks(e.pose, q_entry.pose, q_entry.area).value, e.label(mode))
             for e in index.entries if e.person_id != q_entry.person_id),
            key=lambda row: (-row[1], row[0]))
        relevant = [label == q_entry.label(mode) for _, _, label in scored]
        p1s.append(float(relevant[0]) if relevant else 0.0)
        p5s.append(sum(relevant[:5]) / 5.0)
        total = sum(relevant)
        if total == 0:
            aps.append(0.0)
            continue
        window = relevant if k is None else relevant[:k]
        denom = total if k is None else min(total, k)
        hits = 0
        precision_sum = 0.0
        for rank, rel in enumerate(window, start=1):
            if rel:
                hits += 1
                precision_sum += hits / rank
        aps.append(precision_sum / denom)
    n = len(index)
    return (sum(p1s) / n, sum(p5s) / n, sum(aps) / n)


class TestRetrievalMap:
    def test_matches_reference_on_random_index(self, rng):
        index = build_index(random_entries(rng, 20,
                                           characters=("a", "b", "c", "d"),
                                           scenes=("x", "y", "z", "w")))
        for mode in (LabelMode.CHARACTER, LabelMode.SCENE):
            for k in (None, 1, 5, 10):
                summary = retrieval_map(index, mode, k=k)
                p1, p5, ap = reference_summary(index, mode, k=k)
                assert summary.mode is mode
                assert summary.query_count == 20
                assert summary.mean_p1 == pytest.approx(p1, abs=1e-12)
                assert summary.mean_p5 == pytest.approx(p5, abs=1e-12)
                assert summary.mean_ap == pytest.approx(ap, abs=1e-12)

    def test_perfectly_separated_clusters(self, rng):
        entries = []
        for c, (cx, label) in enumerate((((200, 200), "a"), ((5000, 5000), "b"))):
            for i in range(4):
                flat = random_flat_pose(rng, center=cx, spread=5, min_labeled=6)
                entries.append(entry(f"{label}{i}", flat, area=1e3, character=label,
                                     scene="s"))
        summary = retrieval_map(build_index(entries), LabelMode.CHARACTER)
        assert summary.mean_p1 == 1.0
        assert summary.mean_ap == 1.0

    def test_singleton_labels_score_zero(self, rng):
        entries = [entry(f"p{i}", random_flat_pose(rng), character=f"c{i}", scene="s")
                   for i in range(4)]
        summary = retrieval_map(build_index(entries), LabelMode.CHARACTER)
        assert summary.mean_p1 == 0.0
        assert summary.mean_ap == 0.0

    def test_small_index_pads_p5_with_misses(self, rng):
        flat = random_flat_pose(rng)
        entries = [entry(f"p{i}", flat, character="a", scene="s") for i in range(3)]
        summary = retrieval_map(build_index(entries), LabelMode.CHARACTER)
        # each query sees 2 partners, both relevant, in 5 slots
        assert summary.mean_p5 == pytest.approx(2.0 / 5.0, abs=1e-12)
        assert summary.mean_p1 == 1.0

    def test_empty_index(self):
        with pytest.raises(EmptyIndex):
            retrieval_map(build_index([]), LabelMode.CHARACTER)

    def test_summary_text_and_json(self, rng):
        index = build_index(random_entries(rng, 6))
        summary = retrieval_map(index, LabelMode.SCENE)
        text = summary.to_text()
        assert text.startswith("mode=scene queries=6\n")
        assert "mean_p@1=" in text and "mean_p@5=" in text and "mean_ap=" in text
        doc = summary.to_json_dict()
        assert doc["mode"] == "scene"
        assert doc["queries"] == 6
        assert doc["ap_definition"] == summary.AP_DEFINITION


class TestPersistence:
    def test_round_trip_preserves_everything_but_precision(self, rng, tmp_path):
        index = build_index(random_entries(rng, 12))
        path = tmp_path / "poses.pidx"
        save_index(index, path)
        back = load_index(path)
        assert len(back) == len(index)
        for a, b in zip(back.entries, index.entries):
            assert a.person_id == b.person_id
            assert a.character == b.character
            assert a.scene == b.scene
            assert a.area == np.float32(b.area)
            assert np.array_equal(a.pose.xy, b.pose.xy.astype(np.float32))
            assert np.array_equal(a.pose.vis, b.pose.vis)

    def test_second_save_is_byte_identical(self, rng, tmp_path):
        index = build_index(random_entries(rng, 12))
        first = tmp_path / "a.pidx"
        second = tmp_path / "b.pidx"
        save_index(index, first)
        save_index(load_index(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.pidx"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(CorruptIndex):
            load_index(path)

    def test_unsupported_version(self, rng, tmp_path):
        index = build_index(random_entries(rng, 2))
        path = tmp_path / "v2.pidx"
        save_index(index, path)
        raw = bytearray(path.read_bytes())
        raw[4] = 99
        path.write_bytes(bytes(raw))
        with pytest.raises(CorruptIndex):
            load_index(path)

    def test_truncation_anywhere_is_detected(self, rng, tmp_path):
        index = build_index(random_entries(rng, 2))
        path = tmp_path / "whole.pidx"
        save_index(index, path)
        raw = path.read_bytes()
        clipped = tmp_path / "clipped.pidx"
        for cut in (5, 9, 30, len(raw) // 2, len(raw) - 1):
            clipped.write_bytes(raw[:cut])
            with pytest.raises(CorruptIndex):
                load_index(clipped)

    def test_trailing_bytes_rejected(self, rng, tmp_path):
        index = build_index(random_entries(rng, 2))
        path = tmp_path / "pad.pidx"
        save_index(index, path)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(CorruptIndex):
            load_index(path)

    def test_label_index_out_of_range(self, rng, tmp_path):
        index = build_index([entry("p", random_flat_pose(rng))])
        path = tmp_path / "oob.pidx"
        save_index(index, path)
        raw = bytearray(path.read_bytes())
        # character slot sits after magic, version byte, count, id string,
        # 51 floats and the area float
        offset = 4 + 1 + 4 + (2 + 1) + 51 * 4 + 4
        struct.pack_into("<H", raw, offset, 40)
        path.write_bytes(bytes(raw))
        with pytest.raises(CorruptIndex):
            load_index(path)

    def test_header_magic(self, rng, tmp_path):
        index = build_index(random_entries(rng, 1))
        path = tmp_path / "m.pidx"
        save_index(index, path)
        assert path.read_bytes()[:4] == INDEX_MAGIC


class TestCaFixture:
    def test_index_builds_with_all_posed_entries(self):
        index = ca_index()
        assert len(index) == 303

    def test_character_retrieval_is_strong(self):
        index = ca_index()
        summary = retrieval_map(index, LabelMode.CHARACTER)
        assert summary.mean_p1 >= 0.9
        assert summary.mean_ap >= 0.3
        at_five = retrieval_map(index, LabelMode.CHARACTER, k=5)
        assert at_five.mean_ap >= 0.65
