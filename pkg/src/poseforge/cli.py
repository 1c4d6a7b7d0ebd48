"""Command-line front end.

Results go to stdout, diagnostics to stderr. Exit codes: 0 success,
1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .adain import load_tensor, restyle, save_tensor, uniform_alpha
from .errors import PoseforgeError, UnknownPersonId
from .evaluation import MatchConfig, evaluate
from .ingest import (
    load_vocabulary,
    parse_annotations,
    parse_retrieval_labels,
    find_out_of_bounds,
)
from .losses import LossWeights, TaskKind, combined_loss_1, combined_loss_2
from .manifest import load_manifest_file, validate_manifests
from .metrics import MetricKind
from .retrieval import (
    DEFAULT_RESULT_COUNT,
    IndexEntry,
    LabelMode,
    build_index,
    load_index,
    query,
    query_by_person,
    retrieval_map,
    save_index,
)
from .server import (
    labeled_extent_area,
    parse_flat_pose_text,
    render_json,
    resolve_config,
    retrieve_payload,
    serve_http,
)


def _warn(message: str) -> None:
    print(message, file=sys.stderr)


def _emit(text: str) -> None:
    sys.stdout.write(text)


def _cmd_validate(args) -> int:
    manifests, totals = load_manifest_file(args.manifest)
    report = validate_manifests(manifests, totals)
    _emit(report.to_text())
    return 0 if report.all_passed else 1


def _cmd_ingest(args) -> int:
    doc = parse_annotations(Path(args.annotations).read_bytes())
    vocabulary = load_vocabulary(Path(args.vocabulary).read_bytes()) if args.vocabulary else None
    labels = parse_retrieval_labels(Path(args.labels).read_bytes(), vocabulary)

    for ann_id, joint in find_out_of_bounds(doc):
        _warn(f"warning: annotation {ann_id!r} joint {joint} lies outside its image")

    entries = []
    skipped_unposed = skipped_unlabeled = skipped_area = 0
    for entry in doc.annotations:
        inst = entry.instance
        if inst.pose is None or inst.pose.num_labeled == 0:
            skipped_unposed += 1
            continue
        label = labels.get(str(inst.id))
        if label is None:
            skipped_unlabeled += 1
            continue
        if inst.area <= 0:
            skipped_area += 1
            _warn(f"warning: annotation {inst.id!r} has non-positive area, skipped")
            continue
        entries.append(IndexEntry(person_id=str(inst.id), pose=inst.pose,
                                  area=inst.area, character=label.character,
                                  scene=label.scene))
    index = build_index(entries)
    save_index(index, args.out)
    if skipped_unposed:
        _warn(f"note: {skipped_unposed} annotations without a usable pose")
    if skipped_unlabeled:
        _warn(f"note: {skipped_unlabeled} posed annotations without a label row")
    _emit(f"images={len(doc.images)} persons={len(doc.annotations)} poses={doc.pose_count}\n"
          f"indexed={len(index)} -> {args.out}\n")
    return 0


def _cmd_eval(args) -> int:
    gt_doc = parse_annotations(Path(args.gt).read_bytes())
    pred_doc = parse_annotations(Path(args.pred).read_bytes())
    cfg = MatchConfig(metric_kind=MetricKind(args.kind),
                      max_detections=args.max_dets)
    report = evaluate(pred_doc.instances_by_image(), gt_doc.instances_by_image(), cfg)
    _emit(render_json(report.to_json_dict()).decode("utf-8") if args.json
          else report.to_text())
    return 0


def _cmd_adain(args) -> int:
    content = load_tensor(args.content)
    style = load_tensor(args.style)
    if args.alpha == "uniform":
        alpha = uniform_alpha(args.seed, args.draw)
    else:
        try:
            alpha = float(args.alpha)
        except ValueError:
            raise PoseforgeError(f"--alpha must be a number or 'uniform', got {args.alpha!r}") from None
    out = restyle(content, style, alpha)
    save_tensor(out, args.out)
    _emit(f"wrote {args.out} channels={out.channels} size={out.height}x{out.width} "
          f"alpha={alpha!r}\n")
    return 0


def _cmd_loss(args) -> int:
    if args.mode == "comb1":
        value = combined_loss_1(args.task_loss, args.perceptual)
    else:
        if args.l1 is not None or args.l2 is not None:
            if args.l1 is None or args.l2 is None:
                raise PoseforgeError("pass both --l1 and --l2 or neither")
            weights = LossWeights(args.l1, args.l2, TaskKind(args.task))
        else:
            weights = LossWeights.tuned(TaskKind(args.task))
        value = combined_loss_2(args.task_loss, args.perceptual, weights)
    _emit(f"{value!r}\n")
    return 0


def _format_results(payload: dict) -> str:
    lines = [f"query={payload['query']} mode={payload['mode']} k={payload['k']}"]
    for hit in payload["results"]:
        lines.append(f"rank={hit['rank']} person={hit['person_id']} "
                     f"score={hit['score']:.6f} label={hit['label']}")
    return "\n".join(lines) + "\n"


def _cmd_retrieve(args) -> int:
    index = load_index(args.index)
    mode = LabelMode(args.mode)
    try:
        index.entry(args.query)
        results = query_by_person(index, args.query, k=args.k)
        name = args.query
    except UnknownPersonId:
        pose_path = Path(args.query)
        if not pose_path.is_file():
            raise UnknownPersonId(args.query) from None
        pose = parse_flat_pose_text(pose_path.read_text(encoding="utf-8"))
        area = args.area if args.area is not None else labeled_extent_area(pose)
        results = query(index, pose, area, query_id=None, k=args.k)
        name = "adhoc"
    payload = retrieve_payload(index, results, name, mode, args.k)
    _emit(render_json(payload).decode("utf-8") if args.json else _format_results(payload))
    return 0


def _cmd_retrieval_eval(args) -> int:
    index = load_index(args.index)
    summary = retrieval_map(index, LabelMode(args.mode), k=args.k)
    _emit(render_json(summary.to_json_dict()).decode("utf-8") if args.json
          else summary.to_text())
    return 0


def _cmd_serve(args) -> int:
    cfg = resolve_config(config_path=args.config, env=os.environ,
                         listen_address=args.addr, index_path=args.index,
                         static_asset_path=args.static, log_level=args.log_level)
    serve_http(cfg)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poseforge",
        description="Pose dataset validation, similarity evaluation, and retrieval.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check manifest split counts against totals")
    p.add_argument("--manifest", required=True, help="manifest JSON file")
    p.set_defaults(run=_cmd_validate)

    p = sub.add_parser("ingest", help="build a retrieval index from annotations and labels")
    p.add_argument("--annotations", required=True, help="COCO-layout annotation file")
    p.add_argument("--labels", required=True, help="person_id,character,scene table")
    p.add_argument("--vocabulary", help="JSON file with closed character/scene sets")
    p.add_argument("--out", required=True, help="index file to write")
    p.set_defaults(run=_cmd_ingest)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("--gt", required=True, help="ground-truth annotation file")
    p.add_argument("--pred", required=True, help="prediction annotation file")
    p.add_argument("--kind", choices=[k.value for k in MetricKind], default="oks")
    p.add_argument("--max-dets", type=int, help="per-image detection cap")
    p.add_argument("--json", action="store_true", help="emit the JSON report")
    p.set_defaults(run=_cmd_eval)

    p = sub.add_parser("adain", help="restyle a content tensor with style statistics")
    p.add_argument("--content", required=True, help="content tensor file")
    p.add_argument("--style", required=True, help="style tensor file")
    p.add_argument("--alpha", default="1.0", help="blend strength in [0, 1], or 'uniform'")
    p.add_argument("--seed", type=int, default=0, help="seed for --alpha uniform")
    p.add_argument("--draw", type=int, default=0, help="draw index for --alpha uniform")
    p.add_argument("--out", required=True, help="tensor file to write")
    p.set_defaults(run=_cmd_adain)

    p = sub.add_parser("loss", help="combine task and perceptual losses")
    p.add_argument("--mode", choices=["comb1", "comb2"], required=True)
    p.add_argument("--task-loss", type=float, required=True)
    p.add_argument("--perceptual", type=float, required=True)
    p.add_argument("--task", choices=[t.value for t in TaskKind], default="detection",
                   help="selects tuned comb2 weights when --l1/--l2 are absent")
    p.add_argument("--l1", type=float, help="explicit weight for the task term")
    p.add_argument("--l2", type=float, help="explicit weight for the perceptual term")
    p.set_defaults(run=_cmd_loss)

    p = sub.add_parser("retrieve", help="rank index entries against a query")
    p.add_argument("--index", required=True, help="index file")
    p.add_argument("--query", required=True, help="person id or path to a 51-number pose file")
    p.add_argument("--k", type=int, default=DEFAULT_RESULT_COUNT)
    p.add_argument("--mode", choices=[m.value for m in LabelMode], default="character")
    p.add_argument("--area", type=float, help="explicit query scale for pose-file queries")
    p.add_argument("--json", action="store_true", help="emit the JSON payload")
    p.set_defaults(run=_cmd_retrieve)

    p = sub.add_parser("retrieval-eval", help="summarize P@k and mAP over the whole index")
    p.add_argument("--index", required=True, help="index file")
    p.add_argument("--mode", choices=[m.value for m in LabelMode], default="character")
    p.add_argument("--k", type=int, help="optional ranking cutoff for AP")
    p.add_argument("--json", action="store_true", help="emit the JSON payload")
    p.set_defaults(run=_cmd_retrieval_eval)

    p = sub.add_parser("serve", help="serve the retrieval API over HTTP")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--index", help="index file (overrides config and env)")
    p.add_argument("--addr", help="host:port listen address")
    p.add_argument("--static", help="directory of UI assets to serve")
    p.add_argument("--log-level", choices=["error", "info", "debug"])
    p.set_defaults(run=_cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.run(args)
    except PoseforgeError as exc:
        _warn(f"error: {exc}")
        return 1
    except FileNotFoundError as exc:
        _warn(f"error: {exc}")
        return 1
    except (OSError, ValueError) as exc:
        _warn(f"error: {exc}")
        return 1
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
