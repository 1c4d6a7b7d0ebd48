"""Read-only HTTP service over a persisted retrieval index.

Endpoints: /health, /category, /entries, /entries/{id}, /retrieve
(GET by person id, POST with a raw 51-number pose), /metrics/retrieval,
plus optional static asset serving for the explorer UI. All mutation
happens offline through the command line; every request works against
the same immutable index, so handling is lock-free.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import signal
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union
from urllib.parse import parse_qs, urlsplit

from .core import PoseAnnotation, normalize_pose
from .errors import (
    BindError,
    NonPositiveArea,
    PoseforgeError,
    SchemaViolation,
    UnknownPersonId,
)
from .ingest import CategoryDescriptor
from .retrieval import (
    DEFAULT_RESULT_COUNT,
    IndexEntry,
    LabelMode,
    RankedResult,
    RetrievalIndex,
    load_index,
    query,
    query_by_person,
    retrieval_map,
)

log = logging.getLogger("poseforge.server")

DEFAULT_ADDRESS = "127.0.0.1:8765"
ENV_INDEX = "POSEFORGE_INDEX"
ENV_ADDR = "POSEFORGE_ADDR"

_LOG_LEVELS = ("error", "info", "debug")
_CONFIG_KEYS = ("listen_address", "index_path", "static_asset_path", "log_level")


@dataclass(frozen=True)
class ServiceConfig:
    listen_address: str = DEFAULT_ADDRESS
    index_path: Optional[Path] = None
    static_asset_path: Optional[Path] = None
    log_level: str = "info"

    def __post_init__(self):
        self.host, self.port  # validate eagerly
        if self.log_level not in _LOG_LEVELS:
            raise SchemaViolation(f"log_level must be one of {_LOG_LEVELS}, got {self.log_level!r}",
                                  field_path="log_level")

    @property
    def host(self) -> str:
        host, _, _ = self.listen_address.rpartition(":")
        if not host:
            raise SchemaViolation(f"listen_address needs host:port, got {self.listen_address!r}",
                                  field_path="listen_address")
        return host

    @property
    def port(self) -> int:
        _, _, port = self.listen_address.rpartition(":")
        try:
            value = int(port)
        except ValueError:
            raise SchemaViolation(f"listen_address needs a numeric port, got {self.listen_address!r}",
                                  field_path="listen_address") from None
        if not (1 <= value <= 65535):
            raise SchemaViolation(f"port must lie in [1, 65535], got {value}",
                                  field_path="listen_address")
        return value


def parse_config_file(text: str) -> dict[str, str]:
    """Parse key=value service configuration; # starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise SchemaViolation(f"line {lineno}: expected key=value, got {raw!r}",
                                  field_path=f"line {lineno}")
        if key not in _CONFIG_KEYS:
            raise SchemaViolation(f"line {lineno}: unknown key {key!r}",
                                  field_path=key)
        out[key] = value
    return out


def resolve_config(config_path: Optional[Union[str, Path]] = None,
                   env: Optional[Mapping[str, str]] = None,
                   listen_address: Optional[str] = None,
                   index_path: Optional[Union[str, Path]] = None,
                   static_asset_path: Optional[Union[str, Path]] = None,
                   log_level: Optional[str] = None) -> ServiceConfig:
    """Layer configuration: explicit arguments over env vars over file."""
    values: dict[str, Optional[str]] = {}
    if config_path is not None:
        values.update(parse_config_file(Path(config_path).read_text(encoding="utf-8")))
    if env:
        if env.get(ENV_ADDR):
            values["listen_address"] = env[ENV_ADDR]
        if env.get(ENV_INDEX):
            values["index_path"] = env[ENV_INDEX]
    if listen_address is not None:
        values["listen_address"] = listen_address
    if index_path is not None:
        values["index_path"] = str(index_path)
    if static_asset_path is not None:
        values["static_asset_path"] = str(static_asset_path)
    if log_level is not None:
        values["log_level"] = log_level
    return ServiceConfig(
        listen_address=values.get("listen_address") or DEFAULT_ADDRESS,
        index_path=Path(values["index_path"]) if values.get("index_path") else None,
        static_asset_path=(Path(values["static_asset_path"])
                           if values.get("static_asset_path") else None),
        log_level=values.get("log_level") or "info",
    )


# -- response payloads (shared with the CLI so both emit identical bytes) ----

def render_json(payload: dict) -> bytes:
    return (json.dumps(payload, indent=2) + "\n").encode("utf-8")


def entry_payload(entry: IndexEntry) -> dict:
    return {
        "person_id": entry.person_id,
        "character": entry.character,
        "scene": entry.scene,
        "area": entry.area,
        "num_labeled": entry.pose.num_labeled,
        "keypoints": list(entry.pose.to_flat()),
    }


def entries_page_payload(index: RetrievalIndex, offset: int, limit: int) -> dict:
    page = index.entries[offset:offset + limit]
    return {
        "total": len(index),
        "offset": offset,
        "limit": limit,
        "entries": [
            {"person_id": e.person_id, "character": e.character, "scene": e.scene,
             "area": e.area, "num_labeled": e.pose.num_labeled}
            for e in page
        ],
    }


def category_payload(category: CategoryDescriptor = CategoryDescriptor()) -> dict:
    return {
        "id": category.id,
        "name": category.name,
        "keypoints": list(category.keypoint_names),
        "skeleton": [list(e) for e in category.skeleton],
    }


def retrieve_payload(index: RetrievalIndex, results: Sequence[RankedResult],
                     query_name: str, mode: LabelMode, k: int) -> dict:
    hits = []
    for r in results:
        entry = index.entry(r.person_id)
        hits.append({
            "rank": r.rank,
            "person_id": r.person_id,
            "score": r.score.value,
            "label": entry.label(mode),
            "character": entry.character,
            "scene": entry.scene,
        })
    return {"query": query_name, "mode": mode.value, "k": k, "results": hits}


def parse_flat_pose_text(text: str) -> PoseAnnotation:
    """Read 51 numbers from a JSON array or plain separated text."""
    try:
        values = json.loads(text)
    except json.JSONDecodeError:
        try:
            values = [float(tok) for tok in text.replace(",", " ").split()]
        except ValueError as exc:
            raise SchemaViolation(f"pose body must be 51 numbers: {exc}",
                                  field_path="pose") from exc
    if not isinstance(values, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        raise SchemaViolation("pose body must be an array of numbers", field_path="pose")
    return normalize_pose([float(v) for v in values])


def labeled_extent_area(pose: PoseAnnotation) -> float:
    """Default scale for ad-hoc queries: bounding-box area of the labeled joints."""
    pts = pose.xy[pose.vis > 0]
    if pts.shape[0] == 0:
        raise NonPositiveArea("pose has no labeled joints to take an extent from")
    extent = pts.max(axis=0) - pts.min(axis=0)
    area = float(extent[0] * extent[1])
    if area <= 0:
        raise NonPositiveArea(
            f"labeled joints span a degenerate box (area {area}); pass an explicit area")
    return area


# -- request handling --------------------------------------------------------

class _BadRequest(Exception):
    """Maps to a 400 response."""


class PoseServer(ThreadingHTTPServer):
    daemon_threads = False  # finish in-flight requests on shutdown

    def __init__(self, address: tuple[str, int], index: RetrievalIndex,
                 static_root: Optional[Path] = None, log_requests: bool = True):
        self.index = index
        self.static_root = static_root.resolve() if static_root else None
        self.log_requests = log_requests
        super().__init__(address, _Handler)


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: PoseServer

    def log_message(self, fmt, *args):
        if self.server.log_requests:
            log.info("%s %s", self.address_string(), fmt % args)

    # -- plumbing

    def _send_bytes(self, body: bytes, status: int = 200,
                    content_type: str = "application/json") -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, payload: dict, status: int = 200) -> None:
        self._send_bytes(render_json(payload), status=status)

    def _send_error_json(self, status: int, message: str) -> None:
        self._send_json({"error": message}, status=status)

    def _params(self) -> dict[str, str]:
        qs = parse_qs(urlsplit(self.path).query, keep_blank_values=False)
        return {k: v[-1] for k, v in qs.items()}

    @staticmethod
    def _int_param(params: dict, name: str, default: int, minimum: int) -> int:
        raw = params.get(name)
        if raw is None:
            return default
        try:
            value = int(raw)
        except ValueError:
            raise _BadRequest(f"{name} must be an integer, got {raw!r}") from None
        if value < minimum:
            raise _BadRequest(f"{name} must be >= {minimum}, got {value}")
        return value

    @staticmethod
    def _mode_param(params: dict) -> LabelMode:
        raw = params.get("mode", LabelMode.CHARACTER.value)
        try:
            return LabelMode(raw)
        except ValueError:
            raise _BadRequest(f"mode must be character or scene, got {raw!r}") from None

    # -- routes

    def do_GET(self):  # noqa: N802 (http.server naming)
        try:
            self._route_get()
        except _BadRequest as exc:
            self._send_error_json(400, str(exc))
        except UnknownPersonId as exc:
            self._send_error_json(404, str(exc))
        except PoseforgeError as exc:
            self._send_error_json(400, str(exc))
        except Exception:  # pragma: no cover - defensive
            log.exception("unhandled error for %s", self.path)
            self._send_error_json(500, "internal error")

    def do_POST(self):  # noqa: N802
        try:
            self._route_post()
        except _BadRequest as exc:
            self._send_error_json(400, str(exc))
        except PoseforgeError as exc:
            self._send_error_json(400, str(exc))
        except Exception:  # pragma: no cover - defensive
            log.exception("unhandled error for %s", self.path)
            self._send_error_json(500, "internal error")

    def _route_get(self):
        path = urlsplit(self.path).path
        index = self.server.index
        if path == "/health":
            body = json.dumps({"status": "ok", "entries": len(index)},
                              separators=(",", ":")).encode("utf-8")
            self._send_bytes(body)
        elif path == "/category":
            self._send_json(category_payload())
        elif path == "/entries":
            params = self._params()
            offset = self._int_param(params, "offset", 0, 0)
            limit = self._int_param(params, "limit", 50, 1)
            self._send_json(entries_page_payload(index, offset, limit))
        elif path.startswith("/entries/"):
            person_id = path[len("/entries/"):]
            self._send_json(entry_payload(index.entry(person_id)))
        elif path == "/retrieve":
            params = self._params()
            person = params.get("person")
            if person is None:
                raise _BadRequest("person query parameter is required")
            k = self._int_param(params, "k", DEFAULT_RESULT_COUNT, 1)
            mode = self._mode_param(params)
            results = query_by_person(index, person, k=k)
            self._send_json(retrieve_payload(index, results, person, mode, k))
        elif path == "/metrics/retrieval":
            params = self._params()
            mode = self._mode_param(params)
            self._send_json(retrieval_map(index, mode).to_json_dict())
        else:
            self._serve_static(path)

    def _route_post(self):
        path = urlsplit(self.path).path
        if path != "/retrieve":
            self._send_error_json(404, "not found")
            return
        params = self._params()
        k = self._int_param(params, "k", DEFAULT_RESULT_COUNT, 1)
        mode = self._mode_param(params)
        length = int(self.headers.get("Content-Length", 0))
        if length <= 0:
            raise _BadRequest("request body with 51 numbers is required")
        body = self.rfile.read(length).decode("utf-8", errors="replace")
        pose = parse_flat_pose_text(body)
        if "area" in params:
            try:
                area = float(params["area"])
            except ValueError:
                raise _BadRequest(f"area must be a number, got {params['area']!r}") from None
        else:
            area = labeled_extent_area(pose)
        results = query(self.server.index, pose, area, query_id=None, k=k)
        self._send_json(retrieve_payload(self.server.index, results, "adhoc", mode, k))

    def _serve_static(self, path: str):
        root = self.server.static_root
        if root is None:
            self._send_error_json(404, "not found")
            return
        rel = path.lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if not target.is_relative_to(root) or not target.is_file():
            if target.is_dir() and (target / "index.html").is_file():
                target = target / "index.html"
            else:
                self._send_error_json(404, "not found")
                return
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self._send_bytes(target.read_bytes(), content_type=ctype)


def make_server(cfg: ServiceConfig) -> PoseServer:
    """Load the index and bind the listen address."""
    if cfg.index_path is None:
        raise SchemaViolation("no index path configured", field_path="index_path")
    index = load_index(cfg.index_path)
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}[cfg.log_level]
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(message)s")
    try:
        server = PoseServer((cfg.host, cfg.port), index,
                            static_root=cfg.static_asset_path,
                            log_requests=cfg.log_level != "error")
    except OSError as exc:
        raise BindError(f"cannot bind {cfg.listen_address}: {exc}") from exc
    return server


def serve_http(cfg: ServiceConfig) -> None:
    """Run the service until SIGINT or SIGTERM; in-flight requests finish."""
    server = make_server(cfg)

    def _shutdown(signum, frame):
        log.info("signal %d, shutting down", signum)
        # shutdown() blocks until the serve loop exits; hop threads to
        # avoid deadlocking the loop's own thread
        threading.Thread(target=server.shutdown, daemon=True).start()

    previous = {}
    for sig in (signal.SIGINT, signal.SIGTERM):
        previous[sig] = signal.signal(sig, _shutdown)
    try:
        log.info("serving %d entries on %s", len(server.index), cfg.listen_address)
        server.serve_forever()
    finally:
        for sig, handler in previous.items():
            signal.signal(sig, handler)
        server.server_close()
