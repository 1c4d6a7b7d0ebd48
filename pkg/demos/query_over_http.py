"""
Serving a pose index over HTTP
==============================

The same index the library queries in-process can be served read-only
over HTTP.  This spins a server up on a free port, exercises the
endpoints with the standard library client, and shuts it down.

From a shell the equivalent is:

    poseforge ingest --annotations ann.json --labels labels.csv --out poses.idx
    poseforge serve --index poses.idx --addr 127.0.0.1:8765
"""

import json
import tempfile
import threading
from http.client import HTTPConnection
from pathlib import Path

import numpy as np

from poseforge import IndexEntry, PoseServer, build_index, load_index, normalize_pose, save_index

rng = np.random.default_rng(9)

# A small index persisted to disk, exactly as `poseforge ingest` would.
# Each character strikes its own pose, so retrieval has something to find.
stances = {"hero": rng.uniform(100.0, 300.0, size=(17, 2)),
           "rival": rng.uniform(100.0, 300.0, size=(17, 2))}
entries = []
for i in range(12):
    character = "hero" if i % 2 else "rival"
    xy = stances[character] + rng.normal(0.0, 5.0, size=(17, 2))
    flat = np.column_stack([xy, np.full(17, 2.0)]).ravel()
    entries.append(IndexEntry(f"p{i:02d}", normalize_pose(flat), 4e4,
                              character=character, scene="duel"))

tmp = tempfile.TemporaryDirectory()
index_path = Path(tmp.name) / "poses.idx"
save_index(build_index(entries), index_path)

# Port 0 asks the OS for any free port; the CLI path takes a fixed one.
server = PoseServer(("127.0.0.1", 0), load_index(index_path), log_requests=False)
threading.Thread(target=server.serve_forever, daemon=True).start()
port = server.server_address[1]


def get(path):
    conn = HTTPConnection("127.0.0.1", port, timeout=5)
    conn.request("GET", path)
    resp = conn.getresponse()
    body = resp.read().decode()
    conn.close()
    return resp.status, body


status, body = get("/health")
print("GET /health       ->", status, body.strip())

status, body = get("/entries?limit=2")
print("GET /entries      ->", status, "first ids:",
      [e["person_id"] for e in json.loads(body)["entries"]])

status, body = get("/retrieve?person=p00&k=3")
hits = json.loads(body)["results"]
print("GET /retrieve     ->", status,
      [(h["person_id"], round(h["score"], 3)) for h in hits])

status, body = get("/metrics/retrieval?mode=character&k=5")
print("GET /metrics      ->", status, "mean_p1 =", json.loads(body)["mean_p1"])

server.shutdown()
tmp.cleanup()
print("server stopped")
