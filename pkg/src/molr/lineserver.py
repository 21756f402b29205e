"""Newline-delimited batch query protocol over TCP.

Requests are single lines: ``QUERY <user_id> <k>`` answered with one line
``OK <id:score> <id:score> ...`` (score-descending), or ``ERR <message>``
for anything malformed; ``QUIT`` closes the connection. Each connection
runs on its own worker over the shared immutable engine, so responses
never interleave. The ``MOLR_THREADS`` environment variable caps the
number of connections served concurrently.
"""

from __future__ import annotations

import os
import socketserver
import threading

from molr.engine import RetrievalEngine
from molr.errors import MolrError


def _format_response(results) -> str:
    return "OK " + " ".join(f"{item}:{score:.6f}" for item, score in results)


def handle_line(engine: RetrievalEngine, line: str) -> str | None:
    """Protocol logic shared by the TCP server and tests; None means close."""
    parts = line.strip().split()
    if not parts:
        return "ERR parse"
    if parts[0] == "QUIT":
        return None
    if parts[0] != "QUERY" or len(parts) != 3:
        return "ERR parse"
    try:
        user_id = int(parts[1])
        k = int(parts[2])
    except ValueError:
        return "ERR parse"
    if k < 1:
        return "ERR k must be >= 1"
    if not 0 <= user_id < engine.num_users:
        return f"ERR unknown user {user_id}"
    try:
        results = engine.query(user_id, k)
    except MolrError as exc:
        return f"ERR {exc}"
    return _format_response(results)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        with self.server.worker_slots:  # type: ignore[attr-defined]
            while True:
                raw = self.rfile.readline()
                if not raw:
                    return
                try:
                    line = raw.decode("utf-8")
                except UnicodeDecodeError:
                    self.wfile.write(b"ERR parse\n")
                    continue
                reply = handle_line(self.server.engine, line)  # type: ignore[attr-defined]
                if reply is None:
                    return
                self.wfile.write(reply.encode("utf-8") + b"\n")
                self.wfile.flush()


class LineServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, engine: RetrievalEngine, host: str = "127.0.0.1", port: int = 0):
        super().__init__((host, port), _Handler)
        self.engine = engine
        max_workers = int(os.environ.get("MOLR_THREADS", "8"))
        self.worker_slots = threading.BoundedSemaphore(max(1, max_workers))

    @property
    def port(self) -> int:
        return self.server_address[1]


def serve_forever(engine: RetrievalEngine, port: int, host: str = "127.0.0.1") -> None:
    with LineServer(engine, host=host, port=port) as server:
        server.serve_forever()
