"""Protocol responder: line-delimited scoring over stdio or TCP.

Emits {"ready": true} once the model is loaded, then answers each
{"id", "text"} request line with {"id", "scores": [neg, neu, pos]}.
Malformed lines get an error object and the stream continues. Requests
that arrive close together are scored as one batch.
"""

from __future__ import annotations

import json
import logging
import select
import socket
import sys
from pathlib import Path
from typing import BinaryIO, Optional

from .modeling import load_artifact, score_texts

log = logging.getLogger(__name__)

DEFAULT_BATCH = 32


class _LineChannel:
    """Buffered line reading with an optional zero-wait peek."""

    def __init__(self, rfile: BinaryIO, wfile: BinaryIO, fd: Optional[int] = None):
        self._rfile = rfile
        self._wfile = wfile
        self._fd = fd if fd is not None else rfile.fileno()
        self._buf = b""
        self._eof = False

    def _pop_line(self) -> Optional[bytes]:
        if b"\n" in self._buf:
            line, self._buf = self._buf.split(b"\n", 1)
            return line
        return None

    def _fill(self, timeout: Optional[float]) -> bool:
        if self._eof:
            return False
        if timeout is not None:
            ready, _, _ = select.select([self._fd], [], [], timeout)
            if not ready:
                return False
        chunk = self._rfile.read1(65536) if hasattr(self._rfile, "read1") else self._rfile.read(65536)
        if not chunk:
            self._eof = True
            return False
        self._buf += chunk
        return True

    def read_line(self) -> Optional[str]:
        """Blocking read; None at end of stream."""
        while True:
            line = self._pop_line()
            if line is not None:
                return line.decode("utf-8", errors="replace")
            if not self._fill(None):
                if self._buf:
                    line, self._buf = self._buf, b""
                    return line.decode("utf-8", errors="replace")
                return None

    def read_line_nowait(self) -> Optional[str]:
        line = self._pop_line()
        if line is not None:
            return line.decode("utf-8", errors="replace")
        if self._fill(0.0):
            line = self._pop_line()
            if line is not None:
                return line.decode("utf-8", errors="replace")
        return None

    def write_line(self, payload: dict) -> None:
        self._wfile.write(json.dumps(payload, ensure_ascii=False).encode("utf-8") + b"\n")
        self._wfile.flush()


class Responder:
    def __init__(self, artifact_dir: str | Path, batch_size: int = DEFAULT_BATCH):
        self.tokenizer, self.model, self.config = load_artifact(artifact_dir)
        self.batch_size = batch_size

    def _parse(self, line: str) -> Optional[tuple[str, str]]:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            return None
        if not isinstance(obj, dict) or not isinstance(obj.get("id"), str) or not isinstance(
            obj.get("text"), str
        ):
            return None
        return obj["id"], obj["text"]

    def _flush(self, channel: _LineChannel, pending: list[tuple[str, str]]) -> None:
        if not pending:
            return
        scores = score_texts(
            self.tokenizer,
            self.model,
            [text for _, text in pending],
            self.config.max_length,
            batch_size=self.batch_size,
        )
        for (rid, _), triple in zip(pending, scores):
            channel.write_line({"id": rid, "scores": triple})
        pending.clear()

    def serve_channel(self, channel: _LineChannel) -> None:
        channel.write_line({"ready": True})
        pending: list[tuple[str, str]] = []
        while True:
            line = channel.read_line()
            if line is None:
                break
            while True:
                if line.strip():
                    parsed = self._parse(line)
                    if parsed is None:
                        # answer bad lines immediately, keep the stream alive
                        self._flush(channel, pending)
                        channel.write_line({"id": None, "error": "malformed request line"})
                    else:
                        pending.append(parsed)
                        if len(pending) >= self.batch_size:
                            self._flush(channel, pending)
                nxt = channel.read_line_nowait()
                if nxt is None:
                    break
                line = nxt
            self._flush(channel, pending)
        self._flush(channel, pending)

    def serve_stdio(self) -> None:
        channel = _LineChannel(sys.stdin.buffer, sys.stdout.buffer, fd=sys.stdin.fileno())
        self.serve_channel(channel)

    def serve_tcp(self, host: str, port: int) -> None:
        """Sequential connection loop; one protocol session per client."""
        server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        server.bind((host, port))
        server.listen(1)
        log.info("listening on %s:%d", host, server.getsockname()[1])
        try:
            while True:
                conn, peer = server.accept()
                log.info("connection from %s", peer)
                with conn:
                    rfile = conn.makefile("rb")
                    wfile = conn.makefile("wb")
                    try:
                        self.serve_channel(_LineChannel(rfile, wfile, fd=conn.fileno()))
                    except (BrokenPipeError, ConnectionResetError):
                        log.info("client disconnected")
        finally:
            server.close()
