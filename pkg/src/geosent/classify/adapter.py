"""Client side of the external-classifier wire protocol.

Line-delimited JSON over a spawned process's standard streams or a TCP
socket: the adapter announces {"ready": true}, then answers each
{"id", "text"} request with an {"id", "scores": [neg, neu, pos]} line,
in any order, every id exactly once. A batch that times out or violates
the protocol is retried once against a fresh transport, then fatal.
"""

from __future__ import annotations

import json
import logging
import os
import select
import shlex
import socket
import subprocess
import time
from typing import Callable, Optional, Sequence

from ..errors import AdapterError
from ..textprep import CleanedDocument
from .labels import Prediction

log = logging.getLogger(__name__)

DEFAULT_BATCH_SIZE = 64
DEFAULT_TIMEOUT = 30.0


class _ProtocolViolation(Exception):
    """Internal: one batch went wrong; retriable once."""


class StdioTransport:
    """Adapter subprocess speaking the protocol on stdin/stdout."""

    def __init__(self, command: Sequence[str]):
        self.command = list(command)
        self._proc: Optional[subprocess.Popen] = None
        self._buf = b""

    def start(self) -> None:
        self._buf = b""
        self._proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
        )

    def send_line(self, line: str) -> None:
        assert self._proc is not None and self._proc.stdin is not None
        self._proc.stdin.write(line.encode("utf-8") + b"\n")
        self._proc.stdin.flush()

    def recv_line(self, deadline: float) -> str:
        assert self._proc is not None and self._proc.stdout is not None
        fd = self._proc.stdout.fileno()
        while b"\n" not in self._buf:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise _ProtocolViolation("adapter timed out")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                raise _ProtocolViolation("adapter timed out")
            chunk = os.read(fd, 65536)
            if not chunk:
                raise _ProtocolViolation("adapter closed its output stream")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line.decode("utf-8")

    def close(self) -> None:
        if self._proc is None:
            return
        try:
            if self._proc.stdin is not None:
                self._proc.stdin.close()
            self._proc.terminate()
            self._proc.wait(timeout=5)
        except Exception:
            self._proc.kill()
        self._proc = None


class TcpTransport:
    """Adapter reachable at host:port speaking the same line protocol."""

    def __init__(self, address: str):
        host, _, port = address.rpartition(":")
        if not host or not port.isdigit():
            raise AdapterError(f"bad adapter address {address!r}, expected host:port")
        self.host = host
        self.port = int(port)
        self._sock: Optional[socket.socket] = None
        self._buf = b""

    def start(self) -> None:
        self._buf = b""
        self._sock = socket.create_connection((self.host, self.port), timeout=10)
        self._sock.setblocking(False)

    def send_line(self, line: str) -> None:
        assert self._sock is not None
        self._sock.sendall(line.encode("utf-8") + b"\n")

    def recv_line(self, deadline: float) -> str:
        assert self._sock is not None
        while b"\n" not in self._buf:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise _ProtocolViolation("adapter timed out")
            ready, _, _ = select.select([self._sock], [], [], remaining)
            if not ready:
                raise _ProtocolViolation("adapter timed out")
            chunk = self._sock.recv(65536)
            if not chunk:
                raise _ProtocolViolation("adapter closed the connection")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line.decode("utf-8")

    def close(self) -> None:
        if self._sock is not None:
            self._sock.close()
            self._sock = None


def transport_from_config(
    command: Optional[str] = None, address: Optional[str] = None
) -> Callable[[], object]:
    if command:
        return lambda: StdioTransport(shlex.split(command))
    if address:
        return lambda: TcpTransport(address)
    raise AdapterError("external backend needs an adapter command or address")


class AdapterClient:
    """Batched scoring against an external adapter, with one retry."""

    def __init__(
        self,
        transport_factory: Callable[[], object],
        batch_size: int = DEFAULT_BATCH_SIZE,
        timeout: float = DEFAULT_TIMEOUT,
    ):
        self._factory = transport_factory
        self._transport = None
        self.batch_size = batch_size
        self.timeout = timeout

    def _ensure_started(self) -> None:
        if self._transport is None:
            self._transport = self._factory()
            self._transport.start()
            self._await_ready()

    def _await_ready(self) -> None:
        deadline = time.monotonic() + self.timeout
        line = self._transport.recv_line(deadline)
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise _ProtocolViolation(f"bad readiness line: {line!r}") from exc
        if obj != {"ready": True}:
            raise _ProtocolViolation(f"bad readiness line: {line!r}")

    def _restart(self) -> None:
        if self._transport is not None:
            self._transport.close()
            self._transport = None
        self._ensure_started()

    def _run_batch(self, batch: Sequence[CleanedDocument]) -> dict[str, Prediction]:
        pending = {doc.post_id for doc in batch}
        for doc in batch:
            self._transport.send_line(
                json.dumps({"id": doc.post_id, "text": doc.text}, ensure_ascii=False)
            )
        results: dict[str, Prediction] = {}
        deadline = time.monotonic() + self.timeout
        while pending:
            line = self._transport.recv_line(deadline)
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise _ProtocolViolation(f"unparseable response line: {line!r}") from exc
            if not isinstance(obj, dict) or "id" not in obj:
                raise _ProtocolViolation(f"response without id: {line!r}")
            rid = obj["id"]
            if rid not in pending:
                raise _ProtocolViolation(f"unexpected or duplicate response id: {line!r}")
            scores = obj.get("scores")
            if not isinstance(scores, list) or len(scores) != 3:
                raise _ProtocolViolation(f"response without a score triple: {line!r}")
            try:
                results[rid] = Prediction.from_scores(rid, scores)
            except ValueError as exc:
                raise _ProtocolViolation(f"invalid scores in response: {line!r}") from exc
            pending.discard(rid)
        return results

    def score_documents(self, docs: Sequence[CleanedDocument]) -> list[Prediction]:
        out: list[Prediction] = []
        for start in range(0, len(docs), self.batch_size):
            batch = docs[start : start + self.batch_size]
            try:
                self._ensure_started()
                results = self._run_batch(batch)
            except _ProtocolViolation as first:
                log.warning("adapter batch failed (%s); retrying once", first)
                try:
                    self._restart()
                    results = self._run_batch(batch)
                except _ProtocolViolation as second:
                    self.close()
                    raise AdapterError(f"adapter failed twice: {second}") from second
            out.extend(results[doc.post_id] for doc in batch)
        return out

    def close(self) -> None:
        if self._transport is not None:
            self._transport.close()
            self._transport = None
