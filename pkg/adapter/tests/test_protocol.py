"""Wire-protocol conformance, including a fuzzed 10,000-request stream."""

from __future__ import annotations

import json
import random
import subprocess
import sys
import time
from pathlib import Path


def _spawn(artifact: Path, *extra: str) -> subprocess.Popen:
    return subprocess.Popen(
        [sys.executable, "-m", "sentadapter", "serve", "--model", str(artifact), *extra],
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        stderr=subprocess.DEVNULL,
    )


def _read_line(proc: subprocess.Popen, timeout: float = 60.0) -> dict:
    line = proc.stdout.readline()
    if not line:
        raise AssertionError("adapter closed its output")
    return json.loads(line)


class TestProtocolBasics:
    def test_readiness_then_valid_triple(self, trained_artifact):
        proc = _spawn(trained_artifact)
        try:
            assert _read_line(proc) == {"ready": True}
            proc.stdin.write('{"id": "a", "text": "fantastisk grønn sak"}\n'.encode())
            proc.stdin.flush()
            reply = _read_line(proc)
            assert reply["id"] == "a"
            assert len(reply["scores"]) == 3
            assert all(s >= 0 for s in reply["scores"])
            assert abs(sum(reply["scores"]) - 1.0) <= 1e-6
        finally:
            proc.stdin.close()
            proc.wait(timeout=10)

    def test_malformed_line_gets_error_object_stream_continues(self, trained_artifact):
        proc = _spawn(trained_artifact)
        try:
            assert _read_line(proc) == {"ready": True}
            proc.stdin.write(b"garbage that is not json\n")
            proc.stdin.flush()
            err = _read_line(proc)
            assert "error" in err and "scores" not in err
            proc.stdin.write('{"id": "after", "text": "rapport om utbygging"}\n'.encode())
            proc.stdin.flush()
            reply = _read_line(proc)
            assert reply["id"] == "after"
        finally:
            proc.stdin.close()
            proc.wait(timeout=10)

    def test_missing_fields_is_malformed(self, trained_artifact):
        proc = _spawn(trained_artifact)
        try:
            assert _read_line(proc) == {"ready": True}
            proc.stdin.write(b'{"id": "x"}\n{"text": "no id"}\n{"id": 5, "text": "y"}\n')
            proc.stdin.flush()
            for _ in range(3):
                assert "error" in _read_line(proc)
        finally:
            proc.stdin.close()
            proc.wait(timeout=10)


class TestFuzzedStream:
    def test_ten_thousand_requests(self, trained_artifact):
        rng = random.Random(99)
        words = ["ødelegger", "rapport", "fantastisk", "saken", "fjellet", "høring"]
        valid_ids = []
        lines = []
        for i in range(10000):
            roll = rng.random()
            if roll < 0.9:
                rid = f"req{i:05d}"
                valid_ids.append(rid)
                text = " ".join(rng.sample(words, k=3))
                lines.append(json.dumps({"id": rid, "text": text}))
            elif roll < 0.94:
                lines.append("{{{{ broken json " + str(i))
            elif roll < 0.97:
                lines.append(json.dumps({"id": i, "text": "id is not a string"}))
            else:
                lines.append(json.dumps({"text": "missing id entirely"}))
        payload = ("\n".join(lines) + "\n").encode("utf-8")

        proc = _spawn(trained_artifact, "--batch-size", "64")
        try:
            assert _read_line(proc) == {"ready": True}
            start = time.perf_counter()
            stdout, _ = proc.communicate(payload, timeout=300)
            elapsed = time.perf_counter() - start
        finally:
            proc.kill()

        answered: dict[str, int] = {}
        errors = 0
        for raw in stdout.splitlines():
            obj = json.loads(raw)
            if "error" in obj:
                errors += 1
                continue
            rid = obj["id"]
            answered[rid] = answered.get(rid, 0) + 1
            scores = obj["scores"]
            assert len(scores) == 3
            assert all(s >= 0 for s in scores)
            assert abs(sum(scores) - 1.0) <= 1e-6
        assert set(answered) == set(valid_ids)
        assert all(count == 1 for count in answered.values())
        assert errors == 10000 - len(valid_ids)
        print(
            f"[SECONDARY] protocol-fuzz: PASS ({len(valid_ids)} well-formed ids answered "
            f"exactly once, {errors} error objects, {elapsed:.1f}s)"
        )


class TestTcpMode:
    def test_tcp_round_trip(self, trained_artifact):
        import socket

        proc = subprocess.Popen(
            [
                sys.executable,
                "-m",
                "sentadapter",
                "serve",
                "--model",
                str(trained_artifact),
                "--listen",
                "127.0.0.1:0",
            ],
            stderr=subprocess.PIPE,
        )
        try:
            # the chosen port is logged on stderr
            port = None
            deadline = time.time() + 30
            while time.time() < deadline:
                line = proc.stderr.readline().decode()
                if "listening on" in line:
                    port = int(line.rsplit(":", 1)[1])
                    break
            assert port, "server never announced its port"
            with socket.create_connection(("127.0.0.1", port), timeout=10) as sock:
                fh = sock.makefile("rwb")
                assert json.loads(fh.readline()) == {"ready": True}
                fh.write('{"id": "t", "text": "skandale og naturtap"}\n'.encode())
                fh.flush()
                reply = json.loads(fh.readline())
                assert reply["id"] == "t"
                assert len(reply["scores"]) == 3
        finally:
            proc.terminate()
            proc.wait(timeout=10)
