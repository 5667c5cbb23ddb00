"""Scriptable stand-in adapter for wire-protocol client tests.

Modes:
  fixed    answer every id with scores [0.1, 0.2, 0.7]
  tie      answer with [0.4, 0.4, 0.2]
  swap     answer requests two at a time, in swapped order
  garbage  reply with unparseable lines forever
  flaky    misbehave on the first process run (tracked in --state),
           behave normally after a restart
  hang     read requests but never answer
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


def respond(obj: dict, scores: list[float]) -> None:
    sys.stdout.write(json.dumps({"id": obj["id"], "scores": scores}) + "\n")
    sys.stdout.flush()


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--mode", default="fixed")
    parser.add_argument("--state")
    args = parser.parse_args()

    mode = args.mode
    if mode == "flaky":
        state = Path(args.state)
        if state.exists():
            mode = "fixed"
        else:
            state.write_text("ran once")
            mode = "garbage"

    sys.stdout.write(json.dumps({"ready": True}) + "\n")
    sys.stdout.flush()

    held = None
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        if mode == "fixed":
            respond(obj, [0.1, 0.2, 0.7])
        elif mode == "tie":
            respond(obj, [0.4, 0.4, 0.2])
        elif mode == "swap":
            if held is None:
                held = obj
            else:
                respond(obj, [0.1, 0.2, 0.7])
                respond(held, [0.7, 0.2, 0.1])
                held = None
        elif mode == "garbage":
            sys.stdout.write("}} not json {{\n")
            sys.stdout.flush()
        elif mode == "hang":
            pass
    if held is not None:
        respond(held, [0.7, 0.2, 0.1])


if __name__ == "__main__":
    main()
