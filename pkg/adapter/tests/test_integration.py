"""Primary pipeline pointed at this adapter over the wire protocol.

Drives the pipeline package's classify stage with backend=external and
this adapter as the spawned command, over the shipped demo corpus.
"""

from __future__ import annotations

import csv
import sys
from pathlib import Path

import pytest

geosent_cli = pytest.importorskip("geosent.cli", reason="pipeline package not installed")

DEMO_CONFIG = Path(__file__).resolve().parents[2] / "data" / "demo" / "config.yaml"


@pytest.mark.skipif(not DEMO_CONFIG.exists(), reason="demo corpus not present")
def test_pipeline_classifies_demo_corpus_through_adapter(trained_artifact, tmp_path):
    run_dir = tmp_path / "run"
    for stage in ("ingest", "geocode", "clean"):
        code = geosent_cli.main(
            [stage, "--config", str(DEMO_CONFIG), "--run-dir", str(run_dir)]
        )
        assert code == 0, f"stage {stage} exited {code}"

    command = f"{sys.executable} -m sentadapter serve --model {trained_artifact} --stdio"
    code = geosent_cli.main(
        [
            "classify",
            "--config",
            str(DEMO_CONFIG),
            "--run-dir",
            str(run_dir),
            "--set",
            "backend=external",
            "--set",
            f"adapter_command={command}",
        ]
    )
    assert code == 0

    clean_count = len((run_dir / "corpus_clean.jsonl").read_text().splitlines())
    with open(run_dir / "predictions.csv", encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == clean_count
    for row in rows:
        total = (
            float(row["score_negative"])
            + float(row["score_neutral"])
            + float(row["score_positive"])
        )
        assert abs(total - 1.0) <= 1e-6
    print(
        f"[SECONDARY] pipeline-through-adapter: PASS ({len(rows)} demo documents classified)"
    )
