"""Command-line behavior: exit codes, report artifacts, determinism, protocol."""
from __future__ import annotations

import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from ssrforge import answer_to_dict, load_manifest
from ssrforge.cli import main

CONFIG = {
    "name": "clitest",
    "total_items": 6,
    "cells": [
        {"task": "grounding", "subtype": "mirror", "count": 2},
        {"task": "counting", "subtype": "easy", "count": 2},
        {"task": "jigsaw", "subtype": "easy", "count": 2},
    ],
    "grounding": {"min_len_frac": 0.2, "max_len_frac": 0.5, "min_len_seconds": 1.0},
}


@pytest.fixture(scope="module")
def config_path(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("cfg") / "config.json"
    path.write_text(json.dumps(CONFIG))
    return path


@pytest.fixture(scope="module")
def dataset(tmp_path_factory, small_corpus, config_path) -> Path:
    out = tmp_path_factory.mktemp("ds")
    code = main(
        ["generate", "--config", str(config_path), "--corpus", str(small_corpus),
         "--out", str(out), "--seed", "11"]
    )
    assert code == 0
    return out


def perfect_predictions_file(manifest: Path, out: Path) -> Path:
    records = load_manifest(manifest)
    path = out / "perfect.jsonl"
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps({"record_id": r.id, "answer": answer_to_dict(r.answer)}) + "\n")
    return path


# ============================================================================
# generate
# ============================================================================


def test_generate_reports_cells(dataset, capsys):
    assert (dataset / "manifest.jsonl").exists()
    assert len(load_manifest(dataset / "manifest.jsonl")) == 6


def test_generate_rerun_identical(small_corpus, config_path, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        code = main(
            ["generate", "--config", str(config_path), "--corpus", str(small_corpus),
             "--out", str(out), "--seed", "11"]
        )
        assert code == 0
    assert (a / "manifest.jsonl").read_bytes() == (b / "manifest.jsonl").read_bytes()
    pngs = sorted(p.relative_to(a) for p in a.rglob("*.png"))
    assert pngs
    for rel in pngs:
        assert (a / rel).read_bytes() == (b / rel).read_bytes()


def test_generate_missing_corpus_is_config_error(config_path, tmp_path):
    code = main(
        ["generate", "--config", str(config_path), "--corpus", str(tmp_path / "nope"),
         "--out", str(tmp_path / "o"), "--seed", "1"]
    )
    assert code == 2


def test_generate_unknown_preset(tmp_path):
    code = main(
        ["generate", "--config", "no-such-preset", "--out", str(tmp_path / "o"),
         "--seed", "1", "--answers-only"]
    )
    assert code == 2


def test_generate_answers_only(config_path, tmp_path, capsys):
    out = tmp_path / "ao"
    code = main(
        ["generate", "--config", str(config_path), "--out", str(out), "--seed", "3",
         "--answers-only"]
    )
    assert code == 0
    assert not (out / "videos").exists()
    assert len(load_manifest(out / "manifest.jsonl")) == 6
    stdout = capsys.readouterr().out
    assert "generated 6 records" in stdout


# ============================================================================
# verify
# ============================================================================


def test_verify_fresh_dataset(dataset, capsys):
    code = main(["verify", "--manifest", str(dataset / "manifest.jsonl")])
    captured = capsys.readouterr()
    assert code == 0
    assert "6 ok, 0 failed" in captured.out


def test_verify_corrupted_record(dataset, tmp_path, capsys):
    lines = (dataset / "manifest.jsonl").read_text().splitlines()
    rows = [json.loads(l) for l in lines]
    victim = next(r for r in rows if r["task"] == "counting")
    victim["answer"]["values"] = [v + 1 for v in victim["answer"]["values"]]
    bad_dir = tmp_path / "tampered"
    bad_dir.mkdir()
    # Keep videos resolvable from the copied manifest's directory.
    (bad_dir / "videos").symlink_to(dataset / "videos")
    (bad_dir / "manifest.jsonl").write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    code = main(["verify", "--manifest", str(bad_dir / "manifest.jsonl")])
    captured = capsys.readouterr()
    assert code == 1
    assert f"FAIL {victim['id']}" in captured.err
    assert "5 ok, 1 failed" in captured.out


def test_verify_empty_manifest(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    code = main(["verify", "--manifest", str(empty)])
    captured = capsys.readouterr()
    assert code == 1
    assert "no records" in captured.err


# ============================================================================
# evaluate
# ============================================================================


def test_evaluate_writes_all_report_files(dataset, tmp_path, capsys):
    preds = perfect_predictions_file(dataset / "manifest.jsonl", tmp_path)
    out = tmp_path / "rep"
    code = main(
        ["evaluate", "--manifest", str(dataset / "manifest.jsonl"),
         "--predictions", str(preds), "--out", str(out)]
    )
    assert code == 0
    for ext in ("json", "txt", "csv", "png"):
        assert (out / f"report.{ext}").exists(), ext
    data = json.loads((out / "report.json").read_text())
    assert data["overall"] == 100.0 and data["mode"] == "strict"
    with open(out / "report.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6
    assert {r["record_id"] for r in rows} == {r.id for r in load_manifest(dataset / "manifest.jsonl")}
    text = capsys.readouterr().out
    assert "overall" in text and "100.0" in text


def test_evaluate_smooth_mode(dataset, tmp_path):
    preds = perfect_predictions_file(dataset / "manifest.jsonl", tmp_path)
    out = tmp_path / "rep2"
    code = main(
        ["evaluate", "--manifest", str(dataset / "manifest.jsonl"),
         "--predictions", str(preds), "--out", str(out), "--mode", "smooth"]
    )
    assert code == 0
    data = json.loads((out / "report.json").read_text())
    assert data["mode"] == "smooth" and data["overall"] == 100.0


def test_evaluate_tolerates_bad_prediction_lines(dataset, tmp_path):
    preds = tmp_path / "partial.jsonl"
    records = load_manifest(dataset / "manifest.jsonl")
    with open(preds, "w") as fh:
        fh.write(json.dumps({"record_id": records[0].id, "text": "gibberish"}) + "\n")
        fh.write("{not json\n")
    out = tmp_path / "rep3"
    code = main(
        ["evaluate", "--manifest", str(dataset / "manifest.jsonl"),
         "--predictions", str(preds), "--out", str(out)]
    )
    assert code == 0  # scoring bad predictions is a result, not a failure
    data = json.loads((out / "report.json").read_text())
    assert data["unparseable"] == 1
    assert data["missing"] == len(records) - 1
    assert len(data["prediction_errors"]) == 1


# ============================================================================
# baseline
# ============================================================================


def test_baseline_deterministic(dataset, tmp_path):
    outs = [tmp_path / "b1", tmp_path / "b2"]
    for out in outs:
        code = main(
            ["baseline", "--manifest", str(dataset / "manifest.jsonl"),
             "--out", str(out), "--seed", "21"]
        )
        assert code == 0
    a, b = outs
    assert (a / "baseline_predictions.jsonl").read_bytes() == (b / "baseline_predictions.jsonl").read_bytes()
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    assert (a / "report.png").exists()


# ============================================================================
# inspect
# ============================================================================


def test_inspect_known_record(dataset, tmp_path, capsys):
    records = load_manifest(dataset / "manifest.jsonl")
    sheet = tmp_path / "sheet.png"
    code = main(
        ["inspect", "--manifest", str(dataset / "manifest.jsonl"),
         "--record", records[0].id, "--sheet", str(sheet)]
    )
    captured = capsys.readouterr()
    assert code == 0
    assert records[0].id in captured.out
    assert "prompt:" in captured.out
    assert sheet.exists() and sheet.stat().st_size > 0


def test_inspect_unknown_record(dataset, capsys):
    code = main(["inspect", "--manifest", str(dataset / "manifest.jsonl"), "--record", "ghost"])
    captured = capsys.readouterr()
    assert code == 1
    assert "unknown record id" in captured.err


# ============================================================================
# make-corpus
# ============================================================================


def test_make_corpus(tmp_path, capsys):
    out = tmp_path / "corpus"
    code = main(
        ["make-corpus", "--out", str(out), "--videos", "2", "--duration", "10",
         "--fps", "2", "--size", "48", "--seed", "4"]
    )
    assert code == 0
    dirs = sorted(p for p in out.iterdir() if p.is_dir())
    assert len(dirs) == 2
    assert all((d / "sequence.json").exists() for d in dirs)


# ============================================================================
# score (subprocess: the protocol as an external process sees it)
# ============================================================================


def test_score_subprocess_round_trip():
    requests = [
        {"record_id": "g", "task": "grounding",
         "gt": {"type": "interval", "start": 0.0, "end": 2.0}, "pred_text": "1 to 3"},
        {"record_id": "c", "task": "counting",
         "gt": {"type": "counts", "values": [4]}, "pred_text": "6"},
        {"record_id": "j", "task": "jigsaw",
         "gt": {"type": "permutation", "order": [1, 2, 3, 4]},
         "pred": {"type": "permutation", "order": [2, 1, 3, 4]}},
        {"record_id": "u", "task": "jigsaw",
         "gt": {"type": "permutation", "order": [1, 2, 3, 4]}, "pred_text": "no idea"},
    ]
    payload = "\n".join(json.dumps(r) for r in requests) + "\n"
    proc = subprocess.run(
        [sys.executable, "-m", "ssrforge", "score"],
        input=payload, capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0, proc.stderr
    responses = [json.loads(l) for l in proc.stdout.splitlines()]
    assert [r["record_id"] for r in responses] == ["g", "c", "j", "u"]
    assert responses[0]["smooth"] == pytest.approx(1 / 3, abs=1e-12)
    assert responses[1]["smooth"] == 0.5
    assert responses[2]["smooth"] == 0.75 and responses[2]["strict"] == 0.0
    assert responses[3]["smooth"] == 0.0 and "unparseable" in responses[3]["components"]


def test_console_script_installed():
    proc = subprocess.run(["ssr-forge", "--help"], capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert "generate" in proc.stdout and "score" in proc.stdout
