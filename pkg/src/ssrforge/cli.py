"""Command-line surface: generate, evaluate, baseline, verify, inspect, score.

Exit codes: 0 success, 1 validation/verification failure, 2 I/O or config
error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np
from PIL import Image

from .bench import (
    BenchError,
    DatasetConfig,
    assemble_dataset,
    evaluate,
    load_manifest,
    load_predictions,
    make_demo_corpus,
    random_baseline,
    write_predictions,
)
from .frames import FrameStoreError, load_sequence, sample_for_model
from .rewards import run_score_stream
from .report import render_text, write_report_files
from .taskgen import GenError

log = logging.getLogger("ssrforge")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2


def _load_config(name_or_path: str) -> DatasetConfig:
    """Resolve a config argument: a JSON file path or a bundled preset name."""
    path = Path(name_or_path)
    if path.exists():
        return DatasetConfig.from_json_file(path)
    preset = resources.files("ssrforge").joinpath(f"presets/{name_or_path}.json")
    if preset.is_file():
        return DatasetConfig.from_json_dict(json.loads(preset.read_text(encoding="utf-8")))
    raise BenchError(f"config not found (neither file nor preset): {name_or_path}")


# ============================================================================
# Subcommands
# ============================================================================


def cmd_generate(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    if not args.answers_only and not args.corpus:
        raise BenchError("--corpus is required unless --answers-only is set")
    started = time.monotonic()
    records = assemble_dataset(
        config,
        corpus_dir=args.corpus,
        out_dir=args.out,
        master_seed=args.seed,
        jobs=args.jobs,
        answers_only=args.answers_only,
    )
    elapsed = time.monotonic() - started
    by_cell: dict[str, int] = {}
    for r in records:
        by_cell[f"{r.task.value}/{r.subtype}"] = by_cell.get(f"{r.task.value}/{r.subtype}", 0) + 1
    print(f"generated {len(records)} records into {args.out} in {elapsed:.1f} s")
    for cell, n in sorted(by_cell.items()):
        print(f"  {cell:<28}{n:>8}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    records = load_manifest(args.manifest)
    preds, errors = load_predictions(args.predictions)
    report = evaluate(records, preds, mode=args.mode, prediction_errors=errors)
    out_dir = Path(args.out or Path(args.manifest).parent)
    paths = write_report_files(report, out_dir)
    print(render_text(report))
    print("wrote " + ", ".join(str(p) for p in paths.values()))
    return EXIT_OK


def cmd_baseline(args: argparse.Namespace) -> int:
    records = load_manifest(args.manifest)
    rng = np.random.default_rng(args.seed)
    predictions = random_baseline(records, rng)
    out_dir = Path(args.out or Path(args.manifest).parent)
    out_dir.mkdir(parents=True, exist_ok=True)
    pred_path = out_dir / "baseline_predictions.jsonl"
    write_predictions(predictions, pred_path)
    report = evaluate(records, {p["record_id"]: p for p in predictions}, mode=args.mode)
    paths = write_report_files(report, out_dir)
    print(render_text(report))
    print(f"wrote {pred_path}, " + ", ".join(str(p) for p in paths.values()))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    from .bench import verify_manifest

    records = load_manifest(args.manifest)
    if not records:
        print("no records", file=sys.stderr)
        return EXIT_VALIDATION
    base_dir = Path(args.manifest).parent
    diagnostics = verify_manifest(records, base_dir)
    failed = [d for d in diagnostics if not d["ok"]]
    for diag in failed:
        print(f"FAIL {diag['record_id']}: {diag['error']}", file=sys.stderr)
    print(f"verified {len(diagnostics)} records: {len(diagnostics) - len(failed)} ok, {len(failed)} failed")
    return EXIT_VALIDATION if failed else EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    records = load_manifest(args.manifest)
    match = next((r for r in records if r.id == args.record), None)
    if match is None:
        print(f"unknown record id: {args.record}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"id:         {match.id}")
    print(f"task:       {match.task.value}")
    print(f"subtype:    {match.subtype}")
    print(f"difficulty: {match.difficulty}")
    print(f"video_dir:  {match.video_dir or '(answers only)'}")
    print(f"fps:        {match.fps}")
    print(f"seed:       {match.seed}")
    print(f"answer:     {json.dumps(match.to_json_dict()['answer'])}")
    print(f"prompt:     {match.prompt}")
    print(f"gen_params: {json.dumps(match.gen_params)}")
    if args.sheet:
        if not match.video_dir:
            print("record has no video; cannot export a contact sheet", file=sys.stderr)
            return EXIT_VALIDATION
        video_dir = Path(match.video_dir)
        if not video_dir.is_absolute():
            video_dir = Path(args.manifest).parent / video_dir
        seq = load_sequence(video_dir)
        _write_contact_sheet(seq, args.sheet)
        print(f"wrote {args.sheet}")
    return EXIT_OK


def _write_contact_sheet(seq, path: str, max_tiles: int = 16, pad: int = 2) -> None:
    sampled = sample_for_model(seq, fps_target=seq.fps, max_frames=max_tiles)
    tiles = [Image.fromarray(f.pixels, mode="RGB") for f in sampled.frames]
    cols = min(4, len(tiles))
    rows = math.ceil(len(tiles) / cols)
    w, h = tiles[0].size
    canvas = Image.new("RGB", (cols * (w + pad) - pad, rows * (h + pad) - pad), (32, 32, 32))
    for i, tile in enumerate(tiles):
        canvas.paste(tile, ((i % cols) * (w + pad), (i // cols) * (h + pad)))
    canvas.save(path)


def cmd_score(args: argparse.Namespace) -> int:
    return run_score_stream(sys.stdin, sys.stdout)


def cmd_make_corpus(args: argparse.Namespace) -> int:
    paths = make_demo_corpus(
        args.out,
        num_videos=args.videos,
        duration=args.duration,
        fps=args.fps,
        size=(args.size, args.size),
        seed=args.seed,
    )
    print(f"wrote {len(paths)} synthetic videos under {args.out}")
    return EXIT_OK


# ============================================================================
# Argument parsing
# ============================================================================


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssr-forge",
        description="Generate video pretext-task datasets and score predictions.",
    )
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="assemble a dataset from a corpus")
    p.add_argument("--config", required=True, help="config JSON path or preset name")
    p.add_argument("--corpus", help="directory of frame-directory videos")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--seed", type=int, required=True, help="master seed")
    p.add_argument("--jobs", type=int, default=None, help="worker processes")
    p.add_argument("--answers-only", action="store_true", help="sample answers without rendering videos")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="score a predictions file against a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", help="report directory (default: manifest directory)")
    p.add_argument("--mode", choices=("strict", "smooth"), default="strict")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="run the random-guess agent and score it")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="output directory (default: manifest directory)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("strict", "smooth"), default="strict")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("verify", help="re-check every record's construction")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("inspect", help="dump one record")
    p.add_argument("--manifest", required=True)
    p.add_argument("--record", required=True, help="record id")
    p.add_argument("--sheet", help="write a contact-sheet PNG to this path")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("score", help="JSONL scoring protocol on stdin/stdout")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("make-corpus", help="write a synthetic demo corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--videos", type=int, default=10)
    p.add_argument("--duration", type=float, default=30.0)
    p.add_argument("--fps", type=float, default=2.0)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_make_corpus)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (BenchError, GenError, FrameStoreError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
