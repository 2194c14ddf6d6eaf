#!/usr/bin/env python3
"""Regenerate the golden scoring vectors (test_vectors.jsonl).

Each line is {"request": <scoring-protocol request>, "expected": <response>},
with the expected side computed by the primary engine in-process. The file is
deterministic for a fixed seed; rerunning this script must be a no-op diff.

Usage: python3 scripts/generate_vectors.py [out_path]
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from ssrforge import score_request

SEED = 20_250_814
TOTAL = 500


def interval(rng) -> dict:
    d = float(rng.uniform(20.0, 120.0))
    a = float(rng.uniform(0.0, d * 0.8))
    b = float(min(d, a + rng.uniform(0.5, d * 0.5)))
    return {"type": "interval", "start": a, "end": b}


def counts(rng, k: int) -> dict:
    return {"type": "counts", "values": [int(v) for v in rng.integers(0, 17, size=k)]}


def permutation(rng, n: int) -> dict:
    return {"type": "permutation", "order": [int(x) + 1 for x in rng.permutation(n)]}


def grounding_cases(rng) -> list[dict]:
    reqs: list[dict] = []
    for _ in range(45):  # structured predictions
        reqs.append({"task": "grounding", "gt": interval(rng), "pred": interval(rng)})
    text_forms = [
        "The altered span runs from {a:.2f} to {b:.2f} seconds.",
        "starts at {a:.1f}s and ends near {b:.1f}s",
        "ends around {b:.2f}, having started at {a:.2f}",
        "between {a:.3f} and {b:.3f}",
        "t_s={a:.2f}, t_e={b:.2f}",
    ]
    for i in range(60):  # parseable free text
        gt = interval(rng)
        guess = interval(rng)
        text = text_forms[i % len(text_forms)].format(a=guess["start"], b=guess["end"])
        reqs.append({"task": "grounding", "gt": gt, "pred_text": text})
    bad_texts = ["somewhere near the middle", "around 12 seconds", "", "no anomaly visible", "..."]
    for i in range(30):  # unparseable
        reqs.append({"task": "grounding", "gt": interval(rng), "pred_text": bad_texts[i % len(bad_texts)]})
    for _ in range(5):  # exact hit
        gt = interval(rng)
        reqs.append({"task": "grounding", "gt": gt, "pred": dict(gt)})
    for _ in range(5):  # certainly disjoint
        gt = interval(rng)
        far = gt["end"] + 50.0
        reqs.append(
            {"task": "grounding", "gt": gt,
             "pred": {"type": "interval", "start": far, "end": far + 3.0}}
        )
    for _ in range(5):  # wrong answer variant
        reqs.append({"task": "grounding", "gt": interval(rng), "pred": counts(rng, 3)})
    return reqs


def counting_cases(rng) -> list[dict]:
    reqs: list[dict] = []
    for i in range(45):  # structured
        k = [1, 2, 3, 3, 3, 4][i % 6]
        reqs.append({"task": "counting", "gt": counts(rng, k), "pred": counts(rng, k)})
    text_forms = [
        "circles: {v0}, rectangles: {v1}, triangles: {v2}",
        "{v0} {v1} {v2}",
        "I count {v0}, then {v1}, then {v2}.",
        "circles {v0} / rectangles {v1} / triangles {v2}",
        "final tally -> {v0}, {v1}, {v2}",
    ]
    for i in range(60):  # parseable text, k=3
        gt = counts(rng, 3)
        guess = [int(v) for v in rng.integers(0, 13, size=3)]
        text = text_forms[i % len(text_forms)].format(v0=guess[0], v1=guess[1], v2=guess[2])
        reqs.append({"task": "counting", "gt": gt, "pred_text": text})
    bad_texts = ["a few of each", "3 and maybe two more", "several circles", "", "lots"]
    for i in range(30):
        reqs.append({"task": "counting", "gt": counts(rng, 3), "pred_text": bad_texts[i % len(bad_texts)]})
    for _ in range(5):  # zero ground truth pins the epsilon guard
        reqs.append(
            {"task": "counting", "gt": {"type": "counts", "values": [0, 2, 0]},
             "pred": counts(rng, 3)}
        )
    for _ in range(5):  # negative text clamps to zero
        gt = counts(rng, 3)
        reqs.append({"task": "counting", "gt": gt, "pred_text": "-2, 3, 1"})
    for _ in range(5):  # length mismatch scores zero
        reqs.append({"task": "counting", "gt": counts(rng, 3), "pred": counts(rng, 2)})
    return reqs


def jigsaw_cases(rng) -> list[dict]:
    reqs: list[dict] = []
    for i in range(45):  # structured
        n = [2, 3, 4, 5, 6, 7, 8, 9][i % 8]
        reqs.append({"task": "jigsaw", "gt": permutation(rng, n), "pred": permutation(rng, n)})
    text_forms = ["the original order is {d}.", "{d}", "answer: {d}", "sequence {d} restores it", "-> {d}"]
    for i in range(60):  # digit-string text
        n = [6, 8, 4, 6, 8][i % 5]
        gt = permutation(rng, n)
        guess = "".join(str(v) for v in permutation(rng, n)["order"])
        reqs.append({"task": "jigsaw", "gt": gt, "pred_text": text_forms[i % len(text_forms)].format(d=guess)})
    bad_texts = ["213", "one two three four five six", "0123456", "segment soup", "111111"]
    for i in range(30):
        reqs.append({"task": "jigsaw", "gt": permutation(rng, 6), "pred_text": bad_texts[i % len(bad_texts)]})
    for _ in range(5):  # exact restoration
        gt = permutation(rng, 8)
        reqs.append({"task": "jigsaw", "gt": gt, "pred": dict(gt)})
    for _ in range(5):  # full reversal floors the smooth reward
        gt = {"type": "permutation", "order": list(range(1, 7))}
        reqs.append({"task": "jigsaw", "gt": gt, "pred": {"type": "permutation", "order": list(range(6, 0, -1))}})
    for _ in range(5):  # wrong n scores zero
        reqs.append({"task": "jigsaw", "gt": permutation(rng, 6), "pred": permutation(rng, 7)})
    return reqs


def protocol_cases(rng) -> list[dict]:
    reqs: list[dict] = []
    for _ in range(15):  # no prediction at all
        reqs.append({"task": "counting", "gt": counts(rng, 3)})
    for _ in range(10):  # explicit nulls behave like missing
        reqs.append({"task": "grounding", "gt": interval(rng), "pred": None, "pred_text": None})
    for _ in range(10):  # unknown task -> malformed-request response
        reqs.append({"task": "sorting", "gt": counts(rng, 3), "pred_text": "1 2 3"})
    for _ in range(8):  # gt missing -> malformed-request response
        reqs.append({"task": "jigsaw", "pred_text": "123456"})
    for _ in range(7):  # gt fails answer validation -> malformed-request response
        reqs.append(
            {"task": "counting", "gt": {"type": "counts", "values": [-1, 2]},
             "pred_text": "1 2"}
        )
    return reqs


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "test_vectors.jsonl"
    rng = np.random.default_rng(SEED)
    requests = grounding_cases(rng) + counting_cases(rng) + jigsaw_cases(rng) + protocol_cases(rng)
    assert len(requests) == TOTAL, len(requests)
    lines = []
    for i, req in enumerate(requests):
        req = {"record_id": f"v{i:03d}", **req}
        expected = score_request(json.loads(json.dumps(req)))
        lines.append(json.dumps({"request": req, "expected": expected}))
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} vectors to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
