"""Scoring engine: smooth dense rewards, strict benchmark scores, free-text parsers.

Smooth rewards are dense values in [0, 1] suitable for RL training; strict
scores are the benchmark rules (exact per-class count match, all-or-nothing
permutation match, raw interval IoU). Both are pure and stateless.

The module also implements a line-oriented scoring protocol: JSONL requests
{record_id, task, gt, pred_text | pred} on stdin become JSONL responses
{record_id, smooth, strict, components} on stdout, order-preserving. External
clients bind to this wire contract rather than linking the library.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import IO, Sequence

from .answers import (
    AnswerError,
    AnswerValue,
    CountsAnswer,
    ParsedAnswer,
    PermutationAnswer,
    Task,
    Unparseable,
    answer_from_dict,
)
from .frames import TimeInterval

COUNT_EPSILON = 1e-9

_REAL_RE = re.compile(r"[-+]?(?:\d+\.\d*|\.\d+|\d+)")
_INT_RE = re.compile(r"[-+]?\d+")
_DIGIT_RUN_RE = re.compile(r"\d+")


class RewardError(ValueError):
    """Invalid scoring inputs (mismatched lengths, not a permutation, ...)."""


@dataclass(frozen=True)
class RewardValue:
    """A reward in [0, 1] with an optional per-component breakdown."""

    value: float
    components: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise RewardError(f"reward {self.value} outside [0, 1]")


@dataclass(frozen=True)
class PredictionRecord:
    """One model prediction: free text, a structured answer, or both."""

    record_id: str
    raw_text: str | None = None
    parsed: ParsedAnswer | None = None

    def __post_init__(self) -> None:
        if self.raw_text is None and self.parsed is None:
            raise RewardError(f"prediction {self.record_id!r} has neither text nor answer")


# ============================================================================
# Smooth rewards
# ============================================================================


def iou(a: TimeInterval, b: TimeInterval) -> float:
    """Intersection-over-union of two time intervals, in [0, 1]."""
    inter = min(a.end, b.end) - max(a.start, b.start)
    union = max(a.end, b.end) - min(a.start, b.start)
    if union <= 0.0:
        return 1.0 if (a.start, a.end) == (b.start, b.end) else 0.0
    return max(0.0, inter) / union


def reward_count(
    gt: Sequence[int], pred: Sequence[int], epsilon: float = COUNT_EPSILON
) -> RewardValue:
    """Mean over classes of max(0, 1 - relative count error).

    epsilon guards the division for zero ground-truth counts only (denominator
    max(gt, epsilon)), so integer cases stay exact: gt=4, pred=6 -> 0.5.
    """
    if len(gt) != len(pred):
        raise RewardError(f"count length mismatch: {len(gt)} vs {len(pred)}")
    per_class = [
        max(0.0, 1.0 - abs(float(p) - float(g)) / max(float(g), epsilon))
        for g, p in zip(gt, pred)
    ]
    return RewardValue(value=sum(per_class) / len(per_class), components={"per_class": per_class})


def _check_permutations(gt: Sequence[int], pred: Sequence[int]) -> int:
    n = len(gt)
    if len(pred) != n:
        raise RewardError(f"permutation length mismatch: {n} vs {len(pred)}")
    expected = list(range(1, n + 1))
    if sorted(gt) != expected or sorted(pred) != expected:
        raise RewardError(f"not permutations of 1..{n}: {tuple(gt)}, {tuple(pred)}")
    return n


def displacement_error(gt: Sequence[int], pred: Sequence[int]) -> int:
    """Total positional displacement: sum over elements of |pos in pred - pos in gt|."""
    n = _check_permutations(gt, pred)
    pos_gt = {v: i for i, v in enumerate(gt)}
    pos_pred = {v: i for i, v in enumerate(pred)}
    return sum(abs(pos_pred[k] - pos_gt[k]) for k in range(1, n + 1))


def e_max(n: int) -> int:
    """Maximum displacement over all permutations of n elements (the reversal)."""
    if n < 1:
        raise RewardError(f"need n >= 1, got {n}")
    return n * n // 2


def reward_jigsaw(gt: Sequence[int], pred: Sequence[int]) -> RewardValue:
    """1 - displacement / max displacement; 1 iff exact, 0 iff reversed."""
    n = _check_permutations(gt, pred)
    if n < 2:
        raise RewardError("jigsaw reward needs n >= 2")
    err = displacement_error(gt, pred)
    cap = e_max(n)
    return RewardValue(value=1.0 - err / cap, components={"displacement": err, "e_max": cap})


# ============================================================================
# Strict benchmark scores
# ============================================================================


def strict_count_score(gt: Sequence[int], pred: Sequence[int]) -> float:
    """Fraction of classes whose predicted count is exactly right."""
    if len(gt) != len(pred):
        raise RewardError(f"count length mismatch: {len(gt)} vs {len(pred)}")
    return sum(1.0 for g, p in zip(gt, pred) if int(g) == int(p)) / len(gt)


def strict_jigsaw_score(gt: Sequence[int], pred: Sequence[int]) -> float:
    """1.0 iff the permutations are identical, else 0.0."""
    _check_permutations(gt, pred)
    return 1.0 if tuple(gt) == tuple(pred) else 0.0


def recall_at(ious: Sequence[float], tau: float) -> float:
    """Fraction of IoU values meeting the threshold (inclusive)."""
    if not 0.0 < tau <= 1.0:
        raise RewardError(f"threshold must be in (0, 1], got {tau}")
    if len(ious) == 0:
        raise RewardError("recall over an empty list")
    return sum(1.0 for v in ious if v >= tau) / len(ious)


# ============================================================================
# Free-text answer parsing
# ============================================================================


def parse_answer(raw_text: str, task: Task, n_or_k: int) -> ParsedAnswer:
    """Extract a typed answer from free text; never raises on bad text.

    Rules: grounding takes the last two real numbers (ordered); counting takes
    the last K integers (negatives clamped to 0); jigsaw takes the last run of
    >= n digits, split into single digits (n <= 9). Anything else is
    Unparseable, which scores 0.
    """
    task = Task(task)
    text = raw_text or ""
    if task is Task.GROUNDING:
        numbers = _REAL_RE.findall(text)
        if len(numbers) < 2:
            return Unparseable("need two numbers for an interval")
        a, b = float(numbers[-2]), float(numbers[-1])
        return TimeInterval(min(a, b), max(a, b))
    if task is Task.COUNTING:
        ints = _INT_RE.findall(text)
        if len(ints) < n_or_k:
            return Unparseable(f"need {n_or_k} integers, found {len(ints)}")
        values = tuple(max(0, int(v)) for v in ints[-n_or_k:])
        return CountsAnswer(values)
    if task is Task.JIGSAW:
        if n_or_k > 9:
            return Unparseable("digit-string answers are defined for n <= 9")
        runs = [r for r in _DIGIT_RUN_RE.findall(text) if len(r) >= n_or_k]
        if not runs:
            return Unparseable(f"no run of >= {n_or_k} digits")
        digits = tuple(int(c) for c in runs[-1])
        try:
            return PermutationAnswer(digits)
        except AnswerError:
            return Unparseable(f"digit run {runs[-1]!r} is not a permutation of 1..{n_or_k}")
    return Unparseable(f"unknown task {task!r}")


# ============================================================================
# Unified per-record scoring
# ============================================================================


def score_prediction(task: Task, gt: AnswerValue, pred: ParsedAnswer | None) -> dict:
    """Score one prediction; returns {smooth, strict, components}.

    A missing, unparseable, or wrong-variant prediction scores 0 in both modes
    (with the cause recorded in components) rather than raising.
    """
    task = Task(task)
    if pred is None or isinstance(pred, Unparseable):
        reason = pred.reason if isinstance(pred, Unparseable) else "missing prediction"
        return {"smooth": 0.0, "strict": 0.0, "components": {"unparseable": reason}}

    if task is Task.GROUNDING:
        if not isinstance(gt, TimeInterval) or not isinstance(pred, TimeInterval):
            return _variant_mismatch(task, gt, pred)
        v = iou(gt, pred)
        return {"smooth": v, "strict": v, "components": {"iou": v}}
    if task is Task.COUNTING:
        if not isinstance(gt, CountsAnswer) or not isinstance(pred, CountsAnswer):
            return _variant_mismatch(task, gt, pred)
        if len(pred.values) != len(gt.values):
            return _variant_mismatch(task, gt, pred)
        smooth = reward_count(gt.values, pred.values)
        return {
            "smooth": smooth.value,
            "strict": strict_count_score(gt.values, pred.values),
            "components": smooth.components,
        }
    if task is Task.JIGSAW:
        if not isinstance(gt, PermutationAnswer) or not isinstance(pred, PermutationAnswer):
            return _variant_mismatch(task, gt, pred)
        if pred.n != gt.n:
            return _variant_mismatch(task, gt, pred)
        smooth = reward_jigsaw(gt.order, pred.order)
        return {
            "smooth": smooth.value,
            "strict": strict_jigsaw_score(gt.order, pred.order),
            "components": smooth.components,
        }
    raise RewardError(f"unknown task: {task}")


def _variant_mismatch(task: Task, gt: AnswerValue, pred: ParsedAnswer) -> dict:
    return {
        "smooth": 0.0,
        "strict": 0.0,
        "components": {
            "unparseable": f"prediction does not fit a {task.value} answer of this shape"
        },
    }


def _answer_size(gt: AnswerValue) -> int:
    if isinstance(gt, CountsAnswer):
        return len(gt.values)
    if isinstance(gt, PermutationAnswer):
        return gt.n
    return 2


# ============================================================================
# JSONL scoring protocol
# ============================================================================


def score_request(request: dict) -> dict:
    """Serve one protocol request; malformed input yields a zero-score response."""
    record_id = request.get("record_id")
    try:
        task = Task(request["task"])
        gt = answer_from_dict(request["gt"])
    except (KeyError, TypeError, ValueError, AnswerError) as exc:
        return {
            "record_id": record_id,
            "smooth": 0.0,
            "strict": 0.0,
            "components": {"error": f"malformed request: {exc}"},
        }
    if "pred" in request and request["pred"] is not None:
        try:
            pred: ParsedAnswer = answer_from_dict(request["pred"])
        except AnswerError as exc:
            pred = Unparseable(str(exc))
    elif "pred_text" in request and request["pred_text"] is not None:
        pred = parse_answer(str(request["pred_text"]), task, _answer_size(gt))
    else:
        pred = None
    result = score_prediction(task, gt, pred)
    return {"record_id": record_id, **result}


def run_score_stream(stdin: IO[str], stdout: IO[str]) -> int:
    """Score JSONL requests line by line, echoing one response per request."""
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            response = {
                "record_id": None,
                "smooth": 0.0,
                "strict": 0.0,
                "components": {"error": f"invalid JSON: {exc}"},
            }
        else:
            response = score_request(request)
        stdout.write(json.dumps(response) + "\n")
        stdout.flush()
    return 0
