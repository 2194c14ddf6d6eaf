"""Task identifiers and typed ground-truth/prediction answer values.

Answers serialize to tagged JSON objects:
  {"type": "interval", "start": s, "end": e}
  {"type": "counts", "values": [n1, ..., nK]}
  {"type": "permutation", "order": [p1, ..., pn]}
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .frames import TimeInterval


class AnswerError(ValueError):
    """Malformed answer value or serialization."""


class Task(str, Enum):
    GROUNDING = "grounding"
    COUNTING = "counting"
    JIGSAW = "jigsaw"


@dataclass(frozen=True)
class CountsAnswer:
    """Per-class object counts, one non-negative integer per shape class."""

    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise AnswerError("counts answer needs at least one class")
        if any(int(v) != v or v < 0 for v in self.values):
            raise AnswerError(f"counts must be non-negative integers, got {self.values}")
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))


@dataclass(frozen=True)
class PermutationAnswer:
    """A bijection on 1..n given as the sequence (order[0], ..., order[n-1])."""

    order: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "order", tuple(int(v) for v in self.order))
        n = len(self.order)
        if n == 0 or sorted(self.order) != list(range(1, n + 1)):
            raise AnswerError(f"not a permutation of 1..{n}: {self.order}")

    @property
    def n(self) -> int:
        return len(self.order)

    def digit_string(self) -> str:
        """Digits concatenated without separators; defined for n <= 9."""
        if self.n > 9:
            raise AnswerError(f"digit string undefined for n={self.n} > 9")
        return "".join(str(d) for d in self.order)


@dataclass(frozen=True)
class Unparseable:
    """A prediction no parser rule matched; scores 0 everywhere."""

    reason: str = ""


# Ground-truth answers are the first three; predictions may also be Unparseable.
AnswerValue = TimeInterval | CountsAnswer | PermutationAnswer
ParsedAnswer = AnswerValue | Unparseable


def answer_to_dict(answer: AnswerValue) -> dict:
    if isinstance(answer, TimeInterval):
        return {"type": "interval", "start": answer.start, "end": answer.end}
    if isinstance(answer, CountsAnswer):
        return {"type": "counts", "values": list(answer.values)}
    if isinstance(answer, PermutationAnswer):
        return {"type": "permutation", "order": list(answer.order)}
    raise AnswerError(f"not a serializable answer: {answer!r}")


def answer_from_dict(d: dict) -> AnswerValue:
    try:
        kind = d["type"]
        if kind == "interval":
            return TimeInterval(float(d["start"]), float(d["end"]))
        if kind == "counts":
            return CountsAnswer(tuple(d["values"]))
        if kind == "permutation":
            return PermutationAnswer(tuple(d["order"]))
    except AnswerError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise AnswerError(f"malformed answer object: {d!r}") from exc
    raise AnswerError(f"unknown answer type: {d.get('type')!r}")


def task_of_answer(answer: AnswerValue) -> Task:
    if isinstance(answer, TimeInterval):
        return Task.GROUNDING
    if isinstance(answer, CountsAnswer):
        return Task.COUNTING
    if isinstance(answer, PermutationAnswer):
        return Task.JIGSAW
    raise AnswerError(f"not an answer value: {answer!r}")
