"""Task instance generators: anomaly grounding, object counting, temporal jigsaw.

Each generator consumes a source sequence plus a task spec and an explicit rng,
and returns (modified sequence, record). Records regenerate bit-identically
from the same (seed, spec, source); generation across records is
embarrassingly parallel because every record owns its own rng stream.
"""
from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .answers import AnswerValue, CountsAnswer, PermutationAnswer, Task, answer_from_dict, answer_to_dict
from .frames import Frame, FrameSequence, TimeInterval, replace_segment, slice_frames
from .perturb import (
    Perturbation,
    PerturbParams,
    ShapeSpec,
    apply_perturbation,
    describe,
    non_identity_permutation,
    render_shapes,
)

MAX_INTERVAL_ATTEMPTS = 64
PLACEMENT_ATTEMPTS = 200

# High-saturation fills; outline is black or white, whichever contrasts more.
SHAPE_PALETTE = (
    (230, 25, 75),
    (60, 180, 75),
    (0, 130, 200),
    (255, 225, 25),
    (240, 50, 230),
    (70, 240, 240),
    (245, 130, 48),
    (145, 30, 180),
)
SHAPE_SIZE_FRAC = (0.04, 0.12)
OUTLINE_WIDTH = 2


class GenError(ValueError):
    """Source video unusable for the requested task, or placement failed."""


# ============================================================================
# Deterministic seeding
# ============================================================================


def derive_seed(master_seed: int, video_id: str, task: str, subtype: str, index: int) -> int:
    """Order-independent 64-bit per-record seed."""
    key = f"{master_seed}|{video_id}|{task}|{subtype}|{index}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


# ============================================================================
# Task specs
# ============================================================================


@dataclass(frozen=True)
class GroundingSpec:
    """Anomaly interval distribution and perturbation pool."""

    kinds_pool: tuple[Perturbation, ...] = tuple(Perturbation)
    min_len_frac: float = 0.05
    max_len_frac: float = 0.5
    min_len_seconds: float = 1.0
    perturb: PerturbParams = field(default_factory=PerturbParams)

    def __post_init__(self) -> None:
        if not self.kinds_pool:
            raise GenError("empty perturbation pool")
        if not 0.0 < self.min_len_frac <= self.max_len_frac <= 1.0:
            raise GenError(
                f"need 0 < min_len_frac <= max_len_frac <= 1, got "
                f"{self.min_len_frac}, {self.max_len_frac}"
            )
        object.__setattr__(
            self, "kinds_pool", tuple(Perturbation(k) for k in self.kinds_pool)
        )

    @property
    def min_duration(self) -> float:
        """Shortest video the interval distribution can fit into."""
        return self.min_len_seconds / self.min_len_frac


@dataclass(frozen=True)
class CountingSpec:
    """Shape classes and placement budget for one difficulty tier."""

    shape_classes: tuple[str, ...] = ("circle", "rectangle", "triangle")
    max_frames: int = 3
    max_per_shape_per_frame: int = 3
    min_total_per_shape: int = 1

    def __post_init__(self) -> None:
        if not self.shape_classes:
            raise GenError("need at least one shape class")
        if self.max_frames < 1 or self.max_per_shape_per_frame < 1:
            raise GenError("max_frames and max_per_shape_per_frame must be >= 1")
        if not 0 <= self.min_total_per_shape <= self.max_per_shape_per_frame:
            raise GenError("min_total_per_shape must be in [0, max_per_shape_per_frame]")

    @classmethod
    def easy(cls) -> "CountingSpec":
        return cls(max_frames=3, max_per_shape_per_frame=3)

    @classmethod
    def hard(cls) -> "CountingSpec":
        return cls(max_frames=4, max_per_shape_per_frame=4)

    @property
    def difficulty(self) -> str:
        key = (self.max_frames, self.max_per_shape_per_frame)
        return {(3, 3): "easy", (4, 4): "hard"}.get(key, "custom")

    @property
    def max_count(self) -> int:
        return self.max_frames * self.max_per_shape_per_frame


@dataclass(frozen=True)
class JigsawSpec:
    """Number of equal-duration segments to shuffle."""

    n: int = 6

    def __post_init__(self) -> None:
        if self.n < 2:
            raise GenError(f"need n >= 2 segments, got {self.n}")

    @classmethod
    def easy(cls) -> "JigsawSpec":
        return cls(n=6)

    @classmethod
    def hard(cls) -> "JigsawSpec":
        return cls(n=8)

    @property
    def difficulty(self) -> str:
        return {6: "easy", 8: "hard"}.get(self.n, f"n{self.n}")


# ============================================================================
# Records
# ============================================================================


@dataclass(frozen=True)
class QARecord:
    """One generated task instance with its typed ground truth."""

    id: str
    task: Task
    subtype: str
    difficulty: str
    video_dir: str
    fps: float
    prompt: str
    answer: AnswerValue
    seed: int
    gen_params: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "id": self.id,
            "task": self.task.value,
            "subtype": self.subtype,
            "difficulty": self.difficulty,
            "video_dir": self.video_dir,
            "fps": self.fps,
            "prompt": self.prompt,
            "answer": answer_to_dict(self.answer),
            "seed": self.seed,
            "gen_params": self.gen_params,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "QARecord":
        return cls(
            id=d["id"],
            task=Task(d["task"]),
            subtype=d["subtype"],
            difficulty=d["difficulty"],
            video_dir=d["video_dir"],
            fps=float(d["fps"]),
            prompt=d["prompt"],
            answer=answer_from_dict(d["answer"]),
            seed=int(d["seed"]),
            gen_params=d.get("gen_params", {}),
        )


# ============================================================================
# Prompt templates
# ============================================================================


def _plural(name: str) -> str:
    return name if name.endswith("s") else name + "s"


def render_prompt(
    task: Task,
    *,
    description: str | None = None,
    duration: float | None = None,
    n_segments: int | None = None,
    shape_names: tuple[str, ...] | None = None,
) -> str:
    """Fill the question template for a task."""
    task = Task(task)
    if task is Task.GROUNDING:
        if not description:
            raise GenError("grounding prompt needs a perturbation description")
        length_note = f" The video is {duration:.1f} seconds long." if duration is not None else ""
        return (
            "One continuous span of this video has been altered. While the altered span "
            f"plays, {description}{length_note} Everything outside that span is untouched. "
            "Determine when the altered span begins and ends. Reply with the start and end "
            'times in seconds as two numbers separated by a space, e.g. "12.5 31.0".'
        )
    if task is Task.COUNTING:
        if not shape_names:
            raise GenError("counting prompt needs shape class names")
        plurals = [_plural(n) for n in shape_names]
        listed = ", ".join(plurals)
        example = " ".join(str((i % 3) + 1) for i in range(len(plurals)))
        return (
            f"Synthetic shapes ({listed}) have been stamped onto a few frames of this video. "
            "Count the total number of each shape across all frames. Reply with "
            f"{len(plurals)} integers separated by spaces, in this order: {listed} — "
            f'e.g. "{example}".'
        )
    if task is Task.JIGSAW:
        if not n_segments or n_segments < 2:
            raise GenError("jigsaw prompt needs the segment count")
        example = "".join(str(i % n_segments + 1) for i in range(1, n_segments + 1))
        return (
            f"This video was cut into {n_segments} equal-length clips, and the clips were "
            "put back together in scrambled order. Label the clips 1 through "
            f"{n_segments} by their position in the scrambled video you are watching. "
            f"Reply with a single {n_segments}-digit string: the i-th digit is the label of "
            f'the clip that belongs at position i of the original video, e.g. "{example}".'
        )
    raise GenError(f"unknown task: {task}")


# ============================================================================
# Answer-distribution samplers (shared by generators and the random baseline)
# ============================================================================


def sample_interval(duration: float, spec: GroundingSpec, rng: np.random.Generator) -> TimeInterval:
    """Draw an anomaly interval: relative length uniform in the configured band, start uniform."""
    frac = rng.uniform(spec.min_len_frac, spec.max_len_frac)
    length = min(max(duration * frac, spec.min_len_seconds), duration)
    start = rng.uniform(0.0, duration - length)
    return TimeInterval(start, start + length)


def sample_counts(spec: CountingSpec, rng: np.random.Generator, num_frames: int | None = None) -> tuple[int, CountsAnswer]:
    """Draw (modified frame count, per-class totals) from the generator distribution."""
    frame_cap = spec.max_frames if num_frames is None else min(spec.max_frames, num_frames)
    f = int(rng.integers(1, frame_cap + 1))
    cap = f * spec.max_per_shape_per_frame
    lo = max(spec.min_total_per_shape, 0)
    values = tuple(int(rng.integers(lo, cap + 1)) for _ in spec.shape_classes)
    return f, CountsAnswer(values)


def sample_jigsaw_permutation(n: int, rng: np.random.Generator) -> tuple[tuple[int, ...], PermutationAnswer]:
    """Draw a non-identity shuffle p (1-based) and its inverse, the answer."""
    p = tuple(int(x) + 1 for x in non_identity_permutation(n, rng))
    inverse = [0] * n
    for pos, seg in enumerate(p):
        inverse[seg - 1] = pos + 1
    return p, PermutationAnswer(tuple(inverse))


# ============================================================================
# Generators
# ============================================================================


def gen_grounding(
    seq: FrameSequence,
    spec: GroundingSpec,
    rng: np.random.Generator,
    *,
    record_id: str | None = None,
    seed: int = 0,
) -> tuple[FrameSequence, QARecord]:
    """Perturb one slice of the video; the answer is the slice's timestamp bounds."""
    if seq.duration < spec.min_duration:
        raise GenError(
            f"video too short: {seq.duration:.2f} s < {spec.min_duration:.2f} s "
            "needed by the interval distribution"
        )
    kind = spec.kinds_pool[int(rng.integers(len(spec.kinds_pool)))]
    rid = record_id or f"{Task.GROUNDING.value}-{kind.value}-{seq.id}"

    for attempt in range(1, MAX_INTERVAL_ATTEMPTS + 1):
        interval = sample_interval(seq.duration, spec, rng)
        segment = slice_frames(seq, interval)
        if len(segment) < 2:
            continue
        answer = TimeInterval(segment[0].timestamp, segment[-1].timestamp)
        extended = None
        if kind is Perturbation.FAST:
            ext_end = min(
                answer.start + spec.perturb.fast_factor * (answer.end - answer.start),
                seq.duration,
            )
            extended = slice_frames(seq, TimeInterval(answer.start, ext_end))
        perturbed = apply_perturbation(segment, kind, spec.perturb, rng, extended)
        if all(np.array_equal(p.pixels, s.pixels) for p, s in zip(perturbed, segment)):
            continue  # degenerate on this content (e.g. shuffle of identical frames)
        modified = dataclasses.replace(replace_segment(seq, interval, perturbed), id=rid)
        record = QARecord(
            id=rid,
            task=Task.GROUNDING,
            subtype=kind.value,
            difficulty="default",
            video_dir="",
            fps=seq.fps,
            prompt=render_prompt(Task.GROUNDING, description=describe(kind), duration=seq.duration),
            answer=answer,
            seed=seed,
            gen_params={
                "kind": kind.value,
                "category": kind.category.value,
                "perturb_params": spec.perturb.to_dict(),
                "interval_spec": {
                    "min_len_frac": spec.min_len_frac,
                    "max_len_frac": spec.max_len_frac,
                    "min_len_seconds": spec.min_len_seconds,
                },
                "duration": seq.duration,
                "source_id": seq.id,
                "interval_frames": [segment[0].index, segment[-1].index],
                "attempts": attempt,
            },
        )
        return modified, record
    raise GenError(
        f"no usable interval after {MAX_INTERVAL_ATTEMPTS} attempts "
        f"(perturbation '{kind.value}' degenerate on this content?)"
    )


def _contrast_outline(fill: tuple[int, int, int]) -> tuple[int, int, int]:
    luma = 0.299 * fill[0] + 0.587 * fill[1] + 0.114 * fill[2]
    return (0, 0, 0) if luma > 127.0 else (255, 255, 255)


def _boxes_overlap(a: tuple[float, float, float, float], b: tuple[float, float, float, float]) -> bool:
    return a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]


def _place_shape(
    kind: str,
    width: int,
    height: int,
    taken: list[tuple[float, float, float, float]],
    rng: np.random.Generator,
) -> ShapeSpec:
    """Rejection-sample one in-bounds shape whose bounding box avoids `taken`."""
    lo, hi = SHAPE_SIZE_FRAC
    for _ in range(PLACEMENT_ATTEMPTS):
        size = rng.uniform(lo, hi) * min(width, height)
        reach = size + OUTLINE_WIDTH
        if 2 * reach >= min(width, height):
            continue
        cx = rng.uniform(reach, width - reach)
        cy = rng.uniform(reach, height - reach)
        fill = SHAPE_PALETTE[int(rng.integers(len(SHAPE_PALETTE)))]
        shape = ShapeSpec(
            kind=kind,
            center=(cx, cy),
            size=size,
            rotation=float(rng.uniform(0.0, 360.0)),
            fill=fill,
            outline=_contrast_outline(fill),
            outline_width=OUTLINE_WIDTH,
        )
        box = shape.bounding_box()
        if not any(_boxes_overlap(box, other) for other in taken):
            taken.append(box)
            return shape
    raise GenError(
        f"placement failed: no room for a '{kind}' after {PLACEMENT_ATTEMPTS} attempts "
        f"in a {width}x{height} frame"
    )


def gen_counting(
    seq: FrameSequence,
    spec: CountingSpec,
    rng: np.random.Generator,
    *,
    record_id: str | None = None,
    seed: int = 0,
) -> tuple[FrameSequence, QARecord]:
    """Stamp disjoint shapes onto a few frames; the answer is the per-class totals."""
    rid = record_id or f"{Task.COUNTING.value}-{spec.difficulty}-{seq.id}"
    num_modified, answer = sample_counts(spec, rng, seq.num_frames)
    chosen = sorted(int(i) + 1 for i in rng.choice(seq.num_frames, size=num_modified, replace=False))

    # Spread each class's instances over the chosen frames, capped per frame.
    per_frame: dict[int, dict[str, int]] = {i: {c: 0 for c in spec.shape_classes} for i in chosen}
    for cls_name, total in zip(spec.shape_classes, answer.values):
        for _ in range(total):
            open_frames = [
                i for i in chosen if per_frame[i][cls_name] < spec.max_per_shape_per_frame
            ]
            target = open_frames[int(rng.integers(len(open_frames)))]
            per_frame[target][cls_name] += 1

    placement_log: list[dict] = []
    shapes_by_frame: dict[int, list[ShapeSpec]] = {}
    for frame_index in chosen:
        taken: list[tuple[float, float, float, float]] = []
        shapes: list[ShapeSpec] = []
        for cls_name in spec.shape_classes:
            for _ in range(per_frame[frame_index][cls_name]):
                shape = _place_shape(cls_name, seq.width, seq.height, taken, rng)
                shapes.append(shape)
                placement_log.append({"frame_index": frame_index, "shape": shape.to_dict()})
        shapes_by_frame[frame_index] = shapes

    frames = tuple(
        render_shapes(f, shapes_by_frame[f.index]) if f.index in shapes_by_frame else f
        for f in seq.frames
    )
    modified = FrameSequence(id=rid, fps=seq.fps, frames=frames, width=seq.width, height=seq.height)
    record = QARecord(
        id=rid,
        task=Task.COUNTING,
        subtype=spec.difficulty,
        difficulty=spec.difficulty,
        video_dir="",
        fps=seq.fps,
        prompt=render_prompt(Task.COUNTING, shape_names=spec.shape_classes),
        answer=answer,
        seed=seed,
        gen_params={
            "shape_classes": list(spec.shape_classes),
            "max_frames": spec.max_frames,
            "max_per_shape_per_frame": spec.max_per_shape_per_frame,
            "min_total_per_shape": spec.min_total_per_shape,
            "modified_frames": chosen,
            "placement_log": placement_log,
            "duration": seq.duration,
            "source_id": seq.id,
        },
    )
    return modified, record


def gen_jigsaw(
    seq: FrameSequence,
    spec: JigsawSpec,
    rng: np.random.Generator,
    *,
    record_id: str | None = None,
    seed: int = 0,
) -> tuple[FrameSequence, QARecord]:
    """Shuffle n equal segments; the answer is the inverse permutation."""
    n = spec.n
    if seq.num_frames < n:
        raise GenError(f"video has {seq.num_frames} frames, need at least {n}")
    rid = record_id or f"{Task.JIGSAW.value}-{spec.difficulty}-{seq.id}"
    seg_len = seq.num_frames // n
    p, answer = sample_jigsaw_permutation(n, rng)
    segments = [seq.frames[i * seg_len : (i + 1) * seg_len] for i in range(n)]
    arrays = [f.pixels for pos in range(n) for f in segments[p[pos] - 1]]
    modified = FrameSequence.from_arrays(id=rid, arrays=arrays, fps=seq.fps)
    record = QARecord(
        id=rid,
        task=Task.JIGSAW,
        subtype=spec.difficulty,
        difficulty=spec.difficulty,
        video_dir="",
        fps=seq.fps,
        prompt=render_prompt(Task.JIGSAW, n_segments=n),
        answer=answer,
        seed=seed,
        gen_params={
            "n": n,
            "shuffle_order": list(p),
            "segment_frames": seg_len,
            "frames_used": seg_len * n,
            "frames_total": seq.num_frames,
            "duration": seq.duration,
            "source_id": seq.id,
        },
    )
    return modified, record
