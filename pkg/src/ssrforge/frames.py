"""Frame sequences: load, slice, splice, subsample, and save timestamped RGB frames.

A sequence is an ordered list of frames at a fixed frame rate. Frame i (1-based)
sits at timestamp (i - 1) / fps, so the first frame is at 0.0 and the sequence
covers [0, T / fps). All operations are pure; sequences are immutable and safe
to share across workers.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

FRAME_FILE_PATTERN = "frame_%06d.png"
SIDECAR_NAME = "sequence.json"
IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")


class FrameStoreError(ValueError):
    """Invalid sequence, interval, or splice operation."""


@dataclass(frozen=True)
class TimeInterval:
    """Closed time interval [start, end] in seconds."""

    start: float
    end: float

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise FrameStoreError(f"interval start {self.start} > end {self.end}")

    @property
    def length(self) -> float:
        return self.end - self.start

    def contains(self, t: float) -> bool:
        return self.start <= t <= self.end

    def validate_within(self, duration: float) -> None:
        """Enforce 0 <= start < end <= duration (an interval owned by a sequence)."""
        if not (0.0 <= self.start < self.end <= duration):
            raise FrameStoreError(
                f"interval [{self.start}, {self.end}] not within [0, {duration}]"
            )


@dataclass(frozen=True)
class Frame:
    """One RGB frame: 1-based index, timestamp in seconds, (H, W, 3) uint8 pixels."""

    index: int
    timestamp: float
    pixels: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        px = self.pixels
        if px.ndim != 3 or px.shape[2] != 3 or px.dtype != np.uint8:
            raise FrameStoreError(f"frame pixels must be (H, W, 3) uint8, got {px.shape} {px.dtype}")
        px.flags.writeable = False


def _freeze(pixels: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(pixels, dtype=np.uint8)
    if arr.flags.writeable:
        arr = arr.copy()
        arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FrameSequence:
    """Immutable ordered frame sequence with a fixed frame rate.

    Sequences built by `from_arrays`, `load_sequence`, or `replace_segment`
    carry canonical timestamps (index - 1) / fps. `sample_for_model` keeps the
    source timestamps instead, so downstream consumers see original times.
    """

    id: str
    fps: float
    frames: tuple[Frame, ...]
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.fps <= 0:
            raise FrameStoreError(f"fps must be positive, got {self.fps}")
        if not self.frames:
            raise FrameStoreError("sequence must contain at least one frame")
        for f in self.frames:
            if f.pixels.shape[:2] != (self.height, self.width):
                raise FrameStoreError(
                    f"frame {f.index} is {f.pixels.shape[:2]}, expected {(self.height, self.width)}"
                )

    @classmethod
    def from_arrays(cls, id: str, arrays: list[np.ndarray], fps: float) -> "FrameSequence":
        """Build a sequence from pixel arrays, assigning indices and timestamps."""
        if not arrays:
            raise FrameStoreError("no frames")
        if fps <= 0:
            raise FrameStoreError(f"fps must be positive, got {fps}")
        frames = tuple(
            Frame(index=i + 1, timestamp=i / fps, pixels=_freeze(a)) for i, a in enumerate(arrays)
        )
        h, w = frames[0].pixels.shape[:2]
        return cls(id=id, fps=fps, frames=frames, width=w, height=h)

    @property
    def num_frames(self) -> int:
        return len(self.frames)

    @property
    def duration(self) -> float:
        return len(self.frames) / self.fps

    def timestamp_of(self, index: int) -> float:
        """Canonical timestamp of a 1-based frame index."""
        return (index - 1) / self.fps

    def arrays(self) -> list[np.ndarray]:
        return [f.pixels for f in self.frames]


# ============================================================================
# Operations
# ============================================================================


def slice_frames(seq: FrameSequence, interval: TimeInterval) -> list[Frame]:
    """Frames whose timestamp lies in the closed interval.

    The interval must sit within [0, duration]; selecting zero frames is an
    error (any interval of length >= 1/fps selects at least one).
    """
    if not (0.0 <= interval.start and interval.end <= seq.duration):
        raise FrameStoreError(
            f"interval [{interval.start}, {interval.end}] outside sequence [0, {seq.duration}]"
        )
    selected = [f for f in seq.frames if interval.contains(f.timestamp)]
    if not selected:
        raise FrameStoreError(
            f"empty slice: no frame timestamp in [{interval.start}, {interval.end}]"
        )
    return selected


def replace_segment(
    seq: FrameSequence,
    interval: TimeInterval,
    new_frames: list[Frame] | list[np.ndarray],
) -> FrameSequence:
    """Splice `new_frames` into the slots selected by `interval`.

    The replacement must match the slice length and frame dimensions; frames
    outside the interval are carried over untouched, as are fps and timestamps.
    """
    slot = slice_frames(seq, interval)
    if len(new_frames) != len(slot):
        raise FrameStoreError(
            f"replacement has {len(new_frames)} frames, slice has {len(slot)}"
        )
    replacement = [f.pixels if isinstance(f, Frame) else np.asarray(f) for f in new_frames]
    for arr in replacement:
        if arr.shape[:2] != (seq.height, seq.width):
            raise FrameStoreError(
                f"replacement frame is {arr.shape[:2]}, expected {(seq.height, seq.width)}"
            )
    slot_indices = {f.index for f in slot}
    by_slot = dict(zip(sorted(slot_indices), replacement))
    frames = tuple(
        Frame(index=f.index, timestamp=f.timestamp, pixels=_freeze(by_slot[f.index]))
        if f.index in slot_indices
        else f
        for f in seq.frames
    )
    return FrameSequence(id=seq.id, fps=seq.fps, frames=frames, width=seq.width, height=seq.height)


def sample_for_model(seq: FrameSequence, fps_target: float, max_frames: int) -> FrameSequence:
    """Uniform temporal subsampling at `fps_target`, capped at `max_frames`.

    Frames keep their source timestamps so the caller can report original
    times; the returned fps is the effective post-subsampling rate. Always
    yields at least one frame.
    """
    if fps_target <= 0:
        raise FrameStoreError(f"fps_target must be positive, got {fps_target}")
    if max_frames < 1:
        raise FrameStoreError(f"max_frames must be >= 1, got {max_frames}")
    stride = max(1, round(seq.fps / fps_target))
    picked = list(seq.frames[::stride])
    if len(picked) > max_frames:
        # Even spread over the strided selection; floor keeps indices strictly increasing.
        positions = np.linspace(0, len(picked) - 1, max_frames).astype(int)
        picked = [picked[p] for p in positions]
    frames = tuple(
        Frame(index=i + 1, timestamp=f.timestamp, pixels=f.pixels) for i, f in enumerate(picked)
    )
    return FrameSequence(
        id=seq.id, fps=seq.fps / stride, frames=frames, width=seq.width, height=seq.height
    )


# ============================================================================
# Disk format: PNG frames + JSON sidecar
# ============================================================================


def save_sequence(seq: FrameSequence, path: str | Path) -> dict:
    """Write `frame_%06d.png` files plus a `sequence.json` sidecar; returns the sidecar entry."""
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    for f in seq.frames:
        Image.fromarray(f.pixels, mode="RGB").save(directory / (FRAME_FILE_PATTERN % f.index))
    entry = {
        "id": seq.id,
        "fps": seq.fps,
        "width": seq.width,
        "height": seq.height,
        "num_frames": seq.num_frames,
    }
    (directory / SIDECAR_NAME).write_text(json.dumps(entry), encoding="utf-8")
    return entry


def load_sequence(path: str | Path, fps: float | None = None) -> FrameSequence:
    """Load a frame directory (lexicographic order) into a sequence.

    With `fps=None` the rate is read from the sidecar; pass it explicitly for
    bare image directories.
    """
    directory = Path(path)
    if not directory.is_dir():
        raise FrameStoreError(f"not a directory: {directory}")
    sidecar = directory / SIDECAR_NAME
    meta = json.loads(sidecar.read_text(encoding="utf-8")) if sidecar.is_file() else {}
    if fps is None:
        fps = meta.get("fps")
        if fps is None:
            raise FrameStoreError(f"no fps given and no sidecar in {directory}")
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS)
    if not files:
        raise FrameStoreError(f"no frames in {directory}")
    arrays = []
    for p in files:
        try:
            with Image.open(p) as img:
                arrays.append(np.asarray(img.convert("RGB"), dtype=np.uint8))
        except OSError as exc:
            raise FrameStoreError(f"unreadable image {p}: {exc}") from exc
    shapes = {a.shape for a in arrays}
    if len(shapes) > 1:
        raise FrameStoreError(f"mixed frame dimensions in {directory}: {sorted(shapes)}")
    return FrameSequence.from_arrays(id=meta.get("id", directory.name), arrays=arrays, fps=float(fps))
