"""Segment perturbations (14 kinds in three categories) and procedural shape rendering.

Every perturbation maps an m-frame segment to an m-frame segment occupying the
same temporal slot: output frames keep the input's indices and timestamps, so
splicing the result back preserves evenly spaced timestamps. Spatial and
fine-grained kinds transform each frame independently; temporal kinds only
reorder or resample frames.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from PIL import Image, ImageDraw, ImageFilter

from .frames import Frame

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


class PerturbError(ValueError):
    """Unknown kind or unusable source context."""


class Category(str, Enum):
    FINE_GRAINED = "fine_grained"
    SPATIAL = "spatial"
    TEMPORAL = "temporal"


class Perturbation(str, Enum):
    SATURATION = "saturation"
    NOISE = "noise"
    BLUR = "blur"
    GRAYSCALE = "grayscale"
    INVERT = "invert"
    CHANNEL_SWAP = "channel_swap"
    ZOOM_IN = "zoom_in"
    ROTATE = "rotate"
    ZOOM_OUT = "zoom_out"
    MIRROR = "mirror"
    SLOW = "slow"
    FAST = "fast"
    STUTTER_HOLD = "stutter_hold"
    SHUFFLE = "shuffle"

    @property
    def category(self) -> Category:
        return _CATEGORY[self]


_CATEGORY = {
    Perturbation.SATURATION: Category.FINE_GRAINED,
    Perturbation.NOISE: Category.FINE_GRAINED,
    Perturbation.BLUR: Category.FINE_GRAINED,
    Perturbation.GRAYSCALE: Category.FINE_GRAINED,
    Perturbation.INVERT: Category.FINE_GRAINED,
    Perturbation.CHANNEL_SWAP: Category.FINE_GRAINED,
    Perturbation.ZOOM_IN: Category.SPATIAL,
    Perturbation.ROTATE: Category.SPATIAL,
    Perturbation.ZOOM_OUT: Category.SPATIAL,
    Perturbation.MIRROR: Category.SPATIAL,
    Perturbation.SLOW: Category.TEMPORAL,
    Perturbation.FAST: Category.TEMPORAL,
    Perturbation.STUTTER_HOLD: Category.TEMPORAL,
    Perturbation.SHUFFLE: Category.TEMPORAL,
}

# Prompt description per kind; substituted into the anomaly question's
# {description} slot verbatim.
DESCRIPTIONS = {
    Perturbation.SATURATION: "the colors in the video become oversaturated and unnaturally vibrant.",
    Perturbation.NOISE: "Gaussian noise is added to the video.",
    Perturbation.BLUR: "the video becomes blurry or out of focus.",
    Perturbation.GRAYSCALE: "the video becomes black and white.",
    Perturbation.INVERT: "the colors in the video are inverted.",
    Perturbation.CHANNEL_SWAP: "the red and blue color channels in the video are swapped.",
    Perturbation.ZOOM_IN: "the video is zoomed in.",
    Perturbation.ROTATE: "the video is rotated 180 degrees.",
    Perturbation.ZOOM_OUT: "the video is zoomed out.",
    Perturbation.MIRROR: "The video is mirrored horizontally.",
    Perturbation.SLOW: (
        "the video slows down, this means the action unfolds at an unusually slow pace, "
        "making movements appear prolonged."
    ),
    Perturbation.FAST: (
        "the video speeds up, this means the segment plays at a high speed, compressing "
        "the action and making movements appear jerky or rushed."
    ),
    Perturbation.STUTTER_HOLD: (
        "the video appears to freeze and stutter on a few frames, this means instead of "
        "playing smoothly, the video repeatedly freezes on a single frame before jumping "
        "to the next."
    ),
    Perturbation.SHUFFLE: (
        "the frames are shuffled, this means the order of events is scrambled, making the "
        "action appear illogical and chaotic."
    ),
}

# Appended to the description for speed-changing kinds: frame timestamps stay
# evenly spaced, so speed must be judged from visual content alone.
SPEED_NOTE = (
    "To ensure a fair challenge, even if the video's actual speed changes (e.g., slow "
    "motion or fast forward), the timestamps for each frame have been intentionally kept "
    "evenly spaced. This creates the illusion of a constant playback speed. Therefore, "
    "you should not rely on the timestamps when judging the speed. Instead, your judgment "
    "must be based solely on the visual content. You should analyze the motion within the "
    "video itself by observing how much or how little the scene changes between "
    "consecutive frames to determine the true playback speed."
)


def describe(kind: Perturbation) -> str:
    """Prompt description for a perturbation kind (with speed note for slow/fast)."""
    text = DESCRIPTIONS[kind]
    if kind in (Perturbation.SLOW, Perturbation.FAST):
        return f"{text} {SPEED_NOTE}"
    return text


@dataclass(frozen=True)
class PerturbParams:
    """Perturbation magnitudes; defaults are clearly visible at 256x256."""

    saturation_factor: float = 2.0
    noise_sigma: float = 25.0
    blur_radius: float = 4.0
    zoom_in_factor: float = 2.0
    zoom_out_factor: float = 0.5
    stutter_hold_frames: int = 4
    slow_factor: int = 2
    fast_factor: int = 2
    # With a clipped (or missing) fast-forward source window, resample the
    # available frames proportionally instead of erroring.
    allow_short_fast_window: bool = True

    def __post_init__(self) -> None:
        for name in ("saturation_factor", "noise_sigma", "blur_radius", "slow_factor", "fast_factor"):
            if getattr(self, name) <= 0:
                raise PerturbError(f"{name} must be positive")
        if self.zoom_in_factor < 1.0:
            raise PerturbError("zoom_in_factor must be >= 1")
        if not 0.0 < self.zoom_out_factor <= 1.0:
            raise PerturbError("zoom_out_factor must be in (0, 1]")
        if self.stutter_hold_frames < 2:
            raise PerturbError("stutter_hold_frames must be >= 2")

    def to_dict(self) -> dict:
        return {
            "saturation_factor": self.saturation_factor,
            "noise_sigma": self.noise_sigma,
            "blur_radius": self.blur_radius,
            "zoom_in_factor": self.zoom_in_factor,
            "zoom_out_factor": self.zoom_out_factor,
            "stutter_hold_frames": self.stutter_hold_frames,
            "slow_factor": self.slow_factor,
            "fast_factor": self.fast_factor,
        }


# ============================================================================
# Per-frame pixel transforms
# ============================================================================


def _saturate(px: np.ndarray, factor: float) -> np.ndarray:
    luma = px.astype(np.float64) @ LUMA_WEIGHTS
    out = luma[..., None] + (px.astype(np.float64) - luma[..., None]) * factor
    return np.clip(out, 0, 255).round().astype(np.uint8)


def _add_noise(px: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    noisy = px.astype(np.float64) + rng.normal(0.0, sigma, size=px.shape)
    return np.clip(noisy, 0, 255).round().astype(np.uint8)


def _blur(px: np.ndarray, radius: float) -> np.ndarray:
    img = Image.fromarray(px, mode="RGB").filter(ImageFilter.GaussianBlur(radius))
    return np.asarray(img, dtype=np.uint8)


def _grayscale(px: np.ndarray) -> np.ndarray:
    luma = np.clip((px.astype(np.float64) @ LUMA_WEIGHTS).round(), 0, 255).astype(np.uint8)
    return np.repeat(luma[..., None], 3, axis=2)


def _invert(px: np.ndarray) -> np.ndarray:
    return (255 - px.astype(np.int16)).astype(np.uint8)


def _channel_swap(px: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(px[..., ::-1])


def _rotate_180(px: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(px[::-1, ::-1, :])


def _mirror(px: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(px[:, ::-1, :])


def _zoom_in(px: np.ndarray, factor: float) -> np.ndarray:
    h, w = px.shape[:2]
    crop_w = max(1, round(w / factor))
    crop_h = max(1, round(h / factor))
    x0 = (w - crop_w) // 2
    y0 = (h - crop_h) // 2
    crop = Image.fromarray(px[y0 : y0 + crop_h, x0 : x0 + crop_w], mode="RGB")
    return np.asarray(crop.resize((w, h), Image.BILINEAR), dtype=np.uint8)


def _zoom_out(px: np.ndarray, factor: float) -> np.ndarray:
    h, w = px.shape[:2]
    small_w = max(1, round(w * factor))
    small_h = max(1, round(h * factor))
    small = Image.fromarray(px, mode="RGB").resize((small_w, small_h), Image.BILINEAR)
    canvas = np.zeros_like(px)
    x0 = (w - small_w) // 2
    y0 = (h - small_h) // 2
    canvas[y0 : y0 + small_h, x0 : x0 + small_w] = np.asarray(small, dtype=np.uint8)
    return canvas


_PIXEL_TRANSFORMS = {
    Perturbation.GRAYSCALE: lambda px, p, rng: _grayscale(px),
    Perturbation.INVERT: lambda px, p, rng: _invert(px),
    Perturbation.CHANNEL_SWAP: lambda px, p, rng: _channel_swap(px),
    Perturbation.ROTATE: lambda px, p, rng: _rotate_180(px),
    Perturbation.MIRROR: lambda px, p, rng: _mirror(px),
    Perturbation.SATURATION: lambda px, p, rng: _saturate(px, p.saturation_factor),
    Perturbation.NOISE: lambda px, p, rng: _add_noise(px, p.noise_sigma, rng),
    Perturbation.BLUR: lambda px, p, rng: _blur(px, p.blur_radius),
    Perturbation.ZOOM_IN: lambda px, p, rng: _zoom_in(px, p.zoom_in_factor),
    Perturbation.ZOOM_OUT: lambda px, p, rng: _zoom_out(px, p.zoom_out_factor),
}


# ============================================================================
# Temporal resampling
# ============================================================================


def _slow_indices(m: int, k: int) -> list[int]:
    # First ceil(m/k) frames each repeated k times, truncated to m.
    head = math.ceil(m / k)
    return [i for i in range(head) for _ in range(k)][:m]


def _stutter_indices(m: int, hold: int) -> list[int]:
    return [(i // hold) * hold for i in range(m)]


def _fast_indices(m: int, available: int, factor: float, allow_short: bool) -> list[int]:
    want = int(round((m - 1) * factor)) + 1
    if available >= want:
        return [min(int(round(i * factor)), available - 1) for i in range(m)]
    if not allow_short:
        raise PerturbError(
            f"fast-forward needs {want} source frames, only {available} available"
        )
    # Clipped window: spread the m picks over what exists (reduced speedup).
    return np.linspace(0, available - 1, m).astype(int).tolist()


def non_identity_permutation(m: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform permutation of 0..m-1, resampled until it differs from identity (m >= 2)."""
    perm = rng.permutation(m)
    while m >= 2 and np.array_equal(perm, np.arange(m)):
        perm = rng.permutation(m)
    return perm


# ============================================================================
# apply_perturbation
# ============================================================================


def apply_perturbation(
    segment: list[Frame],
    kind: Perturbation,
    params: PerturbParams,
    rng: np.random.Generator,
    extended: list[Frame] | None = None,
) -> list[Frame]:
    """Perturb a segment, returning frames re-slotted into the input's positions.

    `extended` supplies extra source frames past the segment for fast-forward;
    for every other kind it is ignored. Output length always equals the input
    length.
    """
    if not segment:
        raise PerturbError("segment is empty")
    kind = Perturbation(kind)
    m = len(segment)

    if kind in _PIXEL_TRANSFORMS:
        transform = _PIXEL_TRANSFORMS[kind]
        pixel_lists = [transform(f.pixels, params, rng) for f in segment]
    elif kind is Perturbation.SLOW:
        idx = _slow_indices(m, params.slow_factor)
        pixel_lists = [segment[i].pixels for i in idx]
    elif kind is Perturbation.STUTTER_HOLD:
        idx = _stutter_indices(m, params.stutter_hold_frames)
        pixel_lists = [segment[i].pixels for i in idx]
    elif kind is Perturbation.FAST:
        source = extended if extended is not None else segment
        if extended is None and not params.allow_short_fast_window:
            raise PerturbError("fast-forward needs an extended source window")
        idx = _fast_indices(m, len(source), params.fast_factor, params.allow_short_fast_window)
        pixel_lists = [source[i].pixels for i in idx]
    elif kind is Perturbation.SHUFFLE:
        perm = non_identity_permutation(m, rng)
        pixel_lists = [segment[int(i)].pixels for i in perm]
    else:
        raise PerturbError(f"unknown perturbation kind: {kind}")

    return [
        Frame(index=slot.index, timestamp=slot.timestamp, pixels=px)
        for slot, px in zip(segment, pixel_lists)
    ]


# ============================================================================
# Procedural shapes
# ============================================================================

SHAPE_KINDS = ("circle", "rectangle", "triangle")

# Rectangle aspect 1.5:1 with circumradius = size.
_RECT_HALF_W = 1.5 / math.hypot(1.5, 1.0)
_RECT_HALF_H = 1.0 / math.hypot(1.5, 1.0)


@dataclass(frozen=True)
class ShapeSpec:
    """One placed primitive; `size` is the circumradius in pixels."""

    kind: str
    center: tuple[float, float]
    size: float
    rotation: float
    fill: tuple[int, int, int]
    outline: tuple[int, int, int]
    outline_width: int = 2

    def __post_init__(self) -> None:
        if self.kind not in SHAPE_KINDS:
            raise PerturbError(f"unknown shape kind: {self.kind}")
        if self.size <= 0:
            raise PerturbError("shape size must be positive")

    def bounding_box(self) -> tuple[float, float, float, float]:
        """(x0, y0, x1, y1), conservative for any rotation (circumradius + outline)."""
        reach = self.size + self.outline_width
        cx, cy = self.center
        return (cx - reach, cy - reach, cx + reach, cy + reach)

    def vertices(self) -> list[tuple[float, float]]:
        """Polygon vertices for rectangle/triangle (circle has none)."""
        cx, cy = self.center
        theta = math.radians(self.rotation)
        if self.kind == "rectangle":
            base = [
                (self.size * _RECT_HALF_W, self.size * _RECT_HALF_H),
                (-self.size * _RECT_HALF_W, self.size * _RECT_HALF_H),
                (-self.size * _RECT_HALF_W, -self.size * _RECT_HALF_H),
                (self.size * _RECT_HALF_W, -self.size * _RECT_HALF_H),
            ]
        elif self.kind == "triangle":
            base = [
                (self.size * math.cos(a), self.size * math.sin(a))
                for a in (math.pi / 2, math.pi / 2 + 2 * math.pi / 3, math.pi / 2 + 4 * math.pi / 3)
            ]
        else:
            raise PerturbError(f"{self.kind} has no polygon vertices")
        cos_t, sin_t = math.cos(theta), math.sin(theta)
        return [(cx + x * cos_t - y * sin_t, cy + x * sin_t + y * cos_t) for x, y in base]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "center": list(self.center),
            "size": self.size,
            "rotation": self.rotation,
            "fill": list(self.fill),
            "outline": list(self.outline),
            "outline_width": self.outline_width,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ShapeSpec":
        return cls(
            kind=d["kind"],
            center=tuple(d["center"]),
            size=d["size"],
            rotation=d["rotation"],
            fill=tuple(d["fill"]),
            outline=tuple(d["outline"]),
            outline_width=d["outline_width"],
        )


def render_shapes(frame: Frame, shapes: list[ShapeSpec]) -> Frame:
    """Composite shapes opaquely in list order; pixels outside the shapes stay put."""
    h, w = frame.pixels.shape[:2]
    for s in shapes:
        x0, y0, x1, y1 = s.bounding_box()
        if x0 < 0 or y0 < 0 or x1 > w or y1 > h:
            raise PerturbError(f"shape out of bounds: bbox {(x0, y0, x1, y1)} in {w}x{h}")
    if not shapes:
        return frame
    img = Image.fromarray(frame.pixels, mode="RGB")
    draw = ImageDraw.Draw(img)
    for s in shapes:
        if s.kind == "circle":
            cx, cy = s.center
            box = (cx - s.size, cy - s.size, cx + s.size, cy + s.size)
            draw.ellipse(box, fill=s.fill, outline=s.outline, width=s.outline_width)
        else:
            draw.polygon(s.vertices(), fill=s.fill, outline=s.outline, width=s.outline_width)
    return Frame(index=frame.index, timestamp=frame.timestamp, pixels=np.asarray(img, dtype=np.uint8))
