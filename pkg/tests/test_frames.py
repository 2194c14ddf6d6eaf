"""Frame store: construction, slicing, splicing, subsampling, lossless I/O."""
from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssrforge import (
    FrameSequence,
    FrameStoreError,
    TimeInterval,
    load_sequence,
    replace_segment,
    sample_for_model,
    save_sequence,
    slice_frames,
)
from conftest import noise_seq


# ============================================================================
# TimeInterval
# ============================================================================


def test_interval_basic():
    iv = TimeInterval(1.0, 2.5)
    assert iv.length == 1.5
    assert iv.contains(1.0) and iv.contains(2.5) and not iv.contains(2.6)


def test_interval_rejects_reversed():
    with pytest.raises(FrameStoreError):
        TimeInterval(3.0, 1.0)


def test_interval_validate_within():
    TimeInterval(0.0, 2.0).validate_within(2.0)
    with pytest.raises(FrameStoreError):
        TimeInterval(0.0, 2.1).validate_within(2.0)
    with pytest.raises(FrameStoreError):
        TimeInterval(1.0, 1.0).validate_within(2.0)  # zero length


# ============================================================================
# Construction and timestamps
# ============================================================================


def test_from_arrays_timestamps():
    s = noise_seq(num_frames=3, fps=2.0)
    assert s.num_frames == 3
    assert s.duration == pytest.approx(1.5)
    assert [f.timestamp for f in s.frames] == [0.0, 0.5, 1.0]
    assert [f.index for f in s.frames] == [1, 2, 3]


def test_last_timestamp_64_frames():
    s = noise_seq(num_frames=64, fps=2.0)
    assert s.duration == pytest.approx(32.0)
    assert s.frames[-1].timestamp == pytest.approx(31.5)


@settings(max_examples=200)
@given(n=st.integers(1, 80), fps=st.sampled_from([1.0, 2.0, 5.0, 24.0, 30.0]))
def test_timestamps_pure_function_of_index(n, fps):
    s = noise_seq(num_frames=n, fps=fps)
    for f in s.frames:
        assert f.timestamp == (f.index - 1) / fps
    gaps = np.diff([f.timestamp for f in s.frames])
    assert np.allclose(gaps, 1.0 / fps)


def test_pixels_are_immutable(seq):
    with pytest.raises(ValueError):
        seq.frames[0].pixels[0, 0, 0] = 1


def test_empty_arrays_rejected():
    with pytest.raises(FrameStoreError, match="no frames"):
        FrameSequence.from_arrays(id="x", arrays=[], fps=2.0)


# ============================================================================
# slice
# ============================================================================


def test_slice_closed_interval():
    s = noise_seq(num_frames=10, fps=2.0)
    got = slice_frames(s, TimeInterval(1.0, 2.0))
    assert [f.index for f in got] == [3, 4, 5]
    assert [f.timestamp for f in got] == [1.0, 1.5, 2.0]


def test_slice_full_cover_is_identity(seq):
    got = slice_frames(seq, TimeInterval(0.0, seq.duration))
    assert got == list(seq.frames)


def test_slice_empty_is_error():
    s = noise_seq(num_frames=10, fps=2.0)
    with pytest.raises(FrameStoreError, match="empty slice"):
        slice_frames(s, TimeInterval(0.1, 0.2))


def test_slice_outside_is_error(seq):
    with pytest.raises(FrameStoreError, match="outside"):
        slice_frames(seq, TimeInterval(0.0, seq.duration + 1.0))


# ============================================================================
# replace_segment
# ============================================================================


def test_replace_with_itself_is_identity(seq):
    iv = TimeInterval(1.0, 3.0)
    out = replace_segment(seq, iv, slice_frames(seq, iv))
    for a, b in zip(out.frames, seq.frames):
        assert np.array_equal(a.pixels, b.pixels)
        assert a.timestamp == b.timestamp and a.index == b.index


def test_replace_changes_only_the_slot(seq):
    iv = TimeInterval(1.0, 2.0)
    slot = slice_frames(seq, iv)
    black = [np.zeros_like(f.pixels) for f in slot]
    out = replace_segment(seq, iv, black)
    assert out.num_frames == seq.num_frames and out.fps == seq.fps
    replaced = {f.index for f in slot}
    for a, b in zip(out.frames, seq.frames):
        if a.index in replaced:
            assert a.pixels.sum() == 0
        else:
            assert np.array_equal(a.pixels, b.pixels)


def test_replace_length_mismatch(seq):
    iv = TimeInterval(1.0, 2.0)
    slot = slice_frames(seq, iv)
    with pytest.raises(FrameStoreError, match="frames"):
        replace_segment(seq, iv, slot[:-1])


def test_replace_dimension_mismatch(seq):
    iv = TimeInterval(1.0, 2.0)
    slot = slice_frames(seq, iv)
    bad = [np.zeros((8, 8, 3), dtype=np.uint8) for _ in slot]
    with pytest.raises(FrameStoreError):
        replace_segment(seq, iv, bad)


# ============================================================================
# sample_for_model
# ============================================================================


def test_sample_stride():
    s = noise_seq(num_frames=120, fps=30.0)
    out = sample_for_model(s, fps_target=2.0, max_frames=48)
    assert out.num_frames == 8


def test_sample_identity():
    s = noise_seq(num_frames=20, fps=2.0)
    out = sample_for_model(s, fps_target=2.0, max_frames=64)
    assert out.num_frames == 20
    assert all(np.array_equal(a.pixels, b.pixels) for a, b in zip(out.frames, s.frames))


def test_sample_cap_binds():
    s = noise_seq(num_frames=1200, fps=2.0)  # 600 s at 2 fps
    out = sample_for_model(s, fps_target=2.0, max_frames=48)
    assert out.num_frames == 48
    ts = [f.timestamp for f in out.frames]
    assert ts == sorted(ts) and len(set(ts)) == 48


def test_sample_preserves_source_timestamps():
    s = noise_seq(num_frames=90, fps=30.0)
    out = sample_for_model(s, fps_target=3.0, max_frames=100)
    source_ts = {f.timestamp for f in s.frames}
    assert all(f.timestamp in source_ts for f in out.frames)


@settings(max_examples=100)
@given(
    n=st.integers(1, 200),
    fps=st.sampled_from([2.0, 24.0, 30.0]),
    target=st.sampled_from([1.0, 2.0, 8.0]),
    cap=st.integers(1, 64),
)
def test_sample_always_yields_frames(n, fps, target, cap):
    out = sample_for_model(noise_seq(num_frames=n, fps=fps), target, cap)
    assert 1 <= out.num_frames <= max(1, min(n, cap))
    ts = [f.timestamp for f in out.frames]
    assert ts == sorted(ts) and len(set(ts)) == len(ts)


# ============================================================================
# save / load round trip
# ============================================================================


def test_save_load_round_trip(tmp_path, seq):
    dest = tmp_path / "vid"
    entry = save_sequence(seq, dest)
    assert entry["num_frames"] == seq.num_frames
    files = sorted(dest.glob("frame_*.png"))
    assert len(files) == seq.num_frames
    assert files[0].name == "frame_000001.png"
    sidecar = json.loads((dest / "sequence.json").read_text())
    assert sidecar == {
        "id": seq.id,
        "fps": seq.fps,
        "width": seq.width,
        "height": seq.height,
        "num_frames": seq.num_frames,
    }
    loaded = load_sequence(dest)
    assert loaded.fps == seq.fps and loaded.num_frames == seq.num_frames
    for a, b in zip(loaded.frames, seq.frames):
        assert np.array_equal(a.pixels, b.pixels)


def test_load_empty_dir(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(FrameStoreError, match="no frames"):
        load_sequence(empty, fps=2.0)


def test_load_mixed_dimensions(tmp_path):
    from PIL import Image

    d = tmp_path / "mixed"
    d.mkdir()
    Image.new("RGB", (8, 8)).save(d / "frame_000001.png")
    Image.new("RGB", (9, 8)).save(d / "frame_000002.png")
    with pytest.raises(FrameStoreError):
        load_sequence(d, fps=2.0)


def test_load_unreadable_image(tmp_path):
    d = tmp_path / "broken"
    d.mkdir()
    (d / "frame_000001.png").write_bytes(b"not a png")
    with pytest.raises(FrameStoreError):
        load_sequence(d, fps=2.0)
