"""Task generators: seeds, interval/count/permutation sampling, prompts, records."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssrforge import (
    CountingSpec,
    CountsAnswer,
    GenError,
    GroundingSpec,
    JigsawSpec,
    Perturbation,
    PermutationAnswer,
    QARecord,
    Task,
    TimeInterval,
    derive_seed,
    gen_counting,
    gen_grounding,
    gen_jigsaw,
    render_prompt,
    rng_for,
    sample_counts,
    sample_interval,
    sample_jigsaw_permutation,
    slice_frames,
)
from ssrforge.perturb import DESCRIPTIONS
from conftest import noise_seq

# A pool that keeps every test video comfortably above the minimum duration
# (min_len_seconds / min_len_frac) without needing hundreds of frames.
SHORT_OK = dict(min_len_frac=0.2, max_len_frac=0.5, min_len_seconds=1.0)


# ============================================================================
# Seed derivation
# ============================================================================


def test_derive_seed_is_stable():
    a = derive_seed(42, "vid-7", "grounding", "mirror", 3)
    b = derive_seed(42, "vid-7", "grounding", "mirror", 3)
    assert a == b
    assert isinstance(a, int) and 0 <= a < 2**64


def test_derive_seed_varies_with_every_field():
    base = derive_seed(42, "vid-7", "grounding", "mirror", 3)
    assert derive_seed(43, "vid-7", "grounding", "mirror", 3) != base
    assert derive_seed(42, "vid-8", "grounding", "mirror", 3) != base
    assert derive_seed(42, "vid-7", "counting", "mirror", 3) != base
    assert derive_seed(42, "vid-7", "grounding", "rotate", 3) != base
    assert derive_seed(42, "vid-7", "grounding", "mirror", 4) != base


@settings(max_examples=200)
@given(
    master=st.integers(0, 2**31),
    vid=st.text(min_size=1, max_size=12),
    index=st.integers(0, 10**6),
)
def test_derive_seed_never_collides_with_retry_salt(master, vid, index):
    plain = derive_seed(master, vid, "jigsaw", "easy", index)
    salted = derive_seed(master, vid, "jigsaw", "easy#retry1", index)
    assert plain != salted


# ============================================================================
# Samplers
# ============================================================================


@settings(max_examples=300)
@given(duration=st.floats(10.0, 500.0), seed=st.integers(0, 2**32 - 1))
def test_sample_interval_bounds(duration, seed):
    spec = GroundingSpec()
    if duration < spec.min_duration:
        duration = spec.min_duration
    iv = sample_interval(duration, spec, rng_for(seed))
    length = iv.end - iv.start
    assert 0.0 <= iv.start <= iv.end <= duration
    assert length >= spec.min_len_seconds - 1e-9
    assert length <= spec.max_len_frac * duration + 1e-9


def test_sample_counts_ranges():
    spec = CountingSpec.easy()
    rng = rng_for(5)
    for _ in range(200):
        f, ans = sample_counts(spec, rng)
        assert 1 <= f <= spec.max_frames
        assert len(ans.values) == 3
        for v in ans.values:
            assert spec.min_total_per_shape <= v <= f * spec.max_per_shape_per_frame


def test_sample_counts_respects_short_video():
    spec = CountingSpec.hard()
    rng = rng_for(5)
    for _ in range(100):
        f, _ = sample_counts(spec, rng, num_frames=2)
        assert 1 <= f <= 2


def test_sample_jigsaw_inverse_relationship():
    rng = rng_for(9)
    for n in (2, 3, 6, 8):
        p, ans = sample_jigsaw_permutation(n, rng)
        assert sorted(p) == list(range(1, n + 1))
        assert p != tuple(range(1, n + 1))  # never the identity
        for pos, seg in enumerate(p, start=1):
            assert ans.order[seg - 1] == pos  # answer inverts the shuffle


def test_sample_jigsaw_frozen_inversion():
    class StubRng:
        def permutation(self, m):
            return np.array([1, 2, 0])

    p, ans = sample_jigsaw_permutation(3, StubRng())
    assert p == (2, 3, 1)
    assert ans.order == (3, 1, 2)


# ============================================================================
# Prompts
# ============================================================================


def test_grounding_prompt_contents():
    text = render_prompt(
        Task.GROUNDING, description="The video is mirrored horizontally.", duration=42.0
    )
    assert "The video is mirrored horizontally." in text
    assert "42.0" in text
    assert "start" in text.lower() and "end" in text.lower()


def test_counting_prompt_contents():
    text = render_prompt(Task.COUNTING, shape_names=("circle", "rectangle", "triangle"))
    for word in ("circles", "rectangles", "triangles"):
        assert word in text


def test_jigsaw_prompt_contents():
    text = render_prompt(Task.JIGSAW, n_segments=6)
    assert "6" in text
    assert "digit" in text.lower()


def test_render_prompt_missing_args():
    with pytest.raises(GenError):
        render_prompt(Task.GROUNDING, duration=10.0)  # no description
    with pytest.raises(GenError):
        render_prompt(Task.JIGSAW)  # no n_segments


# ============================================================================
# Spec objects
# ============================================================================


def test_counting_difficulty_labels():
    assert CountingSpec.easy().difficulty == "easy"
    assert CountingSpec.hard().difficulty == "hard"
    assert CountingSpec(max_frames=2, max_per_shape_per_frame=5).difficulty == "custom"
    assert CountingSpec.easy().max_count == 9
    assert CountingSpec.hard().max_count == 16


def test_jigsaw_difficulty_labels():
    assert JigsawSpec.easy().n == 6 and JigsawSpec.easy().difficulty == "easy"
    assert JigsawSpec.hard().n == 8 and JigsawSpec.hard().difficulty == "hard"
    assert JigsawSpec(n=4).difficulty == "n4"
    with pytest.raises(GenError):
        JigsawSpec(n=1)


def test_grounding_spec_pool_coercion():
    spec = GroundingSpec(kinds_pool=("mirror", "rotate"))
    assert spec.kinds_pool == (Perturbation.MIRROR, Perturbation.ROTATE)
    assert GroundingSpec().min_duration == pytest.approx(20.0)


def test_permutation_digit_string():
    assert PermutationAnswer((4, 5, 2, 3, 1, 6)).digit_string() == "452316"


# ============================================================================
# gen_grounding
# ============================================================================


def test_grounding_answer_matches_slice_bounds():
    seq = noise_seq("g1", num_frames=60, fps=2.0, seed=21)
    spec = GroundingSpec(**SHORT_OK)
    modified, record = gen_grounding(seq, spec, rng_for(3), record_id="r1", seed=3)
    iv = record.answer
    assert isinstance(iv, TimeInterval)
    segment = slice_frames(seq, iv)
    assert segment[0].timestamp == iv.start and segment[-1].timestamp == iv.end
    assert record.gen_params["interval_frames"] == [segment[0].index, segment[-1].index]
    assert 0.0 <= iv.start < iv.end <= seq.duration


def test_grounding_outside_identical_inside_differs():
    seq = noise_seq("g2", num_frames=60, fps=2.0, seed=22)
    spec = GroundingSpec(**SHORT_OK)
    modified, record = gen_grounding(seq, spec, rng_for(4), record_id="r2", seed=4)
    lo, hi = record.gen_params["interval_frames"]
    changed = [
        m.index
        for m, s in zip(modified.frames, seq.frames)
        if not np.array_equal(m.pixels, s.pixels)
    ]
    assert changed, "perturbation must modify at least one frame"
    assert all(lo <= i <= hi for i in changed)


def test_grounding_prompt_carries_description():
    seq = noise_seq("g3", num_frames=60, fps=2.0, seed=23)
    spec = GroundingSpec(**SHORT_OK)
    _, record = gen_grounding(seq, spec, rng_for(5), record_id="r3")
    kind = Perturbation(record.gen_params["kind"])
    assert DESCRIPTIONS[kind] in record.prompt
    assert record.subtype == kind.value


def test_grounding_single_kind_pool():
    seq = noise_seq("g4", num_frames=60, fps=2.0, seed=24)
    spec = GroundingSpec(kinds_pool=(Perturbation.INVERT,), **SHORT_OK)
    modified, record = gen_grounding(seq, spec, rng_for(6), record_id="r4")
    assert record.subtype == "invert"
    lo, hi = record.gen_params["interval_frames"]
    for m, s in zip(modified.frames, seq.frames):
        if lo <= m.index <= hi:
            assert np.array_equal(m.pixels, 255 - s.pixels)


def test_grounding_too_short_video_rejected():
    seq = noise_seq("g5", num_frames=8, fps=2.0)
    with pytest.raises(GenError, match="too short"):
        gen_grounding(seq, GroundingSpec(), rng_for(0))


def test_grounding_same_seed_same_output():
    spec = GroundingSpec(**SHORT_OK)
    outs = []
    for _ in range(2):
        seq = noise_seq("g6", num_frames=60, fps=2.0, seed=25)
        modified, record = gen_grounding(seq, spec, rng_for(77), record_id="r6", seed=77)
        outs.append((record.to_json_dict(), [f.pixels.tobytes() for f in modified.frames]))
    assert outs[0] == outs[1]


# ============================================================================
# gen_counting
# ============================================================================


def recount(record) -> dict[str, int]:
    totals = {c: 0 for c in record.gen_params["shape_classes"]}
    for entry in record.gen_params["placement_log"]:
        totals[entry["shape"]["kind"]] += 1
    return totals


def test_counting_answer_matches_placements():
    seq = noise_seq("c1", num_frames=12, width=96, height=96, seed=31)
    _, record = gen_counting(seq, CountingSpec.easy(), rng_for(8), record_id="c-r1")
    counted = recount(record)
    assert tuple(counted[c] for c in record.gen_params["shape_classes"]) == record.answer.values


def test_counting_caps_and_ranges():
    seq = noise_seq("c2", num_frames=12, width=96, height=96, seed=32)
    for seed in range(12):
        _, record = gen_counting(seq, CountingSpec.easy(), rng_for(seed), record_id=f"c{seed}")
        assert len(record.gen_params["modified_frames"]) <= 3
        per_frame: dict[tuple[int, str], int] = {}
        for entry in record.gen_params["placement_log"]:
            key = (entry["frame_index"], entry["shape"]["kind"])
            per_frame[key] = per_frame.get(key, 0) + 1
        assert all(v <= 3 for v in per_frame.values())
        assert all(1 <= v <= 9 for v in record.answer.values)


def test_counting_boxes_disjoint_within_frame():
    from ssrforge import ShapeSpec

    seq = noise_seq("c3", num_frames=12, width=96, height=96, seed=33)
    _, record = gen_counting(seq, CountingSpec.hard(), rng_for(9), record_id="c-r3")
    by_frame: dict[int, list] = {}
    for entry in record.gen_params["placement_log"]:
        by_frame.setdefault(entry["frame_index"], []).append(
            ShapeSpec.from_dict(entry["shape"]).bounding_box()
        )
    for boxes in by_frame.values():
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                a, b = boxes[i], boxes[j]
                assert not (a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3])


def test_counting_untouched_frames_identical():
    seq = noise_seq("c4", num_frames=12, width=96, height=96, seed=34)
    modified, record = gen_counting(seq, CountingSpec.easy(), rng_for(10), record_id="c-r4")
    touched = set(record.gen_params["modified_frames"])
    for m, s in zip(modified.frames, seq.frames):
        if m.index not in touched:
            assert np.array_equal(m.pixels, s.pixels)
        else:
            assert not np.array_equal(m.pixels, s.pixels)


# ============================================================================
# gen_jigsaw
# ============================================================================


def test_jigsaw_round_trip_reconstruction():
    seq = noise_seq("j1", num_frames=26, seed=41)
    spec = JigsawSpec.easy()
    modified, record = gen_jigsaw(seq, spec, rng_for(11), record_id="j-r1")
    n, seg_len = record.gen_params["n"], record.gen_params["segment_frames"]
    assert modified.num_frames == n * seg_len == 24
    rebuilt = []
    shuffled = [modified.frames[i * seg_len : (i + 1) * seg_len] for i in range(n)]
    for original_pos in range(1, n + 1):
        where = record.answer.order[original_pos - 1]  # answer: original -> shuffled position
        rebuilt.extend(shuffled[where - 1])
    for r, s in zip(rebuilt, seq.frames[: n * seg_len]):
        assert np.array_equal(r.pixels, s.pixels)


def test_jigsaw_never_identity_and_consistent():
    seq = noise_seq("j2", num_frames=24, seed=42)
    for seed in range(10):
        _, record = gen_jigsaw(seq, JigsawSpec.easy(), rng_for(seed), record_id=f"j{seed}")
        order = record.gen_params["shuffle_order"]
        assert order != list(range(1, 7))
        assert sorted(order) == list(range(1, 7))


def test_jigsaw_too_few_frames():
    seq = noise_seq("j3", num_frames=5)
    with pytest.raises(GenError, match="frames"):
        gen_jigsaw(seq, JigsawSpec.easy(), rng_for(0))


def test_jigsaw_retimes_from_zero():
    seq = noise_seq("j4", num_frames=24, fps=2.0, seed=44)
    modified, _ = gen_jigsaw(seq, JigsawSpec.easy(), rng_for(13), record_id="j-r4")
    assert modified.frames[0].timestamp == 0.0
    assert modified.frames[1].timestamp == pytest.approx(0.5)


# ============================================================================
# QARecord serialization
# ============================================================================


def test_qarecord_json_round_trip():
    seq = noise_seq("q1", num_frames=24, seed=51)
    _, record = gen_jigsaw(seq, JigsawSpec.easy(), rng_for(14), record_id="q-r1", seed=14)
    data = record.to_json_dict()
    assert data["task"] == "jigsaw"
    assert data["answer"]["type"] == "permutation"
    back = QARecord.from_json_dict(data)
    assert back == record


def test_qarecord_counts_round_trip():
    rec = QARecord(
        id="x",
        task=Task.COUNTING,
        subtype="easy",
        difficulty="easy",
        video_dir="videos/x",
        fps=2.0,
        prompt="p",
        answer=CountsAnswer((3, 2, 3)),
        seed=1,
        gen_params={},
    )
    assert QARecord.from_json_dict(rec.to_json_dict()) == rec
