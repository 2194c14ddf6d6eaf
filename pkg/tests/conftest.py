"""Shared fixtures: in-memory synthetic videos and tiny on-disk corpora."""
from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from ssrforge import FrameSequence, make_demo_corpus


def noise_seq(
    id: str = "noise",
    num_frames: int = 24,
    width: int = 32,
    height: int = 32,
    fps: float = 2.0,
    seed: int = 0,
) -> FrameSequence:
    """Random uint8 frames: distinct, colorful, asymmetric — every perturbation bites."""
    rng = np.random.default_rng(seed)
    arrays = [
        rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
        for _ in range(num_frames)
    ]
    return FrameSequence.from_arrays(id=id, arrays=arrays, fps=fps)


@pytest.fixture()
def seq() -> FrameSequence:
    return noise_seq()


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Three 25 s, 64x64 synthetic videos on disk."""
    corpus = tmp_path_factory.mktemp("corpus")
    make_demo_corpus(corpus, num_videos=3, duration=25.0, fps=2.0, size=(64, 64), seed=11)
    return corpus
