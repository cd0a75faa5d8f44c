"""Shared builders for mask and detection fixtures."""

import numpy as np
import pytest

from viscurate import BitMask, Detection, VideoMeta, rle_encode


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def bits(rows):
    """BitMask from a list of 0/1 row strings, e.g. ['010', '111']."""
    grid = np.array([[c == "1" for c in row] for row in rows], dtype=bool)
    return BitMask(grid)


def random_bitmask(rng, height, width, p=0.5):
    return BitMask(rng.random((height, width)) < p)


def make_detection(det_id, video_id, confidence, frame_masks, selected=None):
    """Detection from per-frame BitMask-or-None entries."""
    masks = tuple(None if m is None else rle_encode(m) for m in frame_masks)
    if selected is None:
        selected = tuple(0 for _ in frame_masks)
    return Detection(
        detection_id=det_id,
        video_id=video_id,
        confidence=confidence,
        masks=masks,
        selected=tuple(selected),
    )


def square_mask(height, width, y0, x0, size):
    """BitMask with a filled size x size square at (y0, x0)."""
    grid = np.zeros((height, width), dtype=bool)
    grid[y0 : y0 + size, x0 : x0 + size] = True
    return BitMask(grid)


def square_track(det_id, video_id, confidence, n_frames, height, width, y0, x0, size, dx=0, selected=None):
    """Detection whose square drifts dx pixels per frame."""
    frames = [
        square_mask(height, width, y0, x0 + t * dx, size) for t in range(n_frames)
    ]
    return make_detection(det_id, video_id, confidence, frames, selected)


def video(video_id=1, frames=4, width=16, height=12):
    return VideoMeta(video_id, frames, width, height)
