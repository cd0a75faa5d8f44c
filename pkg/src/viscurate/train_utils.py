"""Training-side utilities: frame eligibility, batch sampling, DropLoss.

A frame of a video is *eligible* for training when every detection of that
video carries a selected label there, so no object would train against a
missing mask.  Batches take three distinct frames sampled uniformly from
the eligible set; videos with fewer than three eligible frames are skipped
rather than padded.  Sources mix synthetic and pseudo-labeled videos with
equal probability.  The DropLoss gate zeroes the loss of any prediction
whose best ground-truth overlap is at or below a small threshold, so real
objects the labels missed are not punished.
"""

from dataclasses import dataclass

import numpy as np

from .dataset import SourceTag, TrainingDataset
from .errors import (
    BothPoolsEmpty,
    DimensionMismatch,
    DomainError,
    LengthMismatch,
    NoDetections,
)
from .masks import mask_iou

DROPLOSS_TAU = 0.01
FRAMES_PER_BATCH = 3
SYNTHETIC_PROBABILITY = 0.5


@dataclass(frozen=True)
class TrainBatchSpec:
    """One training batch: a video, three of its frames, and a source tag."""

    video_id: int
    frame_indices: tuple
    source: SourceTag

    def __post_init__(self):
        frames = tuple(int(t) for t in self.frame_indices)
        object.__setattr__(self, "frame_indices", frames)
        if len(frames) != FRAMES_PER_BATCH:
            raise LengthMismatch(f"need exactly {FRAMES_PER_BATCH} frames, got {len(frames)}")
        if not (frames[0] < frames[1] < frames[2]):
            raise DomainError(f"frame indices must be ascending and distinct, got {frames}")
        if frames[0] < 0:
            raise DomainError(f"frame indices must be non-negative, got {frames}")


@dataclass(frozen=True)
class DropLossConfig:
    """Overlap threshold below which prediction losses are dropped."""

    tau_iou: float = DROPLOSS_TAU

    def __post_init__(self):
        if not 0.0 <= self.tau_iou < 1.0:
            raise DomainError(f"tau_iou must lie in [0, 1), got {self.tau_iou}")


def _as_rng(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def eligible_frames(detections) -> set:
    """Frames where every detection of the video holds a selected label."""
    detections = list(detections)
    if not detections:
        raise NoDetections("eligible_frames needs at least one detection")
    n = detections[0].frame_count
    eligible = set(range(n))
    for d in detections:
        eligible &= {t for t, s in enumerate(d.selected) if s == 1}
    return eligible


def sample_frames(eligible, rng):
    """Uniform 3-subset of the eligible frames, ascending, or None.

    Fewer than three eligible frames means the video is skipped this
    round.  ``rng`` is a seed or Generator; equal seeds give equal
    triples.
    """
    pool = sorted(eligible)
    if len(pool) < FRAMES_PER_BATCH:
        return None
    rng = _as_rng(rng)
    picked = rng.choice(len(pool), size=FRAMES_PER_BATCH, replace=False)
    return tuple(pool[i] for i in sorted(picked))


def pick_source(rng, synthetic_available: bool = True, pseudo_available: bool = True) -> SourceTag:
    """Draw the batch source: synthetic or pseudo, 50% each.

    A single empty pool forces the other; two empty pools are an error.
    The draw consumes one uniform variate even when forced, so sequences
    stay aligned across configurations.
    """
    if not synthetic_available and not pseudo_available:
        raise BothPoolsEmpty("neither synthetic nor pseudo annotations available")
    rng = _as_rng(rng)
    toss = rng.random() < SYNTHETIC_PROBABILITY
    if not pseudo_available:
        return SourceTag.SYNTHETIC
    if not synthetic_available:
        return SourceTag.PSEUDO
    return SourceTag.SYNTHETIC if toss else SourceTag.PSEUDO


def sample_batch(dataset: TrainingDataset, rng):
    """Draw one TrainBatchSpec from a training dataset, or None.

    Picks the source tag first, then a uniform video among those carrying
    that tag, then three eligible frames of that video (eligibility counts
    every detection of the video, any source).  Returns None when the
    chosen video has too few eligible frames.
    """
    rng = _as_rng(rng)
    pools = {SourceTag.SYNTHETIC: set(), SourceTag.PSEUDO: set()}
    for a in dataset.annotations:
        if a.source in pools:
            pools[a.source].add(a.detection.video_id)
    source = pick_source(
        rng,
        synthetic_available=bool(pools[SourceTag.SYNTHETIC]),
        pseudo_available=bool(pools[SourceTag.PSEUDO]),
    )
    videos = sorted(pools[source])
    video_id = videos[rng.integers(len(videos))]
    frames = sample_frames(eligible_frames(dataset.detections_for(video_id)), rng)
    if frames is None:
        return None
    return TrainBatchSpec(video_id, frames, source)


def drop_loss_gate(pred_masks, gt_masks, losses, tau: float = DROPLOSS_TAU):
    """Zero the losses of predictions that overlap no ground truth.

    A loss survives iff its prediction's best IoU against any ground-truth
    mask strictly exceeds ``tau``; with no ground-truth masks at all the
    best IoU is 0 and every loss is dropped.  Output is pointwise <= input.
    """
    pred_masks = list(pred_masks)
    gt_masks = list(gt_masks)
    losses = [float(x) for x in losses]
    if len(pred_masks) != len(losses):
        raise LengthMismatch(
            f"{len(pred_masks)} predictions vs {len(losses)} losses"
        )
    for x in losses:
        if x < 0:
            raise DomainError(f"losses must be >= 0, got {x}")
    all_masks = pred_masks + gt_masks
    for m in all_masks:
        if m.height != all_masks[0].height or m.width != all_masks[0].width:
            raise DimensionMismatch(
                f"all masks must share dimensions, got {m.height}x{m.width} "
                f"vs {all_masks[0].height}x{all_masks[0].width}"
            )
    out = []
    for pred, loss in zip(pred_masks, losses):
        iou_max = max((mask_iou(pred, gt) for gt in gt_masks), default=0.0)
        out.append(loss if iou_max > tau else 0.0)
    return out
