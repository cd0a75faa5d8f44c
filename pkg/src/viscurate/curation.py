"""Pseudo-label curation: confidence filter, video NMS, quality selection.

Raw detector output for one video passes through four stages:

1. drop whole tracks whose confidence is below threshold,
2. greedy non-maximum suppression across tracks, where two tracks clash
   as soon as any single frame overlaps enough,
3. per-frame quality selection (confidence times predicted IoU against a
   threshold), and
4. retention of tracks that kept at least one selected frame.

Every stage is pure and usable on its own; :func:`curate_video` composes
them.  Thresholds are inclusive (a value exactly at the threshold passes
the confidence and quality gates, and exactly-threshold overlap counts as
a clash in NMS).
"""

from dataclasses import dataclass, replace

from .dataset import Detection, VideoMeta
from .errors import DomainError, MixedVideoError
from .masks import mask_iou, rle_decode
from .scoring import QualityScorer, ScoredDetection, score_detection

CONFIDENCE_THRESHOLD = 0.25
NMS_IOU_THRESHOLD = 0.5
QUALITY_THRESHOLD = 0.75


@dataclass(frozen=True)
class CurationConfig:
    """Thresholds for the curation stages."""

    confidence_threshold: float = CONFIDENCE_THRESHOLD
    nms_iou_threshold: float = NMS_IOU_THRESHOLD
    quality_threshold: float = QUALITY_THRESHOLD

    def __post_init__(self):
        for name in ("confidence_threshold", "nms_iou_threshold", "quality_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}")


def _check_single_video(detections):
    vids = {d.video_id for d in detections}
    if len(vids) > 1:
        raise MixedVideoError(
            f"detections span multiple videos: {sorted(vids)}"
        )


def filter_by_confidence(detections, threshold: float = CONFIDENCE_THRESHOLD):
    """Keep detections with confidence at or above ``threshold``."""
    return [d for d in detections if d.confidence >= threshold]


def max_frame_iou(a: Detection, b: Detection) -> float:
    """Largest single-frame mask IoU between two tracks of one video."""
    best = 0.0
    for ma, mb in zip(a.masks, b.masks):
        if ma is None or mb is None:
            continue
        iou = mask_iou(rle_decode(ma), rle_decode(mb))
        if iou > best:
            best = iou
    return best


def spatiotemporal_nms(detections, iou_threshold: float = NMS_IOU_THRESHOLD):
    """Greedy track-level non-maximum suppression.

    Tracks are visited by decreasing confidence (ties by increasing id).
    A track is suppressed as soon as any already-kept track overlaps it by
    ``iou_threshold`` or more in any single frame.  Output preserves the
    visiting order.
    """
    _check_single_video(detections)
    ordered = sorted(detections, key=lambda d: (-d.confidence, d.detection_id))
    kept = []
    for cand in ordered:
        clash = False
        for winner in kept:
            for mc, mw in zip(cand.masks, winner.masks):
                if mc is None or mw is None:
                    continue
                if mask_iou(rle_decode(mc), rle_decode(mw)) >= iou_threshold:
                    clash = True
                    break
            if clash:
                break
        if not clash:
            kept.append(cand)
    return kept


def select_labels(scored: ScoredDetection, quality_threshold: float = QUALITY_THRESHOLD) -> Detection:
    """Mark frames whose quality reaches the threshold as selected.

    Frames without a mask are never selected, whatever the threshold.
    """
    det = scored.detection
    selected = tuple(
        1 if m is not None and q >= quality_threshold else 0
        for m, q in zip(det.masks, scored.quality)
    )
    return replace(det, selected=selected)


def retain(detections):
    """Keep detections with at least one selected frame."""
    return [d for d in detections if d.selected_count() >= 1]


def curate_video(
    detections,
    video: VideoMeta,
    scorer: QualityScorer,
    config: CurationConfig = CurationConfig(),
    soft_masks_by_id=None,
):
    """Run the full curation pipeline on one video's raw detections.

    ``soft_masks_by_id`` optionally maps detection id to the per-frame raw
    soft masks handed to the scorer; detections without an entry are scored
    from their stored binary masks.  Returns the retained detections with
    their selected flags set, in NMS (confidence) order.
    """
    _check_single_video(detections)
    for d in detections:
        if d.video_id != video.video_id:
            raise MixedVideoError(
                f"detection {d.detection_id} belongs to video {d.video_id}, "
                f"not {video.video_id}"
            )
    confident = filter_by_confidence(detections, config.confidence_threshold)
    survivors = spatiotemporal_nms(confident, config.nms_iou_threshold)
    selected = []
    for d in survivors:
        soft = None
        if soft_masks_by_id is not None:
            soft = soft_masks_by_id.get(d.detection_id)
        scored = score_detection(scorer, video, d, soft_masks=soft)
        selected.append(select_labels(scored, config.quality_threshold))
    return retain(selected)
