"""Merging freshly curated detections into the persistent training set.

Each self-training round produces retained detections per video.  Videos
the dataset has never seen are bulk-inserted.  For known videos, every new
detection either joins the set (no overlap with any existing track) or is
fused frame-by-frame with the single best-overlapping existing track:
selection flags combine by max, and a frame's mask comes from the existing
track only where it alone holds a selected label -- otherwise the newer
mask wins.  The fused track carries the new detection's confidence under a
fresh id.

Synthetic annotations are permanent: they are never fused away and pass
through every merge untouched.
"""

from dataclasses import dataclass, replace

from .dataset import Annotation, Detection, SourceTag, TrainingDataset, VideoMeta
from .errors import DomainError, MixedVideoError, NoOverlap, UnknownVideo, VideoMismatch
from .curation import max_frame_iou
from .masks import mask_iou, rle_decode

OVERLAP_IOU_THRESHOLD = 0.5


@dataclass(frozen=True)
class FusionConfig:
    """Overlap threshold deciding when two tracks describe one object."""

    overlap_iou: float = OVERLAP_IOU_THRESHOLD

    def __post_init__(self):
        if not 0.0 <= self.overlap_iou <= 1.0:
            raise DomainError(f"overlap_iou must lie in [0, 1], got {self.overlap_iou}")


def overlaps(d_new: Detection, d_exist: Detection, iou: float = OVERLAP_IOU_THRESHOLD) -> bool:
    """Whether two tracks of one video collide in at least one frame.

    True iff some frame has both masks present with IoU at or above
    ``iou``.  Symmetric in its mask test.
    """
    if d_new.video_id != d_exist.video_id:
        raise VideoMismatch(
            f"detections from different videos: {d_new.video_id} vs {d_exist.video_id}"
        )
    if d_new.frame_count != d_exist.frame_count:
        raise VideoMismatch(
            f"frame counts differ: {d_new.frame_count} vs {d_exist.frame_count}"
        )
    for mn, me in zip(d_new.masks, d_exist.masks):
        if mn is None or me is None:
            continue
        if mask_iou(rle_decode(mn), rle_decode(me)) >= iou:
            return True
    return False


def fuse_pair(d_new: Detection, d_exist: Detection, new_id: int | None = None) -> Detection:
    """Fuse an overlapping pair of tracks frame by frame.

    Per frame the fused selection flag is the max of the two, and the mask
    is the existing one exactly where only the existing track holds a
    selected label; everywhere else the new track's mask (possibly absent)
    is taken.  The result inherits the new detection's confidence and gets
    detection id ``new_id`` (``None`` keeps the new detection's id, which
    is fresh relative to the existing set whenever id ranges per round are
    disjoint).
    """
    if not overlaps(d_new, d_exist):
        raise NoOverlap(
            f"detections {d_new.detection_id} and {d_exist.detection_id} "
            "do not overlap in any frame"
        )
    masks = []
    selected = []
    for mn, sn, me, se in zip(d_new.masks, d_new.selected, d_exist.masks, d_exist.selected):
        if se == 1 and sn == 0:
            masks.append(me)
        else:
            masks.append(mn)
        selected.append(max(sn, se))
    return replace(
        d_new,
        detection_id=d_new.detection_id if new_id is None else new_id,
        masks=tuple(masks),
        selected=tuple(selected),
    )


def insert_detection(existing, d_new: Detection, config: FusionConfig = FusionConfig(), id_alloc=None):
    """Insert one new detection into a video's existing detection set.

    With no overlapping existing track the detection is appended.
    Otherwise the overlapping track with the largest best-frame IoU (ties
    to the lower id) is replaced, in place, by its fusion with ``d_new``.
    ``id_alloc``, when given, is called for the fused track's fresh id.
    Total selected-frame count never decreases.
    """
    for d in existing:
        if d.video_id != d_new.video_id:
            raise MixedVideoError(
                f"detection {d.detection_id} belongs to video {d.video_id}, "
                f"not {d_new.video_id}"
            )
    best_idx = None
    best_iou = -1.0
    for i, d in enumerate(existing):
        if not overlaps(d_new, d, config.overlap_iou):
            continue
        iou = max_frame_iou(d_new, d)
        if iou > best_iou or (iou == best_iou and d.detection_id < existing[best_idx].detection_id):
            best_idx = i
            best_iou = iou
    if best_idx is None:
        return list(existing) + [d_new]
    fused_id = id_alloc() if id_alloc is not None else None
    out = list(existing)
    out[best_idx] = fuse_pair(d_new, existing[best_idx], new_id=fused_id)
    return out


def merge_video(existing, retained_new, config: FusionConfig = FusionConfig(), id_alloc=None):
    """Fold every retained detection of one video into the existing set.

    New detections are processed in ascending id order, so the outcome is
    independent of input ordering.
    """
    out = list(existing)
    for d_new in sorted(retained_new, key=lambda d: d.detection_id):
        out = insert_detection(out, d_new, config, id_alloc=id_alloc)
    return out


def merge_dataset(
    current: TrainingDataset,
    retained,
    video_catalog: dict,
    config: FusionConfig = FusionConfig(),
) -> TrainingDataset:
    """Merge one round's retained detections into the training dataset.

    ``video_catalog`` maps video id to :class:`VideoMeta` for any video the
    retained detections reference beyond those already in ``current``.
    Unknown-video detections join as whole new videos; detections for known
    videos go through per-detection fusion against the non-synthetic pool.
    Synthetic annotations pass through verbatim.  Fused tracks receive
    fresh ids above every id seen in either input and are tagged Pseudo, as
    are plainly inserted ones; untouched survivors keep their tags.  The
    round index advances by one.
    """
    known = {v.video_id: v for v in current.videos}
    by_video = {}
    for d in retained:
        if d.video_id not in known and d.video_id not in video_catalog:
            raise UnknownVideo(f"retained detection {d.detection_id} references video {d.video_id}")
        by_video.setdefault(d.video_id, []).append(d)

    used_ids = [a.detection.detection_id for a in current.annotations]
    used_ids += [d.detection_id for d in retained]
    next_id = 1 + max(used_ids, default=0)

    def id_alloc():
        nonlocal next_id
        fresh = next_id
        next_id += 1
        return fresh

    videos = list(current.videos)
    for vid in sorted(by_video):
        if vid not in known:
            videos.append(video_catalog[vid])

    tag_by_id = {a.detection.detection_id: a.source for a in current.annotations}
    annotations = []
    for vid in sorted({v.video_id for v in videos}):
        existing = current.detections_for(vid) if vid in known else []
        synthetic = [d for d in existing if tag_by_id[d.detection_id] is SourceTag.SYNTHETIC]
        pool = [d for d in existing if tag_by_id[d.detection_id] is not SourceTag.SYNTHETIC]
        merged = merge_video(pool, by_video.get(vid, []), config, id_alloc=id_alloc)
        for d in synthetic:
            annotations.append(Annotation(d, SourceTag.SYNTHETIC))
        for d in merged:
            annotations.append(Annotation(d, tag_by_id.get(d.detection_id, SourceTag.PSEUDO)))
    return TrainingDataset(current.round_index + 1, tuple(videos), tuple(annotations))
