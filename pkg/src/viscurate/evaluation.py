"""Class-agnostic spatiotemporal AP/AR for video instance segmentation.

Track IoU is the summed form used by the YouTubeVIS benchmark: intersection
pixels summed over frames divided by union pixels summed over frames, with
absent frames contributing empty masks.  This is *not* the mean of
per-frame IoUs (a frame where only one track is present drags the union up
without adding intersection).

Matching follows the COCO greedy protocol per video: predictions in
descending confidence order each claim the unmatched ground-truth track of
highest track IoU at or above the threshold.  AP is the 101-point
interpolated precision-recall integral over predictions pooled across
videos; the headline AP averages the ten thresholds 0.50:0.05:0.95.

Size strata (AP_S/M/L) bucket ground-truth tracks by their mean mask area
over present frames, using the COCO pixel boundaries.  Within a stratum, a
prediction counts as TP if matched to a stratum ground truth, as FP if
unmatched and its own track area falls in the stratum, and is ignored
otherwise.  A stratum with no ground truth and no counted predictions
scores a vacuous 1.0 (where COCO would report -1), keeping every report
field inside [0, 1].

AR@10 keeps the ten highest-confidence predictions per video and averages
recall over the same ten IoU thresholds.
"""

from dataclasses import dataclass

import numpy as np

from .dataset import Detection, TrainingDataset, decode_masks
from .errors import VideoMismatch, VideoSetMismatch
from .masks import AreaCategory, area_category

# IoU thresholds 0.50:0.05:0.95 as exact float literals.
IOU_THRESHOLDS = tuple(i / 100 for i in range(50, 100, 5))
# Division (not linspace): k/100 is correctly rounded, so a recall value
# that equals k/100 as a real number compares equal and is not skipped.
RECALL_POINTS = np.array([k / 100 for k in range(101)])
AR_MAX_DETECTIONS = 10


@dataclass(frozen=True)
class EvalReport:
    ap50: float
    ap75: float
    ap: float
    ap_small: float
    ap_medium: float
    ap_large: float
    ar10: float

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")
        if self.ap > self.ap50 + 1e-12:
            raise ValueError(f"ap={self.ap} exceeds ap50={self.ap50}")

    def as_dict(self) -> dict:
        return {
            "ap50": self.ap50,
            "ap75": self.ap75,
            "ap": self.ap,
            "ap_small": self.ap_small,
            "ap_medium": self.ap_medium,
            "ap_large": self.ap_large,
            "ar10": self.ar10,
        }


def track_iou(pred: Detection, gt: Detection) -> float:
    """Summed-over-frames IoU of two tracks; 0 when the total union is empty."""
    if pred.video_id != gt.video_id:
        raise VideoMismatch(
            f"detections from different videos: {pred.video_id} vs {gt.video_id}"
        )
    if pred.frame_count != gt.frame_count:
        raise VideoMismatch(
            f"frame counts differ: {pred.frame_count} vs {gt.frame_count}"
        )
    if not any(
        mp is not None and mg is not None for mp, mg in zip(pred.masks, gt.masks)
    ):
        # No common frame: intersection is empty, so the IoU is 0 without
        # decoding anything (also covers the empty-union case).
        return 0.0
    pred_bits = decode_masks(pred)
    gt_bits = decode_masks(gt)
    inter = 0
    union = 0
    for bp, bg in zip(pred_bits, gt_bits):
        if bp is None and bg is None:
            continue
        if bp is None:
            union += int(np.count_nonzero(bg))
        elif bg is None:
            union += int(np.count_nonzero(bp))
        else:
            inter += int(np.count_nonzero(bp & bg))
            union += int(np.count_nonzero(bp | bg))
    return (inter / union) if union else 0.0


@dataclass(frozen=True)
class MatchResult:
    """Greedy matching outcome for one video at one IoU threshold."""

    pred_match: tuple  # per prediction: index into gts, or -1
    gt_matched: tuple  # per ground truth: True if claimed

    @property
    def tp_flags(self) -> tuple:
        return tuple(m >= 0 for m in self.pred_match)


def match_and_score(preds, gts, iou_threshold, iou_matrix=None) -> MatchResult:
    """Greedily match confidence-sorted predictions to ground-truth tracks.

    ``preds`` must already be sorted by descending confidence.  Each
    prediction claims the unmatched ground truth with the highest track IoU
    >= threshold (ties go to the earlier ground truth in list order); a
    ground truth is claimed at most once.  ``iou_matrix`` may carry
    precomputed track IoUs (preds x gts) to avoid repeated pixel work.
    """
    if iou_matrix is None:
        iou_matrix = np.array(
            [[track_iou(p, g) for g in gts] for p in preds], dtype=np.float64
        ).reshape(len(preds), len(gts))
    pred_match = []
    gt_taken = [False] * len(gts)
    for i in range(len(preds)):
        best_j = -1
        best_iou = 0.0
        for j in range(len(gts)):
            if gt_taken[j]:
                continue
            iou = iou_matrix[i, j]
            if iou >= iou_threshold and iou > best_iou:
                best_iou = iou
                best_j = j
        if best_j >= 0:
            gt_taken[best_j] = True
        pred_match.append(best_j)
    return MatchResult(tuple(pred_match), tuple(gt_taken))


def average_precision(flags, n_gt: int) -> float:
    """101-point interpolated AP from ranked TP/FP flags.

    ``flags`` are per-prediction TP indicators in descending-confidence
    order, pooled across videos.  With no ground truth the value is vacuous:
    1.0 if there are also no predictions, else 0.0.
    """
    if n_gt == 0:
        return 1.0 if len(flags) == 0 else 0.0
    if len(flags) == 0:
        return 0.0
    tp = np.cumsum(np.asarray(flags, dtype=np.float64))
    ranks = np.arange(1, len(flags) + 1, dtype=np.float64)
    precision = tp / ranks
    recall = tp / n_gt
    # Enforce monotone non-increasing interpolated precision right-to-left.
    precision = np.maximum.accumulate(precision[::-1])[::-1]
    # For each recall point, precision of the first curve sample at recall >= r.
    idx = np.searchsorted(recall, RECALL_POINTS, side="left")
    interp = np.where(idx < len(precision), precision[np.minimum(idx, len(precision) - 1)], 0.0)
    return float(interp.mean())


def _track_area(det: Detection) -> float:
    """Mean mask area over present frames (0 if never present)."""
    areas = [m.area() for m in det.masks if m is not None]
    return float(np.mean(areas)) if areas else 0.0


def _sorted_preds(dets):
    return sorted(dets, key=lambda d: (-d.confidence, d.detection_id))


def evaluate(preds: TrainingDataset, gt: TrainingDataset) -> EvalReport:
    """Full class-agnostic metric suite for one prediction set."""
    if preds.video_ids() != gt.video_ids():
        raise VideoSetMismatch(
            f"prediction videos {sorted(preds.video_ids())} != "
            f"ground-truth videos {sorted(gt.video_ids())}"
        )

    per_video = []
    for vid in sorted(gt.video_ids()):
        vp = _sorted_preds(preds.detections_for(vid))
        vg = sorted(gt.detections_for(vid), key=lambda d: d.detection_id)
        ious = np.array(
            [[track_iou(p, g) for g in vg] for p in vp], dtype=np.float64
        ).reshape(len(vp), len(vg))
        per_video.append((vp, vg, ious))

    gt_categories = [
        [area_category(_track_area(g)) for g in vg] for _, vg, _ in per_video
    ]
    pred_categories = [
        [area_category(_track_area(p)) for p in vp] for vp, _, _ in per_video
    ]
    n_gt_total = sum(len(vg) for _, vg, _ in per_video)
    n_gt_by_cat = {}
    for cats in gt_categories:
        for c in cats:
            n_gt_by_cat[c] = n_gt_by_cat.get(c, 0) + 1

    ap_by_threshold = []
    ap_cat_by_threshold = {c: [] for c in AreaCategory}
    recall_by_threshold = []

    for thr in IOU_THRESHOLDS:
        pooled = []  # (confidence, detection_id, tp, pred_cat, matched_gt_cat)
        matched_gt = 0
        for v, (vp, vg, ious) in enumerate(per_video):
            result = match_and_score(vp, vg, thr, iou_matrix=ious)
            for i, p in enumerate(vp):
                j = result.pred_match[i]
                matched_cat = gt_categories[v][j] if j >= 0 else None
                pooled.append(
                    (p.confidence, p.detection_id, j >= 0, pred_categories[v][i], matched_cat)
                )
            # AR@10: same protocol with the prediction list capped.
            capped = match_and_score(vp[:AR_MAX_DETECTIONS], vg, thr, iou_matrix=ious[:AR_MAX_DETECTIONS])
            matched_gt += sum(capped.gt_matched)
        pooled.sort(key=lambda rec: (-rec[0], rec[1]))

        flags = [tp for _, _, tp, _, _ in pooled]
        ap_by_threshold.append(average_precision(flags, n_gt_total))

        for cat in AreaCategory:
            cat_flags = []
            for _, _, tp, pred_cat, matched_cat in pooled:
                if tp and matched_cat == cat:
                    cat_flags.append(True)
                elif not tp and pred_cat == cat:
                    cat_flags.append(False)
            ap_cat_by_threshold[cat].append(
                average_precision(cat_flags, n_gt_by_cat.get(cat, 0))
            )

        recall_by_threshold.append(matched_gt / n_gt_total if n_gt_total else 1.0)

    return EvalReport(
        ap50=ap_by_threshold[0],
        ap75=ap_by_threshold[5],
        ap=float(np.mean(ap_by_threshold)),
        ap_small=float(np.mean(ap_cat_by_threshold[AreaCategory.SMALL])),
        ap_medium=float(np.mean(ap_cat_by_threshold[AreaCategory.MEDIUM])),
        ap_large=float(np.mean(ap_cat_by_threshold[AreaCategory.LARGE])),
        ar10=float(np.mean(recall_by_threshold)),
    )
