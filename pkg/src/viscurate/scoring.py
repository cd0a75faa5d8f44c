"""Quality scoring of pseudo-labels and rank-correlation diagnostics.

The neural mask-quality predictor is abstracted behind
:class:`QualityScorer`: anything that maps (video, detection, frame, raw
soft mask) to a predicted IoU in [0, 1].  The scorer deliberately receives
the *raw* soft mask, not a binarized one; callers that only have binary
masks pass them through as 0/1-valued soft masks.

:class:`OracleScorer` closes the loop against hidden ground truth: it
returns the true per-frame IoU against the best-matching ground-truth
track, which isolates pipeline behavior from predictor error in tests and
simulations.  :class:`NoisyOracleScorer` degrades the oracle with seeded
Gaussian noise to model an imperfect predictor.

A detection's per-frame quality is its track confidence times the predicted
per-frame IoU.
"""

import abc
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .dataset import Detection, TrainingDataset, VideoMeta
from .errors import DomainError, LengthMismatch, TooFewSamples
from .evaluation import track_iou
from .masks import SoftMask, binarize, mask_iou, rle_decode

BINARIZE_THRESHOLD = 0.5


class QualityScorer(abc.ABC):
    """Predicts the mask IoU of one detection in one frame."""

    @abc.abstractmethod
    def score_frame(
        self, video: VideoMeta, detection: Detection, frame: int, raw_mask: SoftMask
    ) -> float:
        """Predicted IoU in [0, 1]; deterministic for identical inputs."""


class OracleScorer(QualityScorer):
    """Scores with the true IoU against hidden ground truth.

    The ground-truth track is chosen once per detection as the one
    maximizing whole-track spatiotemporal IoU (ties to the lower id), then
    every frame is scored against that single track, so the matched
    identity is stable across frames.  Frames where the matched track is
    absent score 0, as do detections in videos without any ground truth.

    The match is cached per (video_id, detection_id); a scorer instance
    assumes detection masks are stable for a given id during its lifetime.
    """

    def __init__(self, ground_truth: TrainingDataset):
        self.ground_truth = ground_truth
        self._match_cache = {}

    def _best_match(self, detection: Detection):
        key = (detection.video_id, detection.detection_id)
        if key not in self._match_cache:
            best = None
            best_iou = -1.0
            for gt in sorted(
                self.ground_truth.detections_for(detection.video_id),
                key=lambda d: d.detection_id,
            ):
                iou = track_iou(detection, gt)
                if iou > best_iou:
                    best = gt
                    best_iou = iou
            self._match_cache[key] = best
        return self._match_cache[key]

    def score_frame(self, video, detection, frame, raw_mask):
        match = self._best_match(detection)
        if match is None or match.masks[frame] is None:
            return 0.0
        pred = binarize(raw_mask, BINARIZE_THRESHOLD)
        return mask_iou(pred, rle_decode(match.masks[frame]))


class NoisyOracleScorer(QualityScorer):
    """Oracle plus clamped Gaussian noise, reproducible per seed.

    The noise is a pure function of (seed, video, detection, frame), so
    repeated calls with identical inputs return identical values.  With
    ``noise_sigma`` 0 the output is bit-identical to the inner oracle.
    """

    def __init__(self, inner: OracleScorer, noise_sigma: float, seed: int):
        if noise_sigma < 0:
            raise DomainError(f"noise_sigma must be >= 0, got {noise_sigma}")
        self.inner = inner
        self.noise_sigma = noise_sigma
        self.seed = seed

    def score_frame(self, video, detection, frame, raw_mask):
        clean = self.inner.score_frame(video, detection, frame, raw_mask)
        rng = np.random.default_rng(
            (self.seed, video.video_id, detection.detection_id, frame)
        )
        noisy = clean + rng.normal(0.0, self.noise_sigma)
        return float(min(1.0, max(0.0, noisy)))


class ConstantScorer(QualityScorer):
    """Returns a fixed predicted IoU for every frame.

    With value 1.0 the quality score degenerates to the raw confidence,
    which is exactly the confidence-only selection baseline.
    """

    def __init__(self, value: float = 1.0):
        if not 0.0 <= value <= 1.0:
            raise DomainError(f"value must lie in [0, 1], got {value}")
        self.value = value

    def score_frame(self, video, detection, frame, raw_mask):
        return self.value


@dataclass(frozen=True)
class ScoredDetection:
    """A detection with per-frame predicted IoU and quality values."""

    detection: Detection
    iou_hat: tuple
    quality: tuple

    def __post_init__(self):
        iou_hat = tuple(float(v) for v in self.iou_hat)
        quality = tuple(float(v) for v in self.quality)
        object.__setattr__(self, "iou_hat", iou_hat)
        object.__setattr__(self, "quality", quality)
        n = self.detection.frame_count
        if len(iou_hat) != n or len(quality) != n:
            raise LengthMismatch(
                f"scores must cover all {n} frames, got "
                f"{len(iou_hat)} iou_hat / {len(quality)} quality"
            )
        conf = self.detection.confidence
        for t, (v, q) in enumerate(zip(iou_hat, quality)):
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"iou_hat[{t}]={v} outside [0, 1]")
            if q != conf * v:
                raise DomainError(
                    f"quality[{t}]={q} is not confidence*iou_hat = {conf * v}"
                )

    @classmethod
    def from_iou_hat(cls, detection: Detection, iou_hat) -> "ScoredDetection":
        iou_hat = tuple(float(v) for v in iou_hat)
        quality = tuple(detection.confidence * v for v in iou_hat)
        return cls(detection, iou_hat, quality)


def quality_score(confidence: float, iou_hat: float) -> float:
    """Quality of one label: confidence times predicted IoU."""
    if not 0.0 <= confidence <= 1.0:
        raise DomainError(f"confidence {confidence} outside [0, 1]")
    if not 0.0 <= iou_hat <= 1.0:
        raise DomainError(f"iou_hat {iou_hat} outside [0, 1]")
    return confidence * iou_hat


def score_detection(
    scorer: QualityScorer,
    video: VideoMeta,
    det: Detection,
    soft_masks=None,
) -> ScoredDetection:
    """Score every frame of a detection.

    ``soft_masks`` optionally supplies the raw per-frame soft masks (one
    entry per frame, None where absent); without it the stored binary masks
    are passed to the scorer as 0/1-valued soft masks.  Absent frames score
    0 by convention -- they can never be selected anyway.
    """
    iou_hat = []
    for t, m in enumerate(det.masks):
        if m is None:
            iou_hat.append(0.0)
            continue
        if soft_masks is not None and soft_masks[t] is not None:
            raw = soft_masks[t]
        else:
            raw = SoftMask(rle_decode(m).bits.astype(np.float64))
        value = float(scorer.score_frame(video, det, t, raw))
        if not 0.0 <= value <= 1.0:
            raise DomainError(
                f"scorer returned {value} outside [0, 1] for frame {t}"
            )
        iou_hat.append(value)
    return ScoredDetection.from_iou_hat(det, iou_hat)


def spearman_rank(xs, ys) -> float:
    """Spearman's rank correlation with average ranks for ties.

    Returns NaN when either input is constant (ranks carry no signal).
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise LengthMismatch(f"inputs must be equal-length 1-D, got {xs.shape} vs {ys.shape}")
    if xs.size < 2:
        raise TooFewSamples(f"need at least 2 samples, got {xs.size}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", stats.ConstantInputWarning)
        return float(stats.spearmanr(xs, ys).statistic)
