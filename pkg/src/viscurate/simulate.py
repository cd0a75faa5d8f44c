"""Seeded end-to-end self-training simulation with hidden ground truth.

The simulator stands in for everything neural: a procedural corpus of
moving rectangles and ellipses provides hidden ground-truth tracks plus a
disjoint synthetic training set, and a perturbation "detector" emits
jittered copies of the ground truth whose error shrinks as a scalar
fidelity grows.  Each round runs detector -> curation -> fusion, snapshots
the training dataset, and feeds the mean true IoU of the labels it just
selected back into the next round's fidelity -- the whole
quality-begets-quality loop in miniature, bit-reproducible from one seed.

Per-(round, video) generators are seeded with the tuple
``(seed, round, video_id)``, so per-video work can run on any number of
threads without changing a single byte of output.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import ndimage

from .curation import CurationConfig, filter_by_confidence, retain, select_labels, spatiotemporal_nms
from .dataset import (
    Annotation,
    Detection,
    SourceTag,
    TrainingDataset,
    VideoMeta,
    restrict_to_selected,
    save_dataset,
)
from .errors import DomainError, ParseError
from .evaluation import EvalReport, evaluate
from .fusion import FusionConfig, merge_dataset
from .masks import BitMask, SoftMask, rle_decode, rle_encode
from .scoring import ConstantScorer, NoisyOracleScorer, OracleScorer, score_detection

SYNTHETIC_VIDEO_OFFSET = 1000
SYNTHETIC_ID_BLOCK = 900_000_000
ROUND_ID_BLOCK = 1_000_000
VIDEO_ID_BLOCK = 1000


@dataclass(frozen=True)
class DetectorNoise:
    """Perturbation strengths of the simulated detector."""

    jitter_radius: int = 4
    miss_rate: float = 0.1
    false_positive_rate: float = 0.4
    fragment_rate: float = 0.3
    confidence_noise: float = 0.1

    def __post_init__(self):
        if self.jitter_radius < 0:
            raise DomainError(f"jitter_radius must be >= 0, got {self.jitter_radius}")
        for name in ("miss_rate", "false_positive_rate", "fragment_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}")
        if not 0.0 <= self.confidence_noise <= 1.0:
            raise DomainError(
                f"confidence_noise must lie in [0, 1], got {self.confidence_noise}"
            )


@dataclass(frozen=True)
class CorpusConfig:
    """Size of the procedural video corpus."""

    n_videos: int = 10
    frames_per_video: int = 8
    objects_per_video: int = 3
    width: int = 96
    height: int = 64

    def __post_init__(self):
        for name in ("n_videos", "frames_per_video", "objects_per_video"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be >= 1")
        if self.width < 16 or self.height < 16:
            raise DomainError("corpus frames must be at least 16x16")


SCORER_KINDS = ("oracle", "confidence")


@dataclass(frozen=True)
class SimConfig:
    """Full configuration of a multi-round self-training run."""

    seed: int = 0
    rounds: int = 2
    reset_each_round: bool = True
    base_fidelity: float = 0.5
    improvement_gain: float = 0.4
    scorer: str = "oracle"
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    curation: CurationConfig = field(default_factory=CurationConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    detector_noise: DetectorNoise = field(default_factory=DetectorNoise)

    def __post_init__(self):
        if self.rounds < 1:
            raise DomainError(f"rounds must be >= 1, got {self.rounds}")
        if not 0.0 <= self.base_fidelity <= 1.0:
            raise DomainError(f"base_fidelity must lie in [0, 1], got {self.base_fidelity}")
        if not 0.0 <= self.improvement_gain < 1.0:
            raise DomainError(
                f"improvement_gain must lie in [0, 1), got {self.improvement_gain}"
            )
        if self.scorer not in SCORER_KINDS and not self.scorer.startswith("noisy:"):
            raise DomainError(
                f"scorer must be 'oracle', 'confidence', or 'noisy:<sigma>', got {self.scorer!r}"
            )
        if self.scorer.startswith("noisy:"):
            try:
                sigma = float(self.scorer.split(":", 1)[1])
            except ValueError:
                raise DomainError(f"bad noisy scorer sigma in {self.scorer!r}") from None
            if sigma < 0:
                raise DomainError(f"noisy scorer sigma must be >= 0, got {sigma}")


def make_scorer(config: SimConfig, ground_truth: TrainingDataset):
    """Build the quality scorer named by ``config.scorer``."""
    if config.scorer == "oracle":
        return OracleScorer(ground_truth)
    if config.scorer == "confidence":
        return ConstantScorer(1.0)
    sigma = float(config.scorer.split(":", 1)[1])
    return NoisyOracleScorer(OracleScorer(ground_truth), sigma, config.seed)


def sim_config_to_obj(config: SimConfig) -> dict:
    """Plain-JSON form of a SimConfig (inverse of sim_config_from_obj)."""
    return {
        "seed": config.seed,
        "rounds": config.rounds,
        "reset_each_round": config.reset_each_round,
        "base_fidelity": config.base_fidelity,
        "improvement_gain": config.improvement_gain,
        "scorer": config.scorer,
        "corpus": {
            "n_videos": config.corpus.n_videos,
            "frames_per_video": config.corpus.frames_per_video,
            "objects_per_video": config.corpus.objects_per_video,
            "width": config.corpus.width,
            "height": config.corpus.height,
        },
        "curation": {
            "confidence_threshold": config.curation.confidence_threshold,
            "nms_iou_threshold": config.curation.nms_iou_threshold,
            "quality_threshold": config.curation.quality_threshold,
        },
        "fusion": {"overlap_iou": config.fusion.overlap_iou},
        "detector_noise": {
            "jitter_radius": config.detector_noise.jitter_radius,
            "miss_rate": config.detector_noise.miss_rate,
            "false_positive_rate": config.detector_noise.false_positive_rate,
            "fragment_rate": config.detector_noise.fragment_rate,
            "confidence_noise": config.detector_noise.confidence_noise,
        },
    }


def _build_section(obj, section, cls):
    sub = obj.get(section, {})
    if not isinstance(sub, dict):
        raise ParseError(f"config section {section!r} must be an object")
    try:
        return cls(**sub)
    except TypeError as exc:
        raise ParseError(f"bad config section {section!r}: {exc}") from None


def sim_config_from_obj(obj: dict) -> SimConfig:
    """Parse a config JSON object; missing keys take their defaults."""
    if not isinstance(obj, dict):
        raise ParseError("config must be a JSON object")
    known = {
        "seed", "rounds", "reset_each_round", "base_fidelity",
        "improvement_gain", "scorer", "corpus", "curation", "fusion",
        "detector_noise",
    }
    unknown = set(obj) - known
    if unknown:
        raise ParseError(f"unknown config keys: {sorted(unknown)}")
    top = {k: obj[k] for k in obj if k not in ("corpus", "curation", "fusion", "detector_noise")}
    try:
        return SimConfig(
            corpus=_build_section(obj, "corpus", CorpusConfig),
            curation=_build_section(obj, "curation", CurationConfig),
            fusion=_build_section(obj, "fusion", FusionConfig),
            detector_noise=_build_section(obj, "detector_noise", DetectorNoise),
            **top,
        )
    except TypeError as exc:
        raise ParseError(f"bad config value: {exc}") from None


def _shape_bits(height, width, kind, cy, cx, ry, rx):
    yy, xx = np.ogrid[:height, :width]
    if kind == 0:
        bits = (np.abs(yy - cy) <= ry) & (np.abs(xx - cx) <= rx)
    else:
        bits = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
    return bits


def _random_track(rng, frames, height, width):
    """Masks of one moving solid shape, non-empty in every frame."""
    kind = int(rng.integers(2))
    ry = int(rng.integers(max(4, height // 12), height // 4 + 1))
    rx = int(rng.integers(max(4, width // 12), width // 4 + 1))
    cy = float(rng.integers(ry, height - ry))
    cx = float(rng.integers(rx, width - rx))
    vy = float(rng.integers(-3, 4))
    vx = float(rng.integers(-3, 4))
    masks = []
    for _ in range(frames):
        iy = int(round(min(max(cy, ry), height - 1 - ry)))
        ix = int(round(min(max(cx, rx), width - 1 - rx)))
        bits = _shape_bits(height, width, kind, iy, ix, ry, rx)
        masks.append(BitMask(bits))
        cy += vy
        cx += vx
    return masks


def generate_corpus(
    n_videos: int,
    frames_per_video: int,
    objects_per_video: int,
    dims: tuple,
    seed: int,
):
    """Build the hidden ground truth and the synthetic training corpus.

    Returns ``(gt, synthetic)``: ground-truth tracks over videos
    1..n_videos, and an equally sized disjoint video set (ids offset by
    1000) whose annotations are tagged Synthetic.  All tracks are present
    and selected in every frame; both datasets are deterministic in the
    seed.
    """
    width, height = dims
    CorpusConfig(n_videos, frames_per_video, objects_per_video, width, height)

    def build(video_offset, id_block, tag, stream):
        videos = []
        annotations = []
        for v in range(1, n_videos + 1):
            vid = video_offset + v
            rng = np.random.default_rng((seed, stream, vid))
            videos.append(VideoMeta(vid, frames_per_video, width, height))
            for j in range(objects_per_video):
                masks = _random_track(rng, frames_per_video, height, width)
                det = Detection(
                    detection_id=id_block + v * VIDEO_ID_BLOCK + j,
                    video_id=vid,
                    confidence=1.0,
                    masks=tuple(rle_encode(m) for m in masks),
                    selected=(1,) * frames_per_video,
                )
                annotations.append(Annotation(det, tag))
        return TrainingDataset(0, tuple(videos), tuple(annotations))

    gt = build(0, 0, SourceTag.GROUND_TRUTH, stream=1)
    synthetic = build(SYNTHETIC_VIDEO_OFFSET, SYNTHETIC_ID_BLOCK, SourceTag.SYNTHETIC, stream=2)
    return gt, synthetic


@dataclass(frozen=True)
class RawDetection:
    """A simulated detection and the raw soft masks behind it."""

    detection: Detection
    soft_masks: tuple

    def __post_init__(self):
        if len(self.soft_masks) != self.detection.frame_count:
            raise DomainError("soft_masks must cover every frame")


def _shift_bits(bits, dy, dx):
    out = np.zeros_like(bits)
    h, w = bits.shape
    ys = slice(max(dy, 0), min(h, h + dy))
    yd = slice(max(-dy, 0), min(h, h - dy))
    xs = slice(max(dx, 0), min(w, w + dx))
    xd = slice(max(-dx, 0), min(w, w - dx))
    out[ys, xs] = bits[yd, xd]
    return out


def _jitter_mask(bits, rng, radius_max):
    """Shifted and dilated/eroded copy of a binary mask.

    Each frame draws a severity in 0..radius_max; severity 0 reproduces
    the mask exactly, larger severities shift within that radius and
    dilate or erode by it, so a track mixes clean and degraded frames.
    """
    if radius_max <= 0:
        return bits.copy()
    radius = int(rng.integers(0, radius_max + 1))
    if radius == 0:
        return bits.copy()
    dy, dx = (int(d) for d in rng.integers(-radius, radius + 1, size=2))
    out = _shift_bits(bits, dy, dx)
    if rng.random() < 0.5:
        grown = ndimage.binary_dilation(out, iterations=radius)
    else:
        grown = ndimage.binary_erosion(out, iterations=radius)
    if grown.any():
        out = grown
    if not out.any():
        out = bits.copy()
    return out


def _soften(bits, rng):
    """Soft mask binarizing back to ``bits`` exactly at threshold 0.5."""
    values = 0.5 * rng.random(bits.shape)
    inside = 1.0 - 0.5 * rng.random(bits.shape)
    return SoftMask(np.where(bits, inside, values))


def _present_frames_iou(frames, anchor_bits):
    """IoU against the anchor track counted only where the track emitted.

    This is the detector's own view of its quality: a confident but
    temporally fragmented track scores high here even though its full
    spatiotemporal IoU is poor.
    """
    inter = 0
    union = 0
    for f, g in zip(frames, anchor_bits):
        if f is None:
            continue
        if g is None:
            union += int(f.sum())
            continue
        inter += int((f & g).sum())
        union += int((f | g).sum())
    return inter / union if union else 0.0


def _emit_track(rng, video, track_masks, noise, radius_max, det_id, anchor_bits):
    """One jittered detection for a source track, or None if fragmented away."""
    frames = []
    for bits in track_masks:
        if rng.random() < noise.fragment_rate:
            frames.append(None)
        else:
            frames.append(_jitter_mask(bits, rng, radius_max))
    if all(f is None for f in frames):
        return None
    realized = _present_frames_iou(frames, anchor_bits)
    c = noise.confidence_noise
    conf = realized if c == 0 else realized + rng.uniform(-c, c)
    det = Detection(
        detection_id=det_id,
        video_id=video.video_id,
        confidence=float(min(1.0, max(0.0, conf))),
        masks=tuple(None if f is None else rle_encode(BitMask(f)) for f in frames),
        selected=(0,) * len(frames),
    )
    soft = tuple(None if f is None else _soften(f, rng) for f in frames)
    return RawDetection(det, soft)


def simulate_detector(
    gt_detections,
    video: VideoMeta,
    noise: DetectorNoise,
    fidelity: float,
    seed,
    id_base: int = 0,
):
    """Emit noisy detections for one video's ground-truth tracks.

    Each track is missed with probability miss_rate; otherwise its masks
    are shifted and dilated/eroded with per-frame severity up to
    ceil(jitter_radius x (1 - fidelity)), and frames drop out at
    fragment_rate.  Confidence is the realized IoU against the truth over
    the frames actually emitted, plus bounded uniform noise, clamped to
    [0, 1] -- so a fragmented track is confidently wrong about its
    spatiotemporal coverage, which curation and fusion must repair.  With
    probability false_positive_rate per track a spurious detection joins:
    an unrelated background blob or a mildly jittered near-duplicate.
    Fully deterministic in ``seed``; detection ids count up from
    ``id_base``.
    """
    if not 0.0 <= fidelity <= 1.0:
        raise DomainError(f"fidelity must lie in [0, 1], got {fidelity}")
    rng = np.random.default_rng(seed)
    radius_max = math.ceil(noise.jitter_radius * (1.0 - fidelity))
    gt_sorted = sorted(gt_detections, key=lambda d: d.detection_id)
    decoded = {
        d.detection_id: [None if m is None else rle_decode(m).bits for m in d.masks]
        for d in gt_sorted
    }
    out = []
    next_id = id_base
    for gt_det in gt_sorted:
        track = decoded[gt_det.detection_id]
        if rng.random() >= noise.miss_rate:
            raw = _emit_track(rng, video, track, noise, radius_max, next_id, track)
            if raw is not None:
                out.append(raw)
                next_id += 1
        if rng.random() < noise.false_positive_rate:
            if rng.random() < 0.5:
                blob = _random_track(rng, video.frame_count, video.height, video.width)
                source = [m.bits for m in blob]
                anchor_bits = decoded[
                    max(
                        gt_sorted,
                        key=lambda d: _blob_track_iou(source, decoded[d.detection_id]),
                    ).detection_id
                ]
                fp_radius = radius_max + 2
            else:
                source = track
                anchor_bits = track
                fp_radius = radius_max + 1
            raw = _emit_track(rng, video, source, noise, fp_radius, next_id, anchor_bits)
            if raw is not None:
                out.append(raw)
                next_id += 1
    return out


def _blob_track_iou(blob_bits, gt_bits):
    inter = 0
    union = 0
    for b, g in zip(blob_bits, gt_bits):
        if g is None:
            union += int(b.sum())
            continue
        inter += int((b & g).sum())
        union += int((b | g).sum())
    return inter / union if union else 0.0


@dataclass(frozen=True)
class SimState:
    """Everything a round needs: truth, training set, detector fidelity."""

    ground_truth: TrainingDataset
    dataset: TrainingDataset
    fidelity: float
    round_index: int


@dataclass(frozen=True)
class RoundReport:
    """Stage counts and quality diagnostics of one self-training round."""

    round_index: int
    n_raw: int
    n_filtered: int
    n_after_nms: int
    n_retained: int
    n_selected_frames: int
    mean_true_iou_selected: float
    fidelity: float
    raw_ap50: float
    dataset_snapshot_path: str | None = None
    final_eval: dict | None = None

    def __post_init__(self):
        if not self.n_raw >= self.n_filtered >= self.n_after_nms >= self.n_retained >= 0:
            raise DomainError(
                "stage counts must be monotone: "
                f"{self.n_raw} >= {self.n_filtered} >= {self.n_after_nms} "
                f">= {self.n_retained} fails"
            )

    def as_dict(self) -> dict:
        return {
            "round_index": self.round_index,
            "n_raw": self.n_raw,
            "n_filtered": self.n_filtered,
            "n_after_nms": self.n_after_nms,
            "n_retained": self.n_retained,
            "n_selected_frames": self.n_selected_frames,
            "mean_true_iou_selected": self.mean_true_iou_selected,
            "fidelity": self.fidelity,
            "raw_ap50": self.raw_ap50,
            "dataset_snapshot_path": self.dataset_snapshot_path,
            "final_eval": self.final_eval,
        }


def _curate_with_counts(raw, video, scorer, curation: CurationConfig):
    """Curation stages of one video, keeping per-stage survivor counts."""
    detections = [r.detection for r in raw]
    soft_by_id = {r.detection.detection_id: r.soft_masks for r in raw}
    confident = filter_by_confidence(detections, curation.confidence_threshold)
    survivors = spatiotemporal_nms(confident, curation.nms_iou_threshold)
    selected = [
        select_labels(
            score_detection(scorer, video, d, soft_masks=soft_by_id[d.detection_id]),
            curation.quality_threshold,
        )
        for d in survivors
    ]
    retained = retain(selected)
    return retained, len(confident), len(survivors)


def _true_iou_stats(retained_by_video, gt, videos_by_id):
    """Selected-frame count and mean true per-frame IoU over retained labels."""
    oracle = OracleScorer(gt)
    total = 0
    acc = 0.0
    for vid, dets in retained_by_video.items():
        video = videos_by_id[vid]
        for d in dets:
            scored = score_detection(oracle, video, d)
            for s, iou in zip(d.selected, scored.iou_hat):
                if s == 1:
                    total += 1
                    acc += iou
    mean = acc / total if total else 0.0
    return total, mean


def _as_prediction_dataset(round_index, gt, dets_by_video):
    annotations = []
    for vid in sorted(dets_by_video):
        for d in dets_by_video[vid]:
            annotations.append(Annotation(d, SourceTag.PSEUDO))
    return TrainingDataset(round_index, gt.videos, tuple(annotations))


def mean_selected_true_iou(dataset: TrainingDataset, gt: TrainingDataset) -> float:
    """Mean true per-frame IoU over all selected pseudo-label frames.

    Pseudo-tagged annotations on ground-truth videos contribute one sample
    per selected frame; an empty sample set yields 0.
    """
    videos_by_id = gt.videos_by_id()
    by_video = {}
    for a in dataset.annotations:
        if a.source is SourceTag.PSEUDO and a.detection.video_id in videos_by_id:
            by_video.setdefault(a.detection.video_id, []).append(a.detection)
    _, mean = _true_iou_stats(by_video, gt, videos_by_id)
    return mean


def pseudo_predictions(
    dataset: TrainingDataset, gt: TrainingDataset, selected_only: bool = False
) -> TrainingDataset:
    """Pseudo-labels of ``dataset`` as a prediction set over the GT videos.

    Keeps only Pseudo-tagged annotations on the ground-truth videos, ready
    for :func:`evaluate`.  By default the full fused tracks are evaluated;
    ``selected_only`` restricts each track to its selected frames, which
    deliberately trades temporal coverage for per-frame purity.
    """
    gt_vids = set(gt.video_ids())
    annotations = []
    for a in dataset.annotations:
        if a.source is not SourceTag.PSEUDO or a.detection.video_id not in gt_vids:
            continue
        det = restrict_to_selected(a.detection) if selected_only else a.detection
        annotations.append(Annotation(det, SourceTag.PSEUDO))
    return TrainingDataset(dataset.round_index, gt.videos, tuple(annotations))


def run_round(
    state: SimState,
    config: SimConfig,
    scorer,
    out_dir=None,
    threads: int = 1,
):
    """One self-training round: detect, curate, fuse, snapshot.

    Returns the advanced state and the round's report.  The next round's
    fidelity is the baseline (reset to base_fidelity each round when
    ``reset_each_round``, else the current fidelity) plus improvement_gain
    times the mean true IoU of this round's selected labels, capped at 1.
    """
    gt = state.ground_truth
    k = state.round_index + 1
    videos_by_id = gt.videos_by_id()
    vids = sorted(videos_by_id)

    def per_video(vid):
        video = videos_by_id[vid]
        seed = (config.seed, k, vid)
        id_base = k * ROUND_ID_BLOCK + vid * VIDEO_ID_BLOCK
        raw = simulate_detector(
            gt.detections_for(vid), video, config.detector_noise,
            state.fidelity, seed, id_base=id_base,
        )
        retained, n_conf, n_nms = _curate_with_counts(raw, video, scorer, config.curation)
        return vid, raw, retained, n_conf, n_nms

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(per_video, vids))
    else:
        results = [per_video(vid) for vid in vids]

    raw_by_video = {vid: raw for vid, raw, _, _, _ in results}
    retained_by_video = {vid: dets for vid, _, dets, _, _ in results}
    n_raw = sum(len(r) for r in raw_by_video.values())
    n_filtered = sum(n for _, _, _, n, _ in results)
    n_after_nms = sum(n for _, _, _, _, n in results)
    retained_all = [d for vid in vids for d in retained_by_video[vid]]

    raw_preds = _as_prediction_dataset(
        k, gt, {vid: [r.detection for r in raw_by_video[vid]] for vid in vids}
    )
    raw_ap50 = evaluate(raw_preds, gt).ap50

    merged = merge_dataset(state.dataset, retained_all, videos_by_id, config.fusion)
    n_selected, mean_iou = _true_iou_stats(retained_by_video, gt, videos_by_id)

    baseline = config.base_fidelity if config.reset_each_round else state.fidelity
    next_fidelity = min(1.0, baseline + config.improvement_gain * mean_iou)

    snapshot_path = None
    if out_dir is not None:
        snapshot_path = f"round_{k}.json"
        save_dataset(merged, Path(out_dir) / snapshot_path)

    report = RoundReport(
        round_index=k,
        n_raw=n_raw,
        n_filtered=n_filtered,
        n_after_nms=n_after_nms,
        n_retained=len(retained_all),
        n_selected_frames=n_selected,
        mean_true_iou_selected=mean_iou,
        fidelity=state.fidelity,
        raw_ap50=raw_ap50,
        dataset_snapshot_path=snapshot_path,
    )
    next_state = SimState(gt, merged, next_fidelity, k)
    return next_state, report


@dataclass(frozen=True)
class SimResult:
    """Outputs of a full run: per-round reports and both datasets."""

    reports: tuple
    final_dataset: TrainingDataset
    ground_truth: TrainingDataset
    final_eval: EvalReport


def run_self_training(config: SimConfig, out_dir=None, threads: int = 1) -> SimResult:
    """Run the configured number of rounds from a fresh corpus.

    Starts from the synthetic corpus as the round-0 training set, applies
    :func:`run_round` sequentially, and finishes by evaluating the final
    selected pseudo-labels against the hidden ground truth; that report is
    also attached to the last round's entry.  With ``out_dir`` set, writes
    ``round_<k>.json`` snapshots and ``ground_truth.json``.
    """
    gt, synthetic = generate_corpus(
        config.corpus.n_videos,
        config.corpus.frames_per_video,
        config.corpus.objects_per_video,
        (config.corpus.width, config.corpus.height),
        config.seed,
    )
    scorer = make_scorer(config, gt)
    state = SimState(gt, synthetic, config.base_fidelity, 0)
    reports = []
    for _ in range(config.rounds):
        state, report = run_round(state, config, scorer, out_dir=out_dir, threads=threads)
        reports.append(report)
    final_eval = evaluate(pseudo_predictions(state.dataset, gt), gt)
    reports[-1] = replace(reports[-1], final_eval=final_eval.as_dict())
    if out_dir is not None:
        save_dataset(gt, Path(out_dir) / "ground_truth.json")
    return SimResult(tuple(reports), state.dataset, gt, final_eval)
