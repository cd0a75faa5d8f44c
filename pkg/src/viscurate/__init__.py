"""Quality-guided pseudo-label curation for video instance segmentation.

Non-neural core of a self-training loop: mask/RLE primitives, dataset
serialization, confidence filtering and spatiotemporal NMS, quality
scoring and selection, cross-round fusion, batch sampling with DropLoss
gating, class-agnostic AP/AR evaluation, and a seeded end-to-end
simulator.
"""

from .curation import (
    CONFIDENCE_THRESHOLD,
    NMS_IOU_THRESHOLD,
    QUALITY_THRESHOLD,
    CurationConfig,
    curate_video,
    filter_by_confidence,
    max_frame_iou,
    retain,
    select_labels,
    spatiotemporal_nms,
)
from .dataset import (
    Annotation,
    Detection,
    SourceTag,
    TrainingDataset,
    VideoMeta,
    decode_masks,
    dumps_dataset,
    from_json_obj,
    load_dataset,
    restrict_to_selected,
    save_dataset,
    to_json_obj,
    validate_dataset,
    write_text_atomic,
)
from .errors import (
    BothPoolsEmpty,
    CountSumMismatch,
    DimensionMismatch,
    DomainError,
    InvariantViolation,
    LengthMismatch,
    MixedVideoError,
    NoDetections,
    NoOverlap,
    ParseError,
    PipelineError,
    TooFewSamples,
    UnknownVideo,
    VideoMismatch,
    VideoSetMismatch,
)
from .evaluation import (
    AR_MAX_DETECTIONS,
    IOU_THRESHOLDS,
    EvalReport,
    average_precision,
    evaluate,
    match_and_score,
    track_iou,
)
from .fusion import (
    OVERLAP_IOU_THRESHOLD,
    FusionConfig,
    fuse_pair,
    insert_detection,
    merge_dataset,
    merge_video,
    overlaps,
)
from .masks import (
    MEDIUM_MAX_AREA,
    SMALL_MAX_AREA,
    AreaCategory,
    BitMask,
    Rle,
    SoftMask,
    area_category,
    binarize,
    mask_area,
    mask_iou,
    rle_decode,
    rle_encode,
)
from .scoring import (
    BINARIZE_THRESHOLD,
    ConstantScorer,
    NoisyOracleScorer,
    OracleScorer,
    QualityScorer,
    ScoredDetection,
    quality_score,
    score_detection,
    spearman_rank,
)
from .simulate import (
    CorpusConfig,
    DetectorNoise,
    RawDetection,
    RoundReport,
    SimConfig,
    SimResult,
    SimState,
    generate_corpus,
    make_scorer,
    mean_selected_true_iou,
    pseudo_predictions,
    run_round,
    run_self_training,
    sim_config_from_obj,
    sim_config_to_obj,
    simulate_detector,
)
from .train_utils import (
    DROPLOSS_TAU,
    FRAMES_PER_BATCH,
    SYNTHETIC_PROBABILITY,
    DropLossConfig,
    TrainBatchSpec,
    drop_loss_gate,
    eligible_frames,
    pick_source,
    sample_batch,
    sample_frames,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
