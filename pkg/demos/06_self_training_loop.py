"""End-to-end: simulated self-training with quality-guided curation.

Runs the default two-round loop (synthetic corpus, noisy detector,
oracle quality scorer), prints the per-round funnel, and contrasts the
final pseudo-label AP against the raw detector.  Then repeats the run
with confidence-only selection to show why the quality signal matters,
and closes with the rank-correlation diagnostic behind that gap.
"""

import numpy as np

from viscurate import (
    CurationConfig,
    DetectorNoise,
    NoisyOracleScorer,
    OracleScorer,
    SimConfig,
    generate_corpus,
    mean_selected_true_iou,
    run_self_training,
    score_detection,
    simulate_detector,
    spearman_rank,
)

config = SimConfig()  # seed 0, 2 rounds, oracle scorer, mid-noise detector
result = run_self_training(config)

print("round-by-round funnel (raw -> filtered -> NMS -> retained):")
for r in result.reports:
    print(f"  round {r.round_index}: {r.n_raw} -> {r.n_filtered} -> "
          f"{r.n_after_nms} -> {r.n_retained} tracks, "
          f"{r.n_selected_frames} selected frames, "
          f"mean true IoU of selections {r.mean_true_iou_selected:.3f}, "
          f"detector fidelity {r.fidelity:.2f}, raw AP50 {r.raw_ap50:.3f}")

print(f"\nfinal curated pseudo-labels: AP50 {result.final_eval.ap50:.3f} "
      f"(raw detector started at {result.reports[0].raw_ap50:.3f})")

# Same run, but selection by confidence alone (q := s, threshold 0.85).
confidence_only = run_self_training(
    SimConfig(scorer="confidence", curation=CurationConfig(quality_threshold=0.85))
)
q_iou = mean_selected_true_iou(result.final_dataset, result.ground_truth)
c_iou = mean_selected_true_iou(
    confidence_only.final_dataset, confidence_only.ground_truth
)
print(f"\nmean true IoU of selected labels, quality-guided:   {q_iou:.4f}")
print(f"mean true IoU of selected labels, confidence-only:  {c_iou:.4f}")

# Why: per-frame quality tracks the true IoU far better than a per-track
# confidence score does, even when the IoU estimate itself is noisy.
gt, _ = generate_corpus(10, 8, 3, (96, 64), seed=5)
oracle = OracleScorer(gt)
noisy = NoisyOracleScorer(oracle, 0.1, seed=5)
quality, confidence, true_iou = [], [], []
for vid, vmeta in sorted(gt.videos_by_id().items()):
    raw = simulate_detector(
        gt.detections_for(vid), vmeta, DetectorNoise(), 0.5, (5, vid),
        id_base=vid * 1000,
    )
    for r in raw:
        d = r.detection
        est = score_detection(noisy, vmeta, d, soft_masks=r.soft_masks)
        ref = score_detection(oracle, vmeta, d, soft_masks=r.soft_masks)
        for t, m in enumerate(d.masks):
            if m is not None:
                quality.append(est.quality[t])
                confidence.append(d.confidence)
                true_iou.append(ref.iou_hat[t])

print(f"\nSpearman rank correlation with true IoU over {len(quality)} frames:")
print(f"  quality (confidence x noisy IoU estimate): "
      f"{spearman_rank(quality, true_iou):.3f}")
print(f"  confidence alone:                          "
      f"{spearman_rank(confidence, true_iou):.3f}")
