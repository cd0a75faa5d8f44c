"""Acceptance suite: eight headline guarantees, one printed verdict each.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines; every oracle here is coded independently of the library internals
it checks.
"""

import time
from dataclasses import replace

import numpy as np

from viscurate import (
    Annotation,
    BitMask,
    CurationConfig,
    DetectorNoise,
    NoisyOracleScorer,
    OracleScorer,
    SimConfig,
    SourceTag,
    TrainingDataset,
    VideoMeta,
    curate_video,
    drop_loss_gate,
    dumps_dataset,
    eligible_frames,
    evaluate,
    filter_by_confidence,
    fuse_pair,
    generate_corpus,
    mask_iou,
    mean_selected_true_iou,
    merge_dataset,
    rle_decode,
    rle_encode,
    run_self_training,
    score_detection,
    simulate_detector,
    spatiotemporal_nms,
    spearman_rank,
)

from conftest import make_detection, random_bitmask, square_track


def _emit(number, ok, description):
    print(f"[criterion {number}] {'PASS' if ok else 'FAIL'} - {description}")
    assert ok, f"criterion {number}: {description}"


# --- 1. mask/RLE codec and IoU --------------------------------------------

def test_criterion_1_mask_rle_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(101)

    exact = 0
    for packed in range(512):
        grid = np.array([(packed >> k) & 1 for k in range(9)], dtype=bool).reshape(3, 3)
        back = rle_decode(rle_encode(BitMask(grid)))
        exact += bool(np.array_equal(back.bits, grid))

    for _ in range(10_000):
        grid = rng.random((16, 16)) < rng.random()
        back = rle_decode(rle_encode(BitMask(grid)))
        exact += bool(np.array_equal(back.bits, grid))

    iou_exact = 0
    for _ in range(10_000):
        a = rng.random((16, 16)) < rng.random()
        b = rng.random((16, 16)) < rng.random()
        got = mask_iou(BitMask(a), BitMask(b))
        # oracle: intersection by elementwise product, union by
        # inclusion-exclusion -- no boolean operators shared with the library
        inter = int((a.astype(np.int64) * b.astype(np.int64)).sum())
        union = int(a.sum()) + int(b.sum()) - inter
        want = inter / union if union else 0.0
        iou_exact += got == want

    elapsed = time.perf_counter() - start
    _emit(
        1,
        exact == 10_512 and iou_exact == 10_000 and elapsed < 5.0,
        f"RLE round-trip {exact}/10512 exact, IoU oracle {iou_exact}/10000 exact, "
        f"{elapsed:.1f}s (< 5s)",
    )


# --- 2. spatiotemporal NMS vs quadratic reference --------------------------

def _nms_reference(detections, threshold):
    """Independent O(n^2 T) suppression: precompute every pairwise clash,
    then scan in priority order keeping tracks with no kept suppressor."""
    order = sorted(detections, key=lambda d: (-d.confidence, d.detection_id))
    grids = [
        [None if m is None else rle_decode(m).bits for m in d.masks] for d in order
    ]

    def clash(i, j):
        for a, b in zip(grids[i], grids[j]):
            if a is None or b is None:
                continue
            inter = int((a & b).sum())
            union = int(a.sum()) + int(b.sum()) - inter
            if union and inter / union >= threshold:
                return True
        return False

    kept = []
    for i in range(len(order)):
        if not any(clash(i, j) for j in kept):
            kept.append(i)
    return [order[i] for i in kept]


def test_criterion_2_nms_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    agree = idempotent = 0
    n_videos = 500
    for _ in range(n_videos):
        dets = []
        for i in range(int(rng.integers(1, 11))):
            masks = [
                random_bitmask(rng, 8, 8, p=0.45) if rng.random() > 0.25 else None
                for _ in range(3)
            ]
            if all(m is None for m in masks):
                masks[0] = random_bitmask(rng, 8, 8, p=0.45)
            dets.append(make_detection(i + 1, 1, float(rng.random()), masks))
        got = spatiotemporal_nms(dets, 0.5)
        want = _nms_reference(dets, 0.5)
        agree += {d.detection_id for d in got} == {d.detection_id for d in want}
        idempotent += spatiotemporal_nms(got, 0.5) == got
    elapsed = time.perf_counter() - start
    _emit(
        2,
        agree == n_videos and idempotent == n_videos and elapsed < 10.0,
        f"reference agreement {agree}/{n_videos}, idempotence {idempotent}/{n_videos}, "
        f"{elapsed:.1f}s (< 10s)",
    )


# --- 3. selection soundness and threshold nesting --------------------------

def _pure_track_iou(det, gt_det):
    inter = union = 0
    for mp, mg in zip(det.masks, gt_det.masks):
        a = rle_decode(mp).bits if mp is not None else None
        b = rle_decode(mg).bits if mg is not None else None
        if a is None and b is None:
            continue
        if a is None:
            union += int(b.sum())
        elif b is None:
            union += int(a.sum())
        else:
            i = int((a.astype(np.int64) * b.astype(np.int64)).sum())
            inter += i
            union += int(a.sum()) + int(b.sum()) - i
    return inter / union if union else 0.0


def _pure_best_match(det, gt_dets):
    return max(gt_dets, key=lambda g: (_pure_track_iou(det, g), -g.detection_id))


def _pure_frame_iou(det, gt_det, t):
    if det.masks[t] is None or gt_det.masks[t] is None:
        return 0.0
    a = rle_decode(det.masks[t]).bits
    b = rle_decode(gt_det.masks[t]).bits
    inter = int((a.astype(np.int64) * b.astype(np.int64)).sum())
    union = int(a.sum()) + int(b.sum()) - inter
    return inter / union if union else 0.0


def test_criterion_3_selection_soundness_and_nesting():
    gt, _ = generate_corpus(6, 8, 3, (96, 64), seed=11)
    oracle = OracleScorer(gt)
    config = CurationConfig()  # quality threshold 0.75
    noise = DetectorNoise()

    sound = total_selected = 0
    scored_pool = []  # (pool_key, ScoredDetection)
    for pool_key, fidelity in enumerate((0.5, 0.75)):
        for vid, vmeta in sorted(gt.videos_by_id().items()):
            raw = simulate_detector(
                gt.detections_for(vid), vmeta, noise, fidelity,
                (11, pool_key, vid), id_base=(pool_key + 1) * 100_000 + vid * 1000,
            )
            dets = [r.detection for r in raw]
            soft = {r.detection.detection_id: r.soft_masks for r in raw}
            retained = curate_video(
                dets, vmeta, oracle, config,
                soft_masks_by_id=soft,
            )
            gt_dets = gt.detections_for(vid)
            for d in retained:
                match = _pure_best_match(d, gt_dets)
                for t, s in enumerate(d.selected):
                    if s == 1:
                        total_selected += 1
                        sound += _pure_frame_iou(d, match, t) >= 0.75
            survivors = spatiotemporal_nms(
                filter_by_confidence(dets, config.confidence_threshold),
                config.nms_iou_threshold,
            )
            for d in survivors:
                scored_pool.append(
                    (
                        pool_key,
                        score_detection(oracle, vmeta, d, soft_masks=soft[d.detection_id]),
                    )
                )

    grid = (0.5, 0.75, 0.85, 0.95)
    sets = {}
    for tau in grid:
        sets[tau] = {
            (key, sd.detection.detection_id, t)
            for key, sd in scored_pool
            for t, q in enumerate(sd.quality)
            if sd.detection.masks[t] is not None and q >= tau
        }
    strictly_nested = all(sets[hi] < sets[lo] for lo, hi in zip(grid, grid[1:]))

    _emit(
        3,
        total_selected > 0 and sound == total_selected and strictly_nested,
        f"true IoU >= 0.75 on {sound}/{total_selected} selected frames, "
        f"selected sets strictly nested over tau={grid} "
        f"(sizes {[len(sets[t]) for t in grid]})",
    )


# --- 4. fusion algebra ------------------------------------------------------

def _random_mini_dataset(rng, round_index=1):
    n_videos = int(rng.integers(1, 4))
    videos = []
    annotations = []
    det_id = 1
    for v in range(1, n_videos + 1):
        videos.append(VideoMeta(v, 3, 16, 10))
        for _ in range(int(rng.integers(1, 4))):
            sel = [int(b) for b in rng.integers(0, 2, size=3)]
            sel[int(rng.integers(3))] = 1
            det = square_track(
                det_id, v, float(rng.random()), 3, 10, 16,
                int(rng.integers(0, 6)), int(rng.integers(0, 12)), 4,
                selected=tuple(sel),
            )
            tag = SourceTag.SYNTHETIC if rng.random() < 0.3 else SourceTag.PSEUDO
            annotations.append(Annotation(det, tag))
            det_id += 1
    return TrainingDataset(round_index, tuple(videos), tuple(annotations))


def test_criterion_4_fusion_algebra():
    rng = np.random.default_rng(404)

    base_new = square_track(10, 1, 0.9, 4, 10, 16, 0, 1, 4)
    base_exist = square_track(3, 1, 0.6, 4, 10, 16, 0, 0, 4)
    max_ok = 0
    for _ in range(10_000):
        sn = tuple(int(b) for b in rng.integers(0, 2, size=4))
        se = tuple(int(b) for b in rng.integers(0, 2, size=4))
        fused = fuse_pair(replace(base_new, selected=sn), replace(base_exist, selected=se))
        max_ok += fused.selected == tuple(map(max, sn, se))

    union_ok = 0
    for _ in range(100):
        current = _random_mini_dataset(rng)
        catalog = {}
        retained = []
        rid = 1000
        for _ in range(int(rng.integers(0, 5))):
            vid = int(rng.integers(1, 7))
            if vid not in current.video_ids():
                catalog[vid] = VideoMeta(vid, 3, 16, 10)
            sel = [int(b) for b in rng.integers(0, 2, size=3)]
            sel[int(rng.integers(3))] = 1
            retained.append(
                square_track(
                    rid, vid, float(rng.random()), 3, 10, 16,
                    int(rng.integers(0, 6)), int(rng.integers(0, 12)), 4,
                    selected=tuple(sel),
                )
            )
            rid += 1
        merged = merge_dataset(current, retained, catalog)
        want = current.video_ids() | {d.video_id for d in retained}
        union_ok += merged.video_ids() == want

    idempotent_ok = 0
    for _ in range(50):
        ds = _random_mini_dataset(rng)
        pseudo = [a.detection for a in ds.annotations if a.source is SourceTag.PSEUDO]
        merged = merge_dataset(ds, pseudo, {})
        ok = len(merged.annotations) == len(ds.annotations)
        for v in ds.video_ids():
            olds = [
                a.detection for a in ds.annotations_for(v)
                if a.source is SourceTag.PSEUDO
            ]
            news = [
                a.detection for a in merged.annotations_for(v)
                if a.source is SourceTag.PSEUDO
            ]
            ok = ok and len(olds) == len(news)
            for old, new in zip(olds, news):
                ok = ok and new.selected == old.selected and new.masks == old.masks
        idempotent_ok += ok

    _emit(
        4,
        max_ok == 10_000 and union_ok == 100 and idempotent_ok == 50,
        f"selected=max on {max_ok}/10000 flag pairs, video-id union on "
        f"{union_ok}/100 merges, self-merge idempotent on {idempotent_ok}/50 datasets",
    )


# --- 5. eligibility and DropLoss -------------------------------------------

def test_criterion_5_eligibility_and_droploss():
    rng = np.random.default_rng(505)

    elig_ok = 0
    for _ in range(1000):
        n_frames = int(rng.integers(1, 8))
        dets = []
        for i in range(int(rng.integers(1, 5))):
            sel = [int(b) for b in rng.integers(0, 2, size=n_frames)]
            masks = [random_bitmask(rng, 5, 5, 0.5) if s else None for s in sel]
            dets.append(make_detection(i + 1, 1, 0.5, masks, selected=tuple(sel)))
        want = set()
        for t in range(n_frames):
            if all(d.selected[t] == 1 for d in dets):
                want.add(t)
        elig_ok += eligible_frames(dets) == want

    drop_ok = 0
    for _ in range(1000):
        n_pred = int(rng.integers(1, 5))
        n_gt = int(rng.integers(0, 4))
        preds = [random_bitmask(rng, 6, 6, 0.35) for _ in range(n_pred)]
        gts = [random_bitmask(rng, 6, 6, 0.35) for _ in range(n_gt)]
        losses = [float(v) for v in rng.random(n_pred)]
        got = drop_loss_gate(preds, gts, losses)
        want = []
        for p, loss in zip(preds, losses):
            best = 0.0
            for g in gts:
                inter = int((p.bits.astype(np.int64) * g.bits.astype(np.int64)).sum())
                union = int(p.bits.sum()) + int(g.bits.sum()) - inter
                if union:
                    best = max(best, inter / union)
            want.append(loss if best > 0.01 else 0.0)
        drop_ok += got == want

    # boundary: 1 foreground pixel inside a 100-pixel object is IoU 0.01 exactly
    gt_full = BitMask(np.ones((10, 10), dtype=bool))
    one_px = np.zeros((10, 10), dtype=bool)
    one_px[0, 0] = True
    at_boundary = drop_loss_gate([BitMask(one_px)], [gt_full], [7.0]) == [0.0]
    two_px = one_px.copy()
    two_px[0, 1] = True
    above = drop_loss_gate([BitMask(two_px)], [gt_full], [7.0]) == [7.0]

    _emit(
        5,
        elig_ok == 1000 and drop_ok == 1000 and at_boundary and above,
        f"eligibility forall-scan {elig_ok}/1000, DropLoss oracle {drop_ok}/1000, "
        f"IoU=0.01 gates to zero: {at_boundary}, IoU=0.02 passes: {above}",
    )


# --- 6. evaluator: identity and brute-force AP ------------------------------

def _random_eval_dataset(rng, max_tracks=6, videos_count=2):
    videos = tuple(
        VideoMeta(v, 4, 16, 12) for v in range(1, videos_count + 1)
    )
    annotations = []
    det_id = 1
    for v in range(1, videos_count + 1):
        for _ in range(int(rng.integers(1, max_tracks + 1))):
            # drift stays on-grid: x0 + 3*dx remains within [0, width - size]
            det = square_track(
                det_id, v, float(rng.random()), 4, 12, 16,
                int(rng.integers(0, 8)), int(rng.integers(3, 10)), 4,
                dx=int(rng.integers(-1, 2)),
            )
            # random absent frames, at least one present
            masks = list(det.masks)
            for t in range(4):
                if rng.random() < 0.25:
                    masks[t] = None
            if all(m is None for m in masks):
                masks[0] = det.masks[0]
            annotations.append(
                Annotation(replace(det, masks=tuple(masks)), SourceTag.GROUND_TRUTH)
            )
            det_id += 1
    return TrainingDataset(0, videos, tuple(annotations))


def _brute_force_metrics(preds_by_video, gts_by_video, h, w):
    """Pure-Python AP/AR: per-pixel loops, greedy matching, 101-point scan."""

    def grids(det):
        return [
            None if m is None else rle_decode(m).bits for m in det.masks
        ]

    def tiou(p, g):
        gp, gg = grids(p), grids(g)
        inter = union = 0
        for a, b in zip(gp, gg):
            for y in range(h):
                for x in range(w):
                    pa = bool(a[y, x]) if a is not None else False
                    pb = bool(b[y, x]) if b is not None else False
                    inter += pa and pb
                    union += pa or pb
        return inter / union if union else 0.0

    thresholds = [i / 100 for i in range(50, 100, 5)]
    n_gt = sum(len(v) for v in gts_by_video.values())
    ap_at = []
    rec_at = []
    for thr in thresholds:
        pooled = []
        matched = 0
        for vid in sorted(gts_by_video):
            vp = sorted(preds_by_video[vid], key=lambda d: (-d.confidence, d.detection_id))
            vg = list(gts_by_video[vid])
            taken = [False] * len(vg)
            for p in vp:
                best_j, best = -1, 0.0
                for j, g in enumerate(vg):
                    if taken[j]:
                        continue
                    value = tiou(p, g)
                    if value >= thr and value > best:
                        best, best_j = value, j
                if best_j >= 0:
                    taken[best_j] = True
                    matched += 1
                pooled.append((p.confidence, p.detection_id, best_j >= 0))
        pooled.sort(key=lambda r: (-r[0], r[1]))
        flags = [tp for _, _, tp in pooled]
        if n_gt == 0:
            ap_at.append(1.0 if not flags else 0.0)
            rec_at.append(1.0)
            continue
        rec_at.append(matched / n_gt)
        if not flags:
            ap_at.append(0.0)
            continue
        curve = []
        tp = 0
        for rank, f in enumerate(flags, start=1):
            tp += f
            curve.append((tp / n_gt, tp / rank))
        total = 0.0
        for k in range(101):
            r = k / 100
            total += max((p for rec, p in curve if rec >= r), default=0.0)
        ap_at.append(total / 101)
    return {
        "ap50": ap_at[0],
        "ap75": ap_at[5],
        "ap": sum(ap_at) / len(ap_at),
        "ar10": sum(rec_at) / len(rec_at),
    }


def test_criterion_6_evaluator():
    rng = np.random.default_rng(606)

    identity_ok = 0
    for _ in range(20):
        ds = _random_eval_dataset(rng)
        report = evaluate(ds, ds)
        identity_ok += all(v == 1.0 for v in report.as_dict().values())

    brute_ok = 0
    n_toys = 200
    for _ in range(n_toys):
        vid = VideoMeta(1, 2, 7, 6)
        def toy_tracks(n, start_id, confidences):
            out = []
            for i in range(n):
                masks = [
                    random_bitmask(rng, 6, 7, 0.45) if rng.random() > 0.25 else None
                    for _ in range(2)
                ]
                if all(m is None for m in masks):
                    masks[0] = random_bitmask(rng, 6, 7, 0.45)
                out.append(
                    make_detection(start_id + i, 1, confidences[i], masks)
                )
            return out
        n_p, n_g = int(rng.integers(0, 4)), int(rng.integers(0, 4))
        preds = toy_tracks(n_p, 1, [float(c) for c in rng.random(n_p)])
        gts = toy_tracks(n_g, 100, [1.0] * n_g)
        pred_ds = TrainingDataset(
            0, (vid,), tuple(Annotation(d, SourceTag.PSEUDO) for d in preds)
        )
        gt_ds = TrainingDataset(
            0, (vid,), tuple(Annotation(d, SourceTag.GROUND_TRUTH) for d in gts)
        )
        got = evaluate(pred_ds, gt_ds).as_dict()
        want = _brute_force_metrics({1: preds}, {1: gts}, 6, 7)
        brute_ok += all(abs(got[k] - want[k]) <= 1e-9 for k in want)

    _emit(
        6,
        identity_ok == 20 and brute_ok == n_toys,
        f"evaluate(x, x) all-ones on {identity_ok}/20 datasets, brute-force AP "
        f"agreement within 1e-9 on {brute_ok}/{n_toys} toy cases",
    )


# --- 7. end-to-end self-training regression ---------------------------------

def test_criterion_7_self_training_regression():
    start = time.perf_counter()
    config = SimConfig()  # canonical: 2 rounds, oracle scorer, seed 0

    quality_run = run_self_training(config)
    raw_ap50 = quality_run.reports[0].raw_ap50
    final_ap50 = quality_run.final_eval.ap50
    ap_improves = final_ap50 > raw_ap50

    confidence_config = SimConfig(
        scorer="confidence",
        curation=CurationConfig(quality_threshold=0.85),
    )
    confidence_run = run_self_training(confidence_config)
    q_iou = mean_selected_true_iou(quality_run.final_dataset, quality_run.ground_truth)
    c_iou = mean_selected_true_iou(
        confidence_run.final_dataset, confidence_run.ground_truth
    )
    quality_wins = q_iou > c_iou

    rerun = run_self_training(config)
    deterministic = rerun.reports == quality_run.reports and dumps_dataset(
        rerun.final_dataset
    ) == dumps_dataset(quality_run.final_dataset)

    elapsed = time.perf_counter() - start
    _emit(
        7,
        ap_improves and quality_wins and deterministic and elapsed < 60.0,
        f"final AP50 {final_ap50:.3f} > raw AP50 {raw_ap50:.3f}; quality-selected "
        f"true IoU {q_iou:.4f} > confidence-selected {c_iou:.4f}; deterministic "
        f"rerun: {deterministic}; {elapsed:.1f}s (< 60s)",
    )


# --- 8. Spearman rank diagnostic --------------------------------------------

def test_criterion_8_spearman_diagnostic():
    gt, _ = generate_corpus(10, 8, 3, (96, 64), seed=5)
    oracle = OracleScorer(gt)
    noisy = NoisyOracleScorer(OracleScorer(gt), 0.1, seed=5)
    noise = DetectorNoise()  # confidence noise uniform(+-0.1)

    quality = []
    confidence = []
    true_iou = []
    dets_by_video = {}
    for vid, vmeta in sorted(gt.videos_by_id().items()):
        raw = simulate_detector(
            gt.detections_for(vid), vmeta, noise, 0.5, (5, vid), id_base=vid * 1000
        )
        dets_by_video[vid] = [r.detection for r in raw]
        for r in raw:
            d = r.detection
            noisy_scored = score_detection(noisy, vmeta, d, soft_masks=r.soft_masks)
            true_scored = score_detection(oracle, vmeta, d, soft_masks=r.soft_masks)
            for t, m in enumerate(d.masks):
                if m is None:
                    continue
                quality.append(noisy_scored.quality[t])
                confidence.append(d.confidence)
                true_iou.append(true_scored.iou_hat[t])

    rho_quality = spearman_rank(quality, true_iou)
    rho_confidence = spearman_rank(confidence, true_iou)
    ranks_better = rho_quality > rho_confidence

    # sigma = 0 with confidence pinned to 1: quality equals the true IoU,
    # so the rank correlation is exactly 1
    exact = NoisyOracleScorer(OracleScorer(gt), 0.0, seed=5)
    q0 = []
    t0 = []
    for vid, vmeta in sorted(gt.videos_by_id().items()):
        for d in dets_by_video[vid]:
            pinned = replace(d, confidence=1.0)
            scored = score_detection(exact, vmeta, pinned)
            truth = score_detection(oracle, vmeta, pinned)
            for t, m in enumerate(pinned.masks):
                if m is not None:
                    q0.append(scored.quality[t])
                    t0.append(truth.iou_hat[t])
    distinct = len(set(t0)) >= 2
    rho_exact = spearman_rank(q0, t0)

    _emit(
        8,
        ranks_better and distinct and rho_exact == 1.0,
        f"rho(quality, true IoU) {rho_quality:.4f} > rho(confidence, true IoU) "
        f"{rho_confidence:.4f} over {len(quality)} frames; sigma=0 rho = {rho_exact} "
        f"(exactly 1.0 on {len(set(t0))} distinct IoU values)",
    )
