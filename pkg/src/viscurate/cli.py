"""Command-line entry point for the curation pipeline and simulator.

One executable, six subcommands: ``curate`` raw detections into retained
pseudo-labels, ``fuse`` them into a training dataset, ``sample`` training
batches, ``evaluate`` predictions against ground truth, ``simulate`` the
full multi-round loop, and ``validate`` a dataset file.  Every randomized
command takes an explicit --seed and is bit-reproducible; outputs are
written atomically (temp file + rename), so failures never leave partial
files behind.

Exit codes: 0 success, 1 domain error (stderr names the violated
invariant), 2 usage error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .curation import (
    CONFIDENCE_THRESHOLD,
    NMS_IOU_THRESHOLD,
    QUALITY_THRESHOLD,
    CurationConfig,
    curate_video,
)
from .dataset import (
    Annotation,
    SourceTag,
    TrainingDataset,
    dumps_dataset,
    load_dataset,
    save_dataset,
    write_text_atomic,
)
from .errors import DomainError, PipelineError
from .evaluation import evaluate
from .fusion import OVERLAP_IOU_THRESHOLD, FusionConfig, merge_dataset
from .scoring import ConstantScorer, NoisyOracleScorer, OracleScorer
from .simulate import SimConfig, run_self_training, sim_config_from_obj, sim_config_to_obj
from .train_utils import DROPLOSS_TAU, sample_batch

_DESCRIPTION = (
    "Quality-guided pseudo-label curation for video instance segmentation. "
    "Canonical operating point: confidence cutoff %.2f, NMS IoU %.2f, "
    "quality threshold %.2f, DropLoss tau %.2f, 2 self-training rounds, "
    "50%%/50%% synthetic/pseudo batch mix."
    % (CONFIDENCE_THRESHOLD, NMS_IOU_THRESHOLD, QUALITY_THRESHOLD, DROPLOSS_TAU)
)


def _dump_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _make_cli_scorer(name, gt, seed):
    if name == "oracle":
        return OracleScorer(gt)
    if name == "confidence":
        return ConstantScorer(1.0)
    if name.startswith("noisy:"):
        try:
            sigma = float(name.split(":", 1)[1])
        except ValueError:
            raise DomainError(f"bad scorer sigma in {name!r}") from None
        if seed is None:
            raise DomainError("--seed is required with the noisy scorer")
        return NoisyOracleScorer(OracleScorer(gt), sigma, seed)
    raise DomainError(f"unknown scorer {name!r}; use oracle, noisy:<sigma>, or confidence")


def _cmd_curate(args) -> int:
    raw = load_dataset(args.raw)
    gt = load_dataset(args.gt_for_oracle)
    scorer = _make_cli_scorer(args.scorer, gt, args.seed)
    config = CurationConfig(args.conf_min, args.nms_iou, args.tau)
    videos_by_id = raw.videos_by_id()
    annotations = []
    for vid in sorted(videos_by_id):
        dets = raw.detections_for(vid)
        if not dets:
            continue
        for d in curate_video(dets, videos_by_id[vid], scorer, config):
            annotations.append(Annotation(d, SourceTag.PSEUDO))
    out = TrainingDataset(raw.round_index, raw.videos, tuple(annotations))
    save_dataset(out, args.out)
    print(f"retained {len(annotations)} of {len(raw.annotations)} detections -> {args.out}")
    return 0


def _cmd_fuse(args) -> int:
    current = load_dataset(args.dataset)
    retained_ds = load_dataset(args.retained)
    retained = [a.detection for a in retained_ds.annotations]
    catalog = retained_ds.videos_by_id()
    merged = merge_dataset(current, retained, catalog, FusionConfig(args.overlap_iou))
    save_dataset(merged, args.out)
    print(
        f"merged {len(retained)} retained detections into round "
        f"{merged.round_index} dataset ({len(merged.annotations)} annotations) -> {args.out}"
    )
    return 0


def _cmd_sample(args) -> int:
    dataset = load_dataset(args.dataset)
    rng = np.random.default_rng(args.seed)
    lines = []
    skipped = 0
    for _ in range(args.n_batches):
        batch = sample_batch(dataset, rng)
        if batch is None:
            skipped += 1
            continue
        lines.append(
            _dump_canonical(
                {
                    "video_id": batch.video_id,
                    "frames": list(batch.frame_indices),
                    "source": batch.source.value,
                }
            )
        )
    manifest = "".join(lines)
    if args.out is not None:
        write_text_atomic(Path(args.out), manifest)
    else:
        sys.stdout.write(manifest)
    print(f"emitted {len(lines)} batches, skipped {skipped}", file=sys.stderr)
    return 0


def _cmd_evaluate(args) -> int:
    pred = load_dataset(args.pred)
    gt = load_dataset(args.gt)
    report = evaluate(pred, gt)
    metrics = report.as_dict()
    print(_dump_canonical(metrics), end="")
    for name in ("ap", "ap50", "ap75", "ap_small", "ap_medium", "ap_large", "ar10"):
        print(f"{name:>10}  {metrics[name]:8.4f}")
    return 0


def _cmd_simulate(args) -> int:
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = sim_config_from_obj(json.load(fh))
    else:
        config = SimConfig()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run_self_training(config, out_dir=out_dir, threads=args.threads)
    report_obj = {
        "config": sim_config_to_obj(config),
        "rounds": [r.as_dict() for r in result.reports],
    }
    write_text_atomic(out_dir / "report.json", _dump_canonical(report_obj))
    for r in result.reports:
        print(
            f"round {r.round_index}: raw {r.n_raw} -> filtered {r.n_filtered} "
            f"-> nms {r.n_after_nms} -> retained {r.n_retained} "
            f"(mean true IoU of selected {r.mean_true_iou_selected:.3f}, "
            f"fidelity {r.fidelity:.3f})"
        )
    print(f"final AP50 vs hidden ground truth: {result.final_eval.ap50:.4f}")
    print(f"report -> {out_dir / 'report.json'}")
    return 0


def _cmd_validate(args) -> int:
    dataset = load_dataset(args.dataset)
    print(
        f"OK: round {dataset.round_index}, {len(dataset.videos)} videos, "
        f"{len(dataset.annotations)} annotations"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="viscurate", description=_DESCRIPTION)
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser(
        "curate", formatter_class=fmt,
        help="filter, suppress, and quality-select raw detections",
    )
    p.add_argument("--raw", required=True, help="raw detections dataset JSON")
    p.add_argument("--gt-for-oracle", required=True, help="ground-truth dataset JSON for the oracle scorer")
    p.add_argument("--scorer", default="oracle", help="oracle | noisy:<sigma> | confidence")
    p.add_argument("--conf-min", type=float, default=CONFIDENCE_THRESHOLD, help="confidence cutoff")
    p.add_argument("--nms-iou", type=float, default=NMS_IOU_THRESHOLD, help="NMS suppression IoU")
    p.add_argument("--tau", type=float, default=QUALITY_THRESHOLD, help="quality selection threshold")
    p.add_argument("--seed", type=int, default=None, help="seed (required for noisy scorer)")
    p.add_argument("--out", required=True, help="output dataset JSON of retained detections")
    p.set_defaults(func=_cmd_curate)

    p = sub.add_parser(
        "fuse", formatter_class=fmt,
        help="merge retained detections into a training dataset",
    )
    p.add_argument("--dataset", required=True, help="current training dataset JSON")
    p.add_argument("--retained", required=True, help="retained detections dataset JSON")
    p.add_argument("--overlap-iou", type=float, default=OVERLAP_IOU_THRESHOLD, help="track overlap IoU")
    p.add_argument("--out", required=True, help="output dataset JSON for the next round")
    p.set_defaults(func=_cmd_fuse)

    p = sub.add_parser(
        "sample", formatter_class=fmt,
        help="draw training batches as a JSON-lines manifest",
    )
    p.add_argument("--dataset", required=True, help="training dataset JSON")
    p.add_argument("--seed", type=int, required=True, help="sampling seed")
    p.add_argument("--n-batches", type=int, default=10, help="batch draws to attempt")
    p.add_argument("--out", default=None, help="manifest path (default: stdout)")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser(
        "evaluate", formatter_class=fmt,
        help="class-agnostic AP/AR of predictions vs ground truth",
    )
    p.add_argument("--pred", required=True, help="prediction dataset JSON")
    p.add_argument("--gt", required=True, help="ground-truth dataset JSON")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser(
        "simulate", formatter_class=fmt,
        help="run the seeded multi-round self-training simulation",
    )
    p.add_argument("--config", default=None, help="SimConfig JSON (default: canonical configuration)")
    p.add_argument("--out", default="sim_out", help="output directory for snapshots and report")
    p.add_argument("--threads", type=int, default=1, help="worker threads (same bytes for any N)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser(
        "validate", formatter_class=fmt,
        help="check a dataset JSON against all structural invariants",
    )
    p.add_argument("--dataset", required=True, help="dataset JSON to check")
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"IOError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
