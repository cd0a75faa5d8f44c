"""Training-side utilities: eligible frames, batch sampling, DropLoss.

Shows how frame eligibility is the AND over a video's selected flags, how
three-frame batches are drawn reproducibly from a mixed synthetic/pseudo
dataset, and how the DropLoss gate zeroes the loss of predictions that
touch no ground-truth object.
"""

import numpy as np

from viscurate import (
    BitMask,
    SimConfig,
    drop_loss_gate,
    eligible_frames,
    run_self_training,
    sample_batch,
    sample_frames,
)

# Eligibility: every detection of the video must carry a selected label in
# the frame.  Two tracks selected on {0,1,2,4} and {0,2,3,4} leave {0,2,4}.
from viscurate import Detection, rle_encode

blob = rle_encode(BitMask(np.ones((4, 4), dtype=bool)))
a = Detection(1, 1, 0.9, (blob,) * 5, (1, 1, 1, 0, 1))
b = Detection(2, 1, 0.8, (blob,) * 5, (1, 0, 1, 1, 1))
eligible = eligible_frames([a, b])
print("eligible frames:", sorted(eligible))
print("3-subset drawn twice with the same seed:",
      sample_frames(eligible, 42), sample_frames(eligible, 42))
print("fewer than three eligible -> skipped:", sample_frames({0, 4}, 42))

# Batches from a real self-training output: source alternates between the
# synthetic corpus and curated pseudo-labels, roughly 50/50.
result = run_self_training(SimConfig(rounds=1))
rng = np.random.default_rng(5)
print("\nsix draws from the round-1 training set:")
for _ in range(6):
    batch = sample_batch(result.final_dataset, rng)
    if batch is None:
        print("  (video skipped: too few eligible frames)")
        continue
    print(f"  video {batch.video_id} frames {batch.frame_indices} "
          f"source {batch.source.value}")

# DropLoss: predictions whose best IoU against every ground-truth mask is
# <= tau contribute nothing.  tau = 0.01, strictly exceeded or dropped.
h = w = 10
gt = np.zeros((h, w), dtype=bool)
gt[:, :5] = True  # a 50-pixel object on the left half

on_target = np.zeros((h, w), dtype=bool)
on_target[2:6, 1:4] = True
grazing = np.zeros((h, w), dtype=bool)
grazing[0, 4] = True  # 1 px overlap, union 50 -> IoU 0.02
background = np.zeros((h, w), dtype=bool)
background[2:6, 6:9] = True  # right half, no overlap

preds = [BitMask(on_target), BitMask(grazing), BitMask(background)]
losses = [1.7, 2.0, 3.1]
gated = drop_loss_gate(preds, [BitMask(gt)], losses)
print("\nlosses before the gate:", losses)
print("losses after the gate: ", gated)
print("no ground truth at all drops everything:",
      drop_loss_gate(preds, [], losses))
