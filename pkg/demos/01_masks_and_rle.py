"""Mask primitives: the run-length codec, IoU, and area buckets.

Walks a small mask through encode/decode, shows why the leading
background run matters, and probes the documented boundary behavior of
binarization, IoU, and the COCO-style area categories.
"""

import numpy as np

from viscurate import (
    AreaCategory,
    BitMask,
    SoftMask,
    area_category,
    binarize,
    mask_area,
    mask_iou,
    rle_decode,
    rle_encode,
)


def show(title, value):
    print(f"{title}: {value}")


# A 3x4 mask with an L-shaped object.
bits = np.array(
    [
        [1, 1, 0, 0],
        [1, 0, 0, 0],
        [1, 0, 0, 1],
    ],
    dtype=bool,
)
mask = BitMask(bits)
print("mask (rows):")
for row in bits.astype(int):
    print("   ", "".join(str(v) for v in row))

# The codec scans columns top-to-bottom, left-to-right, and always starts
# with a background run -- zero-length when pixel (0, 0) is foreground, as
# it is here.
rle = rle_encode(mask)
show("counts (column-major, leading background run)", list(rle.counts))
show("size", (rle.height, rle.width))
show("area from runs", rle.area())

back = rle_decode(rle)
show("round-trip exact", bool(np.array_equal(back.bits, bits)))

# Soft masks binarize with a strict > threshold: exactly 0.5 stays
# background.
soft = SoftMask(np.array([[0.49, 0.5], [0.51, 0.9]]))
show("binarize(0.5) of [[.49, .5], [.51, .9]]", binarize(soft, 0.5).bits.astype(int).tolist())

# IoU conventions: empty union gives 0, half-overlapping squares give 1/3.
a = np.zeros((8, 8), dtype=bool)
b = np.zeros((8, 8), dtype=bool)
a[0:4, 0:4] = True
b[0:4, 2:6] = True
show("IoU of two 4x4 squares offset by 2", mask_iou(BitMask(a), BitMask(b)))
empty = BitMask(np.zeros((8, 8), dtype=bool))
show("IoU of two empty masks", mask_iou(empty, empty))

# Area buckets at their exact boundaries.
for area in (1023, 1024, 9215, 9216):
    show(f"area {area}", area_category(area).value)
assert area_category(1023) is AreaCategory.SMALL
assert area_category(9216) is AreaCategory.LARGE
show("mask_area of the L-shape", mask_area(mask))
