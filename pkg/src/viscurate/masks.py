"""Frame-level mask primitives: binary/soft masks, RLE codec, IoU, areas.

Conventions fixed here and relied on everywhere else:

* RLE is column-major (top-to-bottom, then left-to-right) with a mandatory
  leading background run, which may be 0 when the mask starts with
  foreground.  This is the uncompressed COCO convention, so encoded masks
  interoperate bit-exactly with existing VIS tooling.
* Binarization is strict: a pixel is foreground iff its soft value is
  greater than the threshold.
* The IoU of two empty masks is 0, never NaN.  An absent object must not
  count as a match anywhere downstream.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import CountSumMismatch, DimensionMismatch, DomainError

# COCO object-size boundaries (areas in pixels).
SMALL_MAX_AREA = 32**2
MEDIUM_MAX_AREA = 96**2


class AreaCategory(enum.Enum):
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"


@dataclass(frozen=True, eq=False)
class BitMask:
    """One frame's binary mask for one object.

    The pixel grid is copied and made read-only on construction, so a
    BitMask is an immutable value that is safe to share across threads.
    """

    bits: np.ndarray

    def __post_init__(self):
        bits = np.array(self.bits, dtype=bool)
        if bits.ndim != 2:
            raise DimensionMismatch(f"mask must be 2-D, got shape {bits.shape}")
        if bits.shape[0] < 1 or bits.shape[1] < 1:
            raise DomainError(f"mask dimensions must be positive, got {bits.shape}")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def __eq__(self, other):
        if not isinstance(other, BitMask):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(
            np.array_equal(self.bits, other.bits)
        )

    def __repr__(self):
        return f"BitMask({self.height}x{self.width}, area={int(self.bits.sum())})"


@dataclass(frozen=True, eq=False)
class SoftMask:
    """One frame's raw (unbinarized) mask with per-pixel values in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DimensionMismatch(f"mask must be 2-D, got shape {values.shape}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise DomainError(f"mask dimensions must be positive, got {values.shape}")
        if values.min() < 0.0 or values.max() > 1.0:
            raise DomainError("soft mask values must lie in [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other):
        if not isinstance(other, SoftMask):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True)
class Rle:
    """Column-major run-length encoding of a binary mask.

    ``counts`` alternate background/foreground starting with background;
    the first count may be 0.  The constructor enforces the sum invariant,
    so a constructed Rle always decodes.
    """

    height: int
    width: int
    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if self.height < 1 or self.width < 1:
            raise DomainError(f"Rle dimensions must be positive, got {self.height}x{self.width}")
        if any(c < 0 for c in counts):
            raise DomainError("Rle counts must be non-negative")
        total = sum(counts)
        if total != self.height * self.width:
            raise CountSumMismatch(
                f"counts sum to {total}, expected {self.height * self.width} "
                f"for a {self.height}x{self.width} mask"
            )

    def area(self) -> int:
        """Number of foreground pixels, straight off the odd-index runs."""
        return sum(self.counts[1::2])


def binarize(mask: SoftMask, threshold: float) -> BitMask:
    """Threshold a soft mask; a pixel is set iff its value is > threshold."""
    if not 0.0 < threshold < 1.0:
        raise DomainError(f"threshold must lie strictly in (0, 1), got {threshold}")
    return BitMask(mask.values > threshold)


def rle_encode(mask: BitMask) -> Rle:
    """Encode a binary mask as column-major alternating run lengths."""
    flat = mask.bits.ravel(order="F")
    n = flat.size
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    boundaries = np.concatenate(([0], change, [n]))
    counts = np.diff(boundaries)
    if flat[0]:
        counts = np.concatenate(([0], counts))
    return Rle(mask.height, mask.width, tuple(int(c) for c in counts))


def rle_decode(rle: Rle) -> BitMask:
    """Decode run lengths back to a binary mask (inverse of rle_encode)."""
    values = np.zeros(len(rle.counts), dtype=bool)
    values[1::2] = True
    flat = np.repeat(values, np.asarray(rle.counts, dtype=np.int64))
    return BitMask(flat.reshape((rle.height, rle.width), order="F"))


def mask_iou(a: BitMask, b: BitMask) -> float:
    """Intersection over union of two binary masks; 0 when the union is empty."""
    if a.bits.shape != b.bits.shape:
        raise DimensionMismatch(
            f"mask shapes differ: {a.bits.shape} vs {b.bits.shape}"
        )
    inter = int(np.count_nonzero(a.bits & b.bits))
    union = int(np.count_nonzero(a.bits | b.bits))
    if union == 0:
        return 0.0
    return inter / union


def mask_area(mask: BitMask) -> int:
    """Number of set pixels."""
    return int(np.count_nonzero(mask.bits))


def area_category(area) -> AreaCategory:
    """COCO size bucket for a pixel area (boundaries inclusive upward)."""
    if area < 0:
        raise DomainError(f"area must be non-negative, got {area}")
    if area < SMALL_MAX_AREA:
        return AreaCategory.SMALL
    if area < MEDIUM_MAX_AREA:
        return AreaCategory.MEDIUM
    return AreaCategory.LARGE
