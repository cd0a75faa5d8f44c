"""Mask primitives: binarize, RLE codec, IoU, area categories."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from viscurate import (
    MEDIUM_MAX_AREA,
    SMALL_MAX_AREA,
    AreaCategory,
    BitMask,
    CountSumMismatch,
    DimensionMismatch,
    DomainError,
    Rle,
    SoftMask,
    area_category,
    binarize,
    mask_area,
    mask_iou,
    rle_decode,
    rle_encode,
)

from conftest import bits, random_bitmask


class TestBinarize:
    def test_all_zeros(self):
        out = binarize(SoftMask(np.zeros((3, 4))), 0.5)
        assert not out.bits.any()

    def test_all_ones(self):
        out = binarize(SoftMask(np.ones((3, 4))), 0.5)
        assert out.bits.all()

    def test_two_pixel_definition(self):
        out = binarize(SoftMask(np.array([[0.4], [0.6]])), 0.5)
        np.testing.assert_array_equal(out.bits, [[False], [True]])

    def test_threshold_is_strict(self):
        out = binarize(SoftMask(np.array([[0.5]])), 0.5)
        assert not out.bits[0, 0]

    def test_dimensions_preserved(self, rng):
        m = SoftMask(rng.random((7, 5)))
        out = binarize(m, 0.3)
        assert (out.height, out.width) == (7, 5)

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.5])
    def test_threshold_domain(self, bad):
        with pytest.raises(DomainError):
            binarize(SoftMask(np.zeros((2, 2))), bad)

    def test_monotone_in_threshold(self, rng):
        m = SoftMask(rng.random((10, 10)))
        lo = binarize(m, 0.3).bits
        hi = binarize(m, 0.7).bits
        assert (hi <= lo).all()


class TestRleCodec:
    def test_all_zeros_2x2(self):
        rle = rle_encode(BitMask(np.zeros((2, 2), dtype=bool)))
        assert list(rle.counts) == [4]

    def test_all_ones_2x2(self):
        rle = rle_encode(BitMask(np.ones((2, 2), dtype=bool)))
        assert list(rle.counts) == [0, 4]

    def test_center_pixel_3x3(self):
        # column-major order: pixel (1,1) is the 5th pixel -> 4 off, 1 on, 4 off
        rle = rle_encode(bits(["000", "010", "000"]))
        assert list(rle.counts) == [4, 1, 4]

    def test_column_major_order(self):
        # left column fully on: first 3 pixels in column-major scan
        rle = rle_encode(bits(["100", "100", "100"]))
        assert list(rle.counts) == [0, 3, 6]

    def test_exhaustive_3x3_round_trip(self):
        for packed in range(512):
            grid = np.array(
                [(packed >> k) & 1 for k in range(9)], dtype=bool
            ).reshape(3, 3)
            m = BitMask(grid)
            back = rle_decode(rle_encode(m))
            np.testing.assert_array_equal(back.bits, grid)

    def test_decode_examples(self):
        np.testing.assert_array_equal(
            rle_decode(Rle(2, 2, (4,))).bits, np.zeros((2, 2), dtype=bool)
        )
        np.testing.assert_array_equal(
            rle_decode(Rle(2, 2, (0, 4))).bits, np.ones((2, 2), dtype=bool)
        )

    def test_round_trip_random(self, rng):
        for _ in range(300):
            m = random_bitmask(rng, 16, 16, p=rng.random())
            np.testing.assert_array_equal(rle_decode(rle_encode(m)).bits, m.bits)

    @given(st.integers(min_value=0, max_value=2**36 - 1))
    @settings(max_examples=200, deadline=None)
    def test_round_trip_hypothesis_6x6(self, packed):
        grid = np.array([(packed >> k) & 1 for k in range(36)], dtype=bool).reshape(6, 6)
        back = rle_decode(rle_encode(BitMask(grid)))
        np.testing.assert_array_equal(back.bits, grid)

    def test_count_sum_enforced(self):
        with pytest.raises(CountSumMismatch):
            Rle(2, 2, (3,))
        with pytest.raises(CountSumMismatch):
            Rle(2, 2, (0, 5))

    def test_negative_count_rejected(self):
        with pytest.raises(DomainError):
            Rle(2, 2, (-1, 5))

    def test_rle_area(self, rng):
        for _ in range(50):
            m = random_bitmask(rng, 9, 7)
            assert rle_encode(m).area() == int(m.bits.sum())


class TestMaskIou:
    def test_identical(self, rng):
        m = random_bitmask(rng, 8, 8)
        assert mask_iou(m, m) == (1.0 if m.bits.any() else 0.0)

    def test_disjoint(self):
        a = bits(["10", "00"])
        b = bits(["00", "01"])
        assert mask_iou(a, b) == 0.0

    def test_empty_union_is_zero(self):
        z = BitMask(np.zeros((3, 3), dtype=bool))
        assert mask_iou(z, z) == 0.0

    def test_half_overlap(self):
        a = bits(["11", "00"])
        b = bits(["10", "10"])
        assert mask_iou(a, b) == pytest.approx(1 / 3)

    def test_pixel_counting_oracle(self, rng):
        for _ in range(500):
            a = random_bitmask(rng, 12, 9, p=rng.random())
            b = random_bitmask(rng, 12, 9, p=rng.random())
            inter = 0
            union = 0
            for y in range(12):
                for x in range(9):
                    pa, pb = a.bits[y, x], b.bits[y, x]
                    inter += pa and pb
                    union += pa or pb
            expect = inter / union if union else 0.0
            assert mask_iou(a, b) == expect

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mask_iou(BitMask(np.zeros((2, 2), dtype=bool)), BitMask(np.zeros((3, 2), dtype=bool)))

    def test_symmetry(self, rng):
        a = random_bitmask(rng, 6, 6)
        b = random_bitmask(rng, 6, 6)
        assert mask_iou(a, b) == mask_iou(b, a)


class TestAreaCategory:
    def test_constants(self):
        assert SMALL_MAX_AREA == 32**2 == 1024
        assert MEDIUM_MAX_AREA == 96**2 == 9216

    @pytest.mark.parametrize(
        "area,expect",
        [
            (0, AreaCategory.SMALL),
            (1023, AreaCategory.SMALL),
            (1024, AreaCategory.MEDIUM),
            (9215, AreaCategory.MEDIUM),
            (9216, AreaCategory.LARGE),
            (100_000, AreaCategory.LARGE),
        ],
    )
    def test_boundaries(self, area, expect):
        assert area_category(area) == expect

    def test_mask_area(self):
        m = bits(["110", "010"])
        assert mask_area(m) == 3


class TestMaskTypes:
    def test_bitmask_copies_input(self):
        grid = np.zeros((2, 2), dtype=bool)
        m = BitMask(grid)
        grid[0, 0] = True
        assert not m.bits[0, 0]

    def test_bitmask_read_only(self):
        m = BitMask(np.zeros((2, 2), dtype=bool))
        with pytest.raises(ValueError):
            m.bits[0, 0] = True

    def test_softmask_domain(self):
        with pytest.raises(DomainError):
            SoftMask(np.array([[1.2]]))
        with pytest.raises(DomainError):
            SoftMask(np.array([[-0.1]]))

    def test_equality_is_by_content(self):
        a = bits(["10", "01"])
        b = bits(["10", "01"])
        c = bits(["11", "01"])
        assert a == b
        assert a != c
