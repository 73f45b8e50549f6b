import numpy as np
import pytest

from jpegspace.codec import (
    BASE_LUMA_TABLE,
    QuantizationMatrix,
    ZIGZAG_TO_RC,
    decode,
    dequantize,
    encode,
    forward_blocks,
    gray_to_planar,
    inverse_blocks,
    pad_and_subsample,
    psnr,
    quality_to_matrix,
    quantize,
    rgb_to_ycbcr,
    rle_decode,
    rle_encode,
    round_half_away,
    upsample_chroma,
    ycbcr_to_rgb,
)
from jpegspace.tensor import LabeledTensor

from conftest import reference_jpeg_bytes, smooth_gray, smooth_rgb


class TestColor:
    def test_achromatic_fixed_points(self):
        white = np.full((1, 1, 3), 255.0)
        planar = rgb_to_ycbcr(white)
        assert planar.planes[0].data[0, 0] == pytest.approx(255.0, abs=1e-9)
        assert planar.planes[1].data[0, 0] == pytest.approx(128.0, abs=1e-9)
        assert planar.planes[2].data[0, 0] == pytest.approx(128.0, abs=1e-9)
        black = np.zeros((1, 1, 3))
        planar = rgb_to_ycbcr(black)
        assert planar.planes[0].data[0, 0] == pytest.approx(0.0, abs=1e-9)
        assert planar.planes[1].data[0, 0] == pytest.approx(128.0, abs=1e-9)
        assert planar.planes[2].data[0, 0] == pytest.approx(128.0, abs=1e-9)

    def test_round_trip_within_pm_1_5(self, rng):
        pixels = rng.uniform(0, 255, size=(250, 400, 3))
        back = ycbcr_to_rgb(rgb_to_ycbcr(pixels))
        assert np.abs(back - pixels).max() <= 1.5


class TestPadding:
    def test_16x16_420(self):
        planar = pad_and_subsample(rgb_to_ycbcr(np.zeros((16, 16, 3))), "420")
        assert planar.planes[0].shape == (16, 16)
        assert planar.planes[1].shape == (8, 8)

    def test_17x17_420_pads_to_32(self):
        planar = pad_and_subsample(rgb_to_ycbcr(np.zeros((17, 17, 3))), "420")
        assert planar.planes[0].shape == (32, 32)
        assert planar.planes[1].shape == (16, 16)
        assert (planar.height, planar.width) == (17, 17)

    def test_constant_image_padding_preserves_values(self):
        planar = pad_and_subsample(gray_to_planar(np.full((10, 13), 77.0)), "gray")
        assert np.all(planar.planes[0].data == 77.0)

    def test_upsample_inverts_box_mean_on_constant(self):
        planar = pad_and_subsample(rgb_to_ycbcr(np.full((16, 16, 3), 99.0)), "420")
        full = upsample_chroma(planar, "bilinear")
        for plane in full.planes[1:]:
            assert plane.shape == (16, 16)
            assert np.allclose(plane.data, plane.data[0, 0])


class TestForwardBlocks:
    def test_constant_128_gives_zero(self):
        plane = LabeledTensor.from_array(np.full((16, 16), 128.0), ["h", "w"])
        grid = forward_blocks(plane)
        assert np.abs(grid.blocks.data).max() < 1e-12

    def test_constant_129_gives_dc_8(self):
        plane = LabeledTensor.from_array(np.full((16, 16), 129.0), ["h", "w"])
        grid = forward_blocks(plane)
        assert np.allclose(grid.blocks.data[:, :, 0], 8.0)
        assert np.abs(grid.blocks.data[:, :, 1:]).max() < 1e-12

    def test_zigzag_order_prefix(self):
        assert ZIGZAG_TO_RC[:4] == ((0, 0), (0, 1), (1, 0), (2, 0))

    def test_block_independence_and_full_dependence(self, rng):
        base = rng.uniform(0, 255, size=(16, 16))
        grid0 = forward_blocks(LabeledTensor.from_array(base, ["h", "w"]))
        poked = base.copy()
        poked[3, 11] += 25.0  # inside block (0, 1)
        grid1 = forward_blocks(LabeledTensor.from_array(poked, ["h", "w"]))
        delta = np.abs(grid1.blocks.data - grid0.blocks.data)
        changed = delta.max(axis=2) > 1e-12
        assert changed[0, 1]
        assert not changed[0, 0] and not changed[1, 0] and not changed[1, 1]
        # every coefficient of the poked block moves (generic pixel change)
        assert delta[0, 1].min() > 1e-12

    def test_extent_violation(self):
        with pytest.raises(ValueError):
            forward_blocks(LabeledTensor.from_array(np.zeros((12, 16)), ["h", "w"]))


class TestQuantization:
    def test_rounding(self):
        grid = forward_blocks(LabeledTensor.from_array(np.full((8, 8), 128.0), ["h", "w"]))
        assert round_half_away(np.array([10.4 / 2.0])) == 5.0
        assert round_half_away(np.array([-3.0 / 2.0])) == -2.0
        # reference rounding oracle: round half away from zero
        values = np.array([-2.5, -1.5, -0.4, 0.4, 1.5, 2.5])
        want = np.array([-3.0, -2.0, 0.0, 0.0, 2.0, 3.0])
        assert np.array_equal(round_half_away(values), want)
        del grid

    def test_dequantize_error_bound(self, rng):
        plane = LabeledTensor.from_array(rng.uniform(0, 255, size=(16, 16)), ["h", "w"])
        grid = forward_blocks(plane)
        q = quality_to_matrix(35, "luma")
        restored = dequantize(quantize(grid, q), q)
        error = np.abs(restored.blocks.data - grid.blocks.data)
        bound = q.zigzag.astype(np.float64) / 2.0
        assert np.all(error <= bound + 1e-9)

    def test_quantized_grid_must_be_integer(self):
        tensor = LabeledTensor.from_array(np.full((1, 1, 64), 0.5), ["x", "y", "k"])
        from jpegspace.codec import CoefficientGrid

        with pytest.raises(ValueError):
            CoefficientGrid("y", tensor, quantized=True)


class TestQualityScaling:
    def test_quality_50_is_base_table(self):
        assert np.array_equal(quality_to_matrix(50, "luma").matrix, BASE_LUMA_TABLE)

    def test_quality_100_is_all_ones(self):
        assert np.all(quality_to_matrix(100, "luma").matrix == 1)
        assert np.all(quality_to_matrix(100, "chroma").matrix == 1)

    @pytest.mark.parametrize("quality", [10, 50, 100])
    def test_matches_reference_encoder_dqt(self, quality):
        """Byte-exact comparison against the DQT libjpeg writes."""
        from jpegspace.codec import jfif_parse

        data = reference_jpeg_bytes(smooth_gray(16, 16), quality)
        parsed = jfif_parse(data)
        ours = quality_to_matrix(quality, "luma")
        assert np.array_equal(parsed.quantization[0].matrix, ours.matrix)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            quality_to_matrix(0)
        with pytest.raises(ValueError):
            quality_to_matrix(101)


class TestRle:
    def test_all_zero_vector(self):
        assert rle_encode(np.zeros(64, dtype=int)) == [(0, 0)]

    def test_leading_values(self):
        vector = np.zeros(64, dtype=int)
        vector[0] = 5
        vector[3] = 3
        assert rle_encode(vector) == [(0, 5), (2, 3), (0, 0)]

    def test_round_trip_random_sparse(self, rng):
        for _ in range(50):
            vector = np.zeros(64, dtype=np.int64)
            positions = rng.choice(64, size=rng.integers(0, 12), replace=False)
            vector[positions] = rng.integers(-50, 50, size=len(positions))
            vector[positions] += (vector[positions] == 0)  # keep entries nonzero
            assert np.array_equal(rle_decode(rle_encode(vector)), vector)

    def test_malformed_pairs(self):
        with pytest.raises(ValueError):
            rle_decode([(70, 5), (0, 0)])
        with pytest.raises(ValueError):
            rle_decode([(0, 5)])  # missing end-of-block


class TestEndToEnd:
    def test_quality_100_constant_gray_is_pixel_exact(self):
        image = np.full((24, 24), 130.0)
        out = decode(encode(image, quality=100))
        assert np.abs(out - image).max() < 1e-9

    def test_psnr_monotone_in_quality(self):
        image = smooth_gray(48, 64)
        low = psnr(image, decode(encode(image, quality=10)))
        high = psnr(image, decode(encode(image, quality=90)))
        assert high > low

    def test_color_modes_round_trip_reasonably(self):
        image = smooth_rgb(32, 40)
        for subsampling in ("444", "420"):
            out = decode(encode(image, quality=90, subsampling=subsampling))
            assert out.shape == image.shape
            assert psnr(image, out) > 30.0
