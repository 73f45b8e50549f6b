import numpy as np
import pytest

from jpegspace.codec import (
    TruncatedStreamError,
    UnsupportedFeatureError,
    decode,
    decode_planar,
    encode,
    forward_blocks,
    gray_to_planar,
    jfif_parse,
    jfif_serialize,
    pad_and_subsample,
    quality_to_matrix,
    quantize,
    upsample_chroma,
)

from conftest import (
    reference_decode_gray,
    reference_decode_ycbcr,
    reference_jpeg_bytes,
    smooth_gray,
    smooth_rgb,
)


def grayscale_grids(image, quality):
    planar = pad_and_subsample(gray_to_planar(image), "gray")
    q = quality_to_matrix(quality, "luma")
    grid = quantize(forward_blocks(planar.planes[0], "y"), q)
    return [grid], [q], (planar.height, planar.width)


class TestSerializeParseRoundTrip:
    def test_grayscale_coefficients_bit_exact(self, rng):
        image = rng.uniform(0, 255, size=(32, 32))
        grids, qs, dims = grayscale_grids(image, 50)
        stream = jfif_serialize(grids, qs, dims, "gray")
        parsed = jfif_parse(stream)
        assert np.array_equal(parsed.grids[0].blocks.data, grids[0].blocks.data)
        assert np.array_equal(parsed.quantization[0].matrix, qs[0].matrix)
        assert (parsed.height, parsed.width) == dims

    @pytest.mark.parametrize("subsampling", ["444", "420"])
    def test_color_coefficients_bit_exact(self, rng, subsampling):
        image = rng.uniform(0, 255, size=(24, 40, 3))
        stream = encode(image, quality=35, subsampling=subsampling)
        parsed = jfif_parse(stream)
        restream = jfif_serialize(
            parsed.grids, parsed.quantization[:2], (parsed.height, parsed.width), parsed.mode
        )
        reparsed = jfif_parse(restream)
        for a, b in zip(parsed.grids, reparsed.grids):
            assert np.array_equal(a.blocks.data, b.blocks.data)

    def test_extreme_coefficients_survive(self):
        # Max-contrast blocks exercise long Huffman codes and ZRL runs.
        image = np.zeros((16, 16))
        image[::2, ::2] = 255.0
        grids, qs, dims = grayscale_grids(image, 100)
        parsed = jfif_parse(jfif_serialize(grids, qs, dims, "gray"))
        assert np.array_equal(parsed.grids[0].blocks.data, grids[0].blocks.data)


class TestReferenceInterop:
    @pytest.mark.parametrize("quality", [10, 50, 90])
    def test_reference_gray_file_parses_and_decodes_within_1(self, quality):
        image = smooth_gray(48, 40)
        data = reference_jpeg_bytes(image, quality)
        parsed = jfif_parse(data)
        assert parsed.mode == "gray"
        ours = np.round(decode(data))
        reference = reference_decode_gray(data)
        assert np.abs(ours - reference).max() <= 1.0

    @pytest.mark.parametrize("pil_subsampling,mode", [(0, "444"), (2, "420")])
    def test_reference_color_file_decodes_within_1(self, pil_subsampling, mode):
        from jpegspace.codec import planar_to_ycbcr

        image = smooth_rgb(48, 40)
        data = reference_jpeg_bytes(image, 75, subsampling=pil_subsampling)
        parsed = jfif_parse(data)
        assert parsed.mode == mode
        ours = np.round(np.clip(planar_to_ycbcr(decode_planar(parsed)), 0, 255))
        reference = reference_decode_ycbcr(data)
        assert np.abs(ours - reference).max() <= 1.0

    def test_reference_decodes_our_stream(self):
        image = smooth_gray(40, 56)
        data = encode(image, quality=60)
        reference = reference_decode_gray(data)
        ours = np.round(decode(data))
        assert np.abs(ours - reference).max() <= 1.0


class TestErrors:
    def test_missing_eoi_is_truncated(self):
        data = encode(smooth_gray(16, 16), quality=75)
        with pytest.raises(TruncatedStreamError):
            jfif_parse(data[:-2])

    def test_truncated_scan(self):
        data = encode(smooth_gray(16, 16), quality=75)
        with pytest.raises(TruncatedStreamError):
            jfif_parse(data[: len(data) // 2])

    def test_progressive_rejected(self):
        data = bytearray(encode(smooth_gray(16, 16), quality=75))
        sof = data.find(b"\xff\xc0")
        data[sof + 1] = 0xC2  # claim progressive
        with pytest.raises(UnsupportedFeatureError, match="SOF0"):
            jfif_parse(bytes(data))

    def test_arithmetic_coding_rejected(self):
        data = encode(smooth_gray(16, 16), quality=75)
        sos = data.find(b"\xff\xda")
        patched = data[:sos] + b"\xff\xcc\x00\x04\x00\x05" + data[sos:]
        with pytest.raises(UnsupportedFeatureError, match="arithmetic"):
            jfif_parse(patched)

    def test_restart_interval_rejected(self):
        data = encode(smooth_gray(16, 16), quality=75)
        sos = data.find(b"\xff\xda")
        patched = data[:sos] + b"\xff\xdd\x00\x04\x00\x08" + data[sos:]
        with pytest.raises(UnsupportedFeatureError, match="restart"):
            jfif_parse(patched)

    def test_not_a_jpeg(self):
        with pytest.raises(Exception):
            jfif_parse(b"definitely not a jpeg stream")

    def test_progressive_reference_file_rejected(self):
        import io

        from PIL import Image

        buf = io.BytesIO()
        arr = np.asarray(smooth_gray(32, 32), dtype=np.uint8)
        Image.fromarray(arr, "L").save(buf, "JPEG", progressive=True)
        with pytest.raises(UnsupportedFeatureError):
            jfif_parse(buf.getvalue())
