"""Procedural JPEG baseline codec: color conversion, blockwise DCT,
quantization, run-length coding, and a baseline-JFIF serializer/parser."""

from .blocks import (
    EOB,
    CoefficientGrid,
    dequantize,
    forward_blocks,
    inverse_blocks,
    quantize,
    rle_decode,
    rle_encode,
    round_half_away,
)
from .color import (
    PlanarImage,
    gray_to_planar,
    pad_and_subsample,
    rgb_to_ycbcr,
    upsample_chroma,
    ycbcr_to_rgb,
)
from .jfif import (
    JfifError,
    JfifImage,
    TruncatedStreamError,
    UnsupportedFeatureError,
    jfif_parse,
    jfif_serialize,
)
from .pipeline import (
    decode,
    decode_planar,
    encode,
    encode_planar,
    planar_to_samples,
    planar_to_ycbcr,
    psnr,
)
from .tables import (
    BASE_CHROMA_TABLE,
    BASE_LUMA_TABLE,
    DEFAULT_HUFFMAN_TABLES,
    QuantizationMatrix,
    RC_TO_ZIGZAG,
    ZIGZAG_TO_RC,
    quality_to_matrix,
    zigzag_flatten,
    zigzag_unflatten,
)

__all__ = [
    "EOB",
    "CoefficientGrid",
    "dequantize",
    "forward_blocks",
    "inverse_blocks",
    "quantize",
    "rle_decode",
    "rle_encode",
    "round_half_away",
    "PlanarImage",
    "gray_to_planar",
    "pad_and_subsample",
    "rgb_to_ycbcr",
    "upsample_chroma",
    "ycbcr_to_rgb",
    "JfifError",
    "JfifImage",
    "TruncatedStreamError",
    "UnsupportedFeatureError",
    "jfif_parse",
    "jfif_serialize",
    "decode",
    "decode_planar",
    "encode",
    "encode_planar",
    "planar_to_samples",
    "planar_to_ycbcr",
    "psnr",
    "BASE_CHROMA_TABLE",
    "BASE_LUMA_TABLE",
    "DEFAULT_HUFFMAN_TABLES",
    "QuantizationMatrix",
    "RC_TO_ZIGZAG",
    "ZIGZAG_TO_RC",
    "quality_to_matrix",
    "zigzag_flatten",
    "zigzag_unflatten",
]
