"""Baseline JFIF subset: serializer and parser.

Supported syntax: sequential DCT, 8-bit samples, Huffman entropy coding, one
or three components, 4:4:4 or 4:2:0 sampling, single interleaved scan, and
markers SOI / APP0 / DQT / SOF0 / DHT / SOS / EOI (APPn and COM segments are
skipped). Anything else -- progressive SOF2, arithmetic coding, restart
intervals, 12-bit precision -- raises :class:`UnsupportedFeatureError`.

The entropy-coded layer is lossless: ``parse(serialize(grids))`` returns the
quantized coefficients bit-exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..tensor import LabeledTensor
from .blocks import CoefficientGrid
from .tables import DEFAULT_HUFFMAN_TABLES, QuantizationMatrix

__all__ = [
    "JfifError",
    "UnsupportedFeatureError",
    "TruncatedStreamError",
    "JfifImage",
    "jfif_serialize",
    "jfif_parse",
]

SOI = 0xFFD8
EOI = 0xFFD9
SOS = 0xFFDA
DQT = 0xFFDB
DRI = 0xFFDD
DHT = 0xFFC4
DAC = 0xFFCC
COM = 0xFFFE
SOF0 = 0xFFC0
APP0 = 0xFFE0


class JfifError(ValueError):
    """Malformed or inconsistent stream."""


class UnsupportedFeatureError(JfifError):
    """Syntactically valid JPEG feature outside the baseline subset."""


class TruncatedStreamError(JfifError):
    """Stream ended before the syntax element completed."""


@dataclass(frozen=True)
class JfifImage:
    """Parse result: per-component quantized grids and quantization tables,
    the active image dimensions, and the sampling mode."""

    grids: tuple[CoefficientGrid, ...]
    quantization: tuple[QuantizationMatrix, ...]
    height: int
    width: int
    mode: str


class _HuffmanCodec:
    """Canonical Huffman codes from a (bits, values) table definition."""

    def __init__(self, bits, values):
        if len(bits) != 16:
            raise JfifError("Huffman table must define 16 length counts")
        if sum(bits) != len(values):
            raise JfifError("Huffman table length counts disagree with values")
        self.bits = tuple(bits)
        self.values = tuple(values)
        self.encode_table = {}
        self.decode_table = {}
        code = 0
        i = 0
        for length in range(1, 17):
            for _ in range(bits[length - 1]):
                symbol = values[i]
                self.encode_table[symbol] = (code, length)
                self.decode_table[(length, code)] = symbol
                code += 1
                i += 1
            code <<= 1


class _BitWriter:
    """MSB-first bit accumulator with 0xFF byte stuffing."""

    def __init__(self):
        self.out = bytearray()
        self.acc = 0
        self.nbits = 0

    def write(self, value, length):
        if length == 0:
            return
        self.acc = (self.acc << length) | (value & ((1 << length) - 1))
        self.nbits += length
        while self.nbits >= 8:
            self.nbits -= 8
            byte = (self.acc >> self.nbits) & 0xFF
            self.out.append(byte)
            if byte == 0xFF:
                self.out.append(0x00)
        self.acc &= (1 << self.nbits) - 1

    def flush(self) -> bytes:
        if self.nbits:
            pad = 8 - self.nbits
            self.write((1 << pad) - 1, pad)
        return bytes(self.out)


class _BitReader:
    """MSB-first reader over entropy-coded data; unstuffs 0xFF00 and stops at
    the first real marker."""

    def __init__(self, data, pos):
        self.data = data
        self.pos = pos
        self.acc = 0
        self.nbits = 0

    def _load_byte(self):
        if self.pos >= len(self.data):
            raise TruncatedStreamError("entropy-coded data ran out")
        byte = self.data[self.pos]
        self.pos += 1
        if byte == 0xFF:
            if self.pos >= len(self.data):
                raise TruncatedStreamError("stream ends inside a marker")
            nxt = self.data[self.pos]
            if nxt == 0x00:
                self.pos += 1
            elif 0xD0 <= nxt <= 0xD7:
                raise UnsupportedFeatureError("restart markers are not supported")
            else:
                # Real marker before the scan finished decoding.
                self.pos -= 1
                raise TruncatedStreamError("marker reached inside entropy data")
        self.acc = (self.acc << 8) | byte
        self.nbits += 8

    def read(self, length):
        while self.nbits < length:
            self._load_byte()
        self.nbits -= length
        value = (self.acc >> self.nbits) & ((1 << length) - 1)
        self.acc &= (1 << self.nbits) - 1
        return value

    def read_code(self, codec: _HuffmanCodec):
        code = 0
        for length in range(1, 17):
            code = (code << 1) | self.read(1)
            symbol = codec.decode_table.get((length, code))
            if symbol is not None:
                return symbol
        raise JfifError("invalid Huffman code in entropy data")

    def align(self):
        self.nbits = 0
        self.acc = 0


def _category(value: int) -> int:
    return abs(value).bit_length()


def _value_bits(value: int, size: int) -> int:
    return value if value >= 0 else value + (1 << size) - 1


def _extend(bits: int, size: int) -> int:
    if size == 0:
        return 0
    return bits if bits >= (1 << (size - 1)) else bits - (1 << size) + 1


def _component_layout(mode: str):
    # (component id, (h_factor, v_factor), quant table id, dc id, ac id)
    if mode == "gray":
        return [(1, (1, 1), 0, 0, 0)]
    if mode == "444":
        return [
            (1, (1, 1), 0, 0, 0),
            (2, (1, 1), 1, 1, 1),
            (3, (1, 1), 1, 1, 1),
        ]
    if mode == "420":
        return [
            (1, (2, 2), 0, 0, 0),
            (2, (1, 1), 1, 1, 1),
            (3, (1, 1), 1, 1, 1),
        ]
    raise ValueError(f"unknown mode {mode!r}")


def _segment(marker: int, payload: bytes) -> bytes:
    return struct.pack(">HH", marker, len(payload) + 2) + payload


def _encode_block(writer, vector, dc_codec, ac_codec, prev_dc):
    dc = int(vector[0])
    diff = dc - prev_dc
    size = _category(diff)
    code, length = dc_codec.encode_table[size]
    writer.write(code, length)
    writer.write(_value_bits(diff, size), size)

    run = 0
    last_nonzero = 0
    for k in range(63, 0, -1):
        if vector[k] != 0:
            last_nonzero = k
            break
    for k in range(1, last_nonzero + 1):
        value = int(vector[k])
        if value == 0:
            run += 1
            continue
        while run >= 16:
            code, length = ac_codec.encode_table[0xF0]  # ZRL
            writer.write(code, length)
            run -= 16
        size = _category(value)
        code, length = ac_codec.encode_table[(run << 4) | size]
        writer.write(code, length)
        writer.write(_value_bits(value, size), size)
        run = 0
    if last_nonzero != 63:
        code, length = ac_codec.encode_table[0x00]  # EOB
        writer.write(code, length)
    return dc


def _decode_block(reader, dc_codec, ac_codec, prev_dc):
    vector = np.zeros(64, dtype=np.int64)
    size = reader.read_code(dc_codec)
    diff = _extend(reader.read(size), size)
    vector[0] = prev_dc + diff
    k = 1
    while k < 64:
        symbol = reader.read_code(ac_codec)
        if symbol == 0x00:  # EOB
            break
        run = symbol >> 4
        size = symbol & 0x0F
        if size == 0:
            if run != 15:
                raise JfifError(f"invalid AC symbol {symbol:#04x}")
            k += 16  # ZRL
            continue
        k += run
        if k >= 64:
            raise JfifError("AC run overflows the block")
        vector[k] = _extend(reader.read(size), size)
        k += 1
    return vector


def jfif_serialize(
    grids,
    quantization,
    dims: tuple[int, int],
    mode: str,
    huffman_tables=DEFAULT_HUFFMAN_TABLES,
) -> bytes:
    """Serialize quantized coefficient grids into a baseline JFIF stream.

    ``grids`` holds one :class:`CoefficientGrid` per component (padded block
    extents), ``quantization`` one table per quantization table id used, and
    ``dims`` the active (height, width) recorded in the frame header.
    """
    layout = _component_layout(mode)
    if len(grids) != len(layout):
        raise ValueError(f"mode {mode} expects {len(layout)} grids, got {len(grids)}")
    for grid in grids:
        if not grid.quantized:
            raise ValueError("serializer takes quantized grids")
    height, width = dims
    codecs = {key: _HuffmanCodec(*spec) for key, spec in huffman_tables.items()}

    out = bytearray()
    out += struct.pack(">H", SOI)
    out += _segment(APP0, b"JFIF\x00" + struct.pack(">BBBHHBB", 1, 1, 0, 1, 1, 0, 0))

    n_qt = max(tq for _, _, tq, _, _ in layout) + 1
    if len(quantization) < n_qt:
        raise ValueError(f"need {n_qt} quantization tables, got {len(quantization)}")
    dqt = bytearray()
    for tq in range(n_qt):
        dqt.append(tq)  # precision 0 (8-bit) << 4 | table id
        dqt += bytes(int(v) for v in quantization[tq].zigzag)
    out += _segment(DQT, bytes(dqt))

    sof = bytearray(struct.pack(">BHHB", 8, height, width, len(layout)))
    for comp_id, (h, v), tq, _, _ in layout:
        sof += struct.pack(">BBB", comp_id, (h << 4) | v, tq)
    out += _segment(SOF0, bytes(sof))

    dht = bytearray()
    used = sorted({(0, dc) for _, _, _, dc, _ in layout} | {(1, ac) for *_, ac in layout})
    for table_class, table_id in used:
        bits, values = huffman_tables[(table_class, table_id)]
        dht.append((table_class << 4) | table_id)
        dht += bytes(bits)
        dht += bytes(values)
    out += _segment(DHT, bytes(dht))

    sos = bytearray([len(layout)])
    for comp_id, _, _, dc, ac in layout:
        sos += struct.pack(">BB", comp_id, (dc << 4) | ac)
    sos += struct.pack(">BBB", 0, 63, 0)
    out += _segment(SOS, bytes(sos))

    out += _scan_bytes(grids, layout, codecs)
    out += struct.pack(">H", EOI)
    return bytes(out)


def _mcu_grid_shape(grids, layout):
    luma = grids[0]
    h0, v0 = layout[0][1]
    bx, by = luma.block_shape
    if bx % v0 or by % h0:
        raise ValueError("luma block extents do not tile the MCU grid")
    return bx // v0, by // h0


def _scan_bytes(grids, layout, codecs) -> bytes:
    writer = _BitWriter()
    mcus_x, mcus_y = _mcu_grid_shape(grids, layout)
    data = [np.asarray(grid.blocks.data, dtype=np.int64) for grid in grids]
    prev_dc = [0] * len(layout)
    for mx in range(mcus_x):
        for my in range(mcus_y):
            for ci, (_, (h, v), _, dc_id, ac_id) in enumerate(layout):
                dc_codec = codecs[(0, dc_id)]
                ac_codec = codecs[(1, ac_id)]
                for bi in range(v):
                    for bj in range(h):
                        vector = data[ci][mx * v + bi, my * h + bj]
                        prev_dc[ci] = _encode_block(
                            writer, vector, dc_codec, ac_codec, prev_dc[ci]
                        )
    return writer.flush()


def _read_u16(data, pos):
    if pos + 2 > len(data):
        raise TruncatedStreamError("stream ends inside a 16-bit field")
    return struct.unpack_from(">H", data, pos)[0], pos + 2


def jfif_parse(data: bytes) -> JfifImage:
    """Parse a baseline stream back into quantized grids and tables."""
    if len(data) < 2:
        raise TruncatedStreamError("stream shorter than the SOI marker")
    marker, pos = _read_u16(data, 0)
    if marker != SOI:
        raise JfifError(f"stream does not start with SOI (got {marker:#06x})")

    q_tables: dict[int, QuantizationMatrix] = {}
    h_codecs: dict[tuple[int, int], _HuffmanCodec] = {}
    frame = None
    scan = None

    while True:
        if pos >= len(data):
            raise TruncatedStreamError("stream ends without EOI")
        if data[pos] != 0xFF:
            raise JfifError(f"expected marker at byte {pos}, got {data[pos]:#04x}")
        while pos + 1 < len(data) and data[pos] == 0xFF and data[pos + 1] == 0xFF:
            pos += 1  # fill bytes
        marker, pos = _read_u16(data, pos)

        if marker == EOI:
            break
        if 0xFFD0 <= marker <= 0xFFD7 or marker == 0xFF01:
            raise JfifError(f"unexpected standalone marker {marker:#06x}")
        if marker == DAC:
            raise UnsupportedFeatureError("arithmetic coding is not supported")
        if 0xFFC0 <= marker <= 0xFFCF and marker not in (SOF0, DHT, DAC):
            raise UnsupportedFeatureError(
                f"only baseline SOF0 frames are supported (got {marker:#06x})"
            )

        length, pos = _read_u16(data, pos)
        end = pos + length - 2
        if end > len(data):
            raise TruncatedStreamError("segment extends past end of stream")
        payload = data[pos:end]
        pos = end

        if marker == DQT:
            _parse_dqt(payload, q_tables)
        elif marker == DHT:
            _parse_dht(payload, h_codecs)
        elif marker == SOF0:
            frame = _parse_sof(payload)
        elif marker == DRI:
            (interval,) = struct.unpack(">H", payload)
            if interval != 0:
                raise UnsupportedFeatureError("restart intervals are not supported")
        elif marker == SOS:
            if frame is None:
                raise JfifError("SOS before SOF0")
            scan, pos = _parse_scan(data, pos, payload, frame, q_tables, h_codecs)
            # Skip whatever padding bits/bytes remain before the next marker.
            while pos < len(data):
                if (
                    data[pos] == 0xFF
                    and pos + 1 < len(data)
                    and data[pos + 1] not in (0x00, 0xFF)
                ):
                    break
                pos += 1
        elif COM == marker or 0xFFE0 <= marker <= 0xFFEF:
            continue  # metadata segments
        else:
            raise UnsupportedFeatureError(f"unsupported marker {marker:#06x}")

    if scan is None:
        raise JfifError("stream has no scan data")
    return scan


def _parse_dqt(payload, q_tables):
    pos = 0
    while pos < len(payload):
        pq_tq = payload[pos]
        pos += 1
        if pq_tq >> 4 != 0:
            raise UnsupportedFeatureError("16-bit quantization tables are not supported")
        tq = pq_tq & 0x0F
        if pos + 64 > len(payload):
            raise TruncatedStreamError("DQT table truncated")
        q_tables[tq] = QuantizationMatrix.from_zigzag(list(payload[pos : pos + 64]))
        pos += 64


def _parse_dht(payload, h_codecs):
    pos = 0
    while pos < len(payload):
        tc_th = payload[pos]
        pos += 1
        table_class, table_id = tc_th >> 4, tc_th & 0x0F
        if table_class > 1:
            raise JfifError(f"invalid Huffman table class {table_class}")
        if pos + 16 > len(payload):
            raise TruncatedStreamError("DHT counts truncated")
        bits = list(payload[pos : pos + 16])
        pos += 16
        count = sum(bits)
        if pos + count > len(payload):
            raise TruncatedStreamError("DHT values truncated")
        values = list(payload[pos : pos + count])
        pos += count
        h_codecs[(table_class, table_id)] = _HuffmanCodec(bits, values)


def _parse_sof(payload):
    precision, height, width, n_comp = struct.unpack_from(">BHHB", payload, 0)
    if precision != 8:
        raise UnsupportedFeatureError(f"{precision}-bit precision is not supported")
    comps = []
    pos = 6
    for _ in range(n_comp):
        comp_id, hv, tq = struct.unpack_from(">BBB", payload, pos)
        comps.append((comp_id, (hv >> 4, hv & 0x0F), tq))
        pos += 3
    factors = [hv for _, hv, _ in comps]
    if n_comp == 1 and factors == [(1, 1)]:
        mode = "gray"
    elif n_comp == 3 and factors == [(1, 1), (1, 1), (1, 1)]:
        mode = "444"
    elif n_comp == 3 and factors == [(2, 2), (1, 1), (1, 1)]:
        mode = "420"
    else:
        raise UnsupportedFeatureError(
            f"sampling layout {factors} with {n_comp} components is not supported"
        )
    return {"height": height, "width": width, "components": comps, "mode": mode}


def _parse_scan(data, pos, payload, frame, q_tables, h_codecs):
    n_comp = payload[0]
    if n_comp != len(frame["components"]):
        raise UnsupportedFeatureError("only single interleaved scans are supported")
    selectors = {}
    p = 1
    for _ in range(n_comp):
        comp_id, tables = payload[p], payload[p + 1]
        selectors[comp_id] = (tables >> 4, tables & 0x0F)
        p += 2
    ss, se, ahl = payload[p], payload[p + 1], payload[p + 2]
    if (ss, se, ahl) != (0, 63, 0):
        raise UnsupportedFeatureError("spectral selection is not supported")

    height, width = frame["height"], frame["width"]
    comps = frame["components"]
    hmax = max(h for _, (h, _), _ in comps)
    vmax = max(v for _, (_, v), _ in comps)
    mcu_h, mcu_w = 8 * vmax, 8 * hmax
    mcus_x = -(-height // mcu_h)
    mcus_y = -(-width // mcu_w)

    blocks = {}
    for comp_id, (h, v), _ in comps:
        blocks[comp_id] = np.zeros((mcus_x * v, mcus_y * h, 64), dtype=np.int64)

    reader = _BitReader(data, pos)
    prev_dc = {comp_id: 0 for comp_id, _, _ in comps}
    for mx in range(mcus_x):
        for my in range(mcus_y):
            for comp_id, (h, v), _ in comps:
                dc_id, ac_id = selectors[comp_id]
                try:
                    dc_codec = h_codecs[(0, dc_id)]
                    ac_codec = h_codecs[(1, ac_id)]
                except KeyError as exc:
                    raise JfifError(f"scan references undefined table {exc.args[0]}")
                for bi in range(v):
                    for bj in range(h):
                        vector = _decode_block(reader, dc_codec, ac_codec, prev_dc[comp_id])
                        prev_dc[comp_id] = int(vector[0])
                        blocks[comp_id][mx * v + bi, my * h + bj] = vector

    plane_names = {1: ["y"], 3: ["y", "cb", "cr"]}[len(comps)]
    grids = []
    quantization = []
    for (comp_id, _, tq), name in zip(comps, plane_names):
        if tq not in q_tables:
            raise JfifError(f"component {comp_id} references undefined DQT {tq}")
        tensor = LabeledTensor.from_array(blocks[comp_id].astype(np.float64), ["x", "y", "k"])
        grids.append(CoefficientGrid(name, tensor, quantized=True))
        quantization.append(q_tables[tq])

    return (
        JfifImage(tuple(grids), tuple(quantization), height, width, frame["mode"]),
        reader.pos,
    )
