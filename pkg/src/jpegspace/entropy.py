"""Shannon entropy, Huffman coding, and idealized arithmetic coding.

The arithmetic coder keeps the full-precision interval as exact rationals
(:class:`fractions.Fraction`), so interval nesting is exact over the short
messages this module targets. Termination on decode uses a known message
length. This is the textbook real-interval algorithm, not a renormalizing
integer range coder.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Sequence

__all__ = [
    "SymbolModel",
    "HuffmanNode",
    "HuffmanTree",
    "entropy",
    "huffman_build",
    "huffman_codes",
    "huffman_encode",
    "huffman_decode",
    "arith_encode",
    "arith_decode",
]


@dataclass(frozen=True)
class SymbolModel:
    """Ordered alphabet with occurrence probabilities.

    Probabilities must lie in (0, 1] and sum to 1 within 1e-9. The symbol
    order is significant for arithmetic coding: sub-intervals are laid out in
    this order.
    """

    symbols: tuple[tuple[Hashable, float], ...]

    def __post_init__(self):
        symbols = tuple((sym, float(p)) for sym, p in self.symbols)
        ids = [sym for sym, _ in symbols]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate symbols: {ids}")
        for sym, p in symbols:
            if not 0.0 < p <= 1.0:
                raise ValueError(f"probability of {sym!r} is {p}, must be in (0, 1]")
        total = sum(p for _, p in symbols)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, expected 1")
        object.__setattr__(self, "symbols", symbols)

    def probability(self, symbol: Hashable) -> float:
        for sym, p in self.symbols:
            if sym == symbol:
                return p
        raise KeyError(f"unknown symbol {symbol!r}")

    def __len__(self) -> int:
        return len(self.symbols)


def entropy(model: SymbolModel) -> float:
    """Base-2 entropy ``-sum(p * log2 p)`` in bits per symbol."""
    return -sum(p * math.log2(p) for _, p in model.symbols)


@dataclass(frozen=True)
class HuffmanNode:
    probability: float
    symbol: Hashable = None
    left: "HuffmanNode | None" = None
    right: "HuffmanNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None and self.right is None


@dataclass(frozen=True)
class HuffmanTree:
    """Binary prefix-code tree; a left edge encodes 0, a right edge 1."""

    root: HuffmanNode

    def leaf_count(self) -> int:
        def count(node):
            if node.is_leaf:
                return 1
            return count(node.left) + count(node.right)

        return count(self.root)


def huffman_build(model: SymbolModel) -> HuffmanTree:
    """Greedy bottom-up merge of the two lowest-probability nodes.

    Heap ties are broken by insertion sequence number so trees are
    deterministic. Within a merged node, a leaf child sorts left of an
    internal child and, between peers, the higher probability goes left;
    this reproduces the conventional layout where the most probable symbol
    gets the all-zeros code.
    """
    if len(model) < 2:
        raise ValueError("Huffman coding needs at least 2 symbols")
    heap = []
    seq = 0
    for sym, p in model.symbols:
        heapq.heappush(heap, (p, seq, HuffmanNode(p, symbol=sym)))
        seq += 1
    while len(heap) > 1:
        p_a, _, a = heapq.heappop(heap)
        p_b, _, b = heapq.heappop(heap)
        left, right = _order_children(a, b)
        node = HuffmanNode(p_a + p_b, left=left, right=right)
        heapq.heappush(heap, (node.probability, seq, node))
        seq += 1
    return HuffmanTree(root=heap[0][2])


def _order_children(a: HuffmanNode, b: HuffmanNode) -> tuple[HuffmanNode, HuffmanNode]:
    if a.is_leaf != b.is_leaf:
        return (a, b) if a.is_leaf else (b, a)
    if a.probability != b.probability:
        return (a, b) if a.probability > b.probability else (b, a)
    return a, b


def huffman_codes(tree: HuffmanTree) -> dict[Hashable, str]:
    """Map each leaf symbol to its 0/1 code string."""
    codes = {}

    def walk(node, prefix):
        if node.is_leaf:
            codes[node.symbol] = prefix or "0"
            return
        walk(node.left, prefix + "0")
        walk(node.right, prefix + "1")

    walk(tree.root, "")
    return codes


def huffman_encode(tree: HuffmanTree, message: Sequence[Hashable]) -> str:
    codes = huffman_codes(tree)
    try:
        return "".join(codes[sym] for sym in message)
    except KeyError as exc:
        raise ValueError(f"symbol {exc.args[0]!r} not in tree") from None


def huffman_decode(tree: HuffmanTree, bits: str, count: int) -> list:
    """Decode ``count`` symbols; raises on a bitstring that ends mid-symbol."""
    out = []
    node = tree.root
    i = 0
    while len(out) < count:
        if node.is_leaf:
            out.append(node.symbol)
            node = tree.root
            continue
        if i >= len(bits):
            raise ValueError(f"bitstring exhausted after {len(out)} of {count} symbols")
        node = node.left if bits[i] == "0" else node.right
        i += 1
    return out


def _cumulative(model: SymbolModel) -> list[tuple[Hashable, Fraction, Fraction]]:
    # Snap float probabilities to nearby exact rationals and normalize so the
    # sub-intervals tile [0, 1) exactly.
    widths = [Fraction(p).limit_denominator(10**12) for _, p in model.symbols]
    total = sum(widths)
    bounds = []
    low = Fraction(0)
    for (sym, _), width in zip(model.symbols, widths):
        width = width / total
        bounds.append((sym, low, low + width))
        low += width
    return bounds


def arith_encode(model: SymbolModel, message: Sequence[Hashable]) -> dict:
    """Narrow [0, 1) through the message's symbol sub-intervals.

    Returns ``low``/``high`` as floats plus the exact rationals, and
    ``emitted``: the shortest-decimal representative inside the final
    interval, kept as an exact :class:`~fractions.Fraction` (for long
    messages the interval is far narrower than float resolution) with its
    digit string in ``emitted_str``.
    """
    bounds = {sym: (lo, hi) for sym, lo, hi in _cumulative(model)}
    low, high = Fraction(0), Fraction(1)
    for sym in message:
        if sym not in bounds:
            raise ValueError(f"symbol {sym!r} not in model")
        width = high - low
        sub_lo, sub_hi = bounds[sym]
        low, high = low + width * sub_lo, low + width * sub_hi
    emitted, digits = _shortest_decimal(low, high)
    return {
        "low": float(low),
        "high": float(high),
        "low_exact": low,
        "high_exact": high,
        "emitted": emitted,
        "emitted_str": _decimal_string(emitted, digits),
    }


def _shortest_decimal(low: Fraction, high: Fraction) -> tuple[Fraction, int]:
    """Smallest-digit-count decimal in [low, high), exact."""
    digits = 0
    while True:
        step = Fraction(1, 10**digits)
        candidate = -(-low // step) * step  # ceil(low / step) * step
        if low <= candidate < high:
            return candidate, digits
        digits += 1


def _decimal_string(value: Fraction, digits: int) -> str:
    scaled = value * 10**digits
    if digits == 0:
        return str(scaled.numerator)
    text = str(scaled.numerator).rjust(digits, "0")
    whole, frac = text[:-digits] or "0", text[-digits:]
    return f"{whole}.{frac}"


def arith_decode(model: SymbolModel, value, count: int) -> list:
    """Recover ``count`` symbols from a representative of the final interval."""
    value = Fraction(value)
    if not 0 <= value < 1:
        raise ValueError(f"value {float(value)} outside [0, 1)")
    if count < 0:
        raise ValueError("count must be >= 0")
    bounds = _cumulative(model)
    low, high = Fraction(0), Fraction(1)
    out = []
    for _ in range(count):
        width = high - low
        scaled = (value - low) / width
        for sym, sub_lo, sub_hi in bounds:
            if sub_lo <= scaled < sub_hi:
                out.append(sym)
                low, high = low + width * sub_lo, low + width * sub_hi
                break
        else:
            raise ValueError("value does not fall in any symbol interval")
    return out
