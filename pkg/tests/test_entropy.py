import math
import random

import numpy as np
import pytest

from jpegspace.entropy import (
    HuffmanTree,
    SymbolModel,
    arith_decode,
    arith_encode,
    entropy,
    huffman_build,
    huffman_codes,
    huffman_decode,
    huffman_encode,
)

WORKED_MODEL = SymbolModel((("A", 0.4), ("B", 0.35), ("C", 0.2), ("D", 0.05)))


def random_model(rng, size):
    weights = rng.uniform(0.05, 1.0, size=size)
    probs = weights / weights.sum()
    return SymbolModel(tuple((i, float(p)) for i, p in enumerate(probs)))


class TestSymbolModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            SymbolModel((("A", 0.5), ("A", 0.5)))
        with pytest.raises(ValueError):
            SymbolModel((("A", 0.0), ("B", 1.0)))
        with pytest.raises(ValueError):
            SymbolModel((("A", 0.5), ("B", 0.6)))


class TestEntropy:
    def test_worked_example(self):
        assert entropy(WORKED_MODEL) == pytest.approx(1.74, abs=0.005)

    def test_certain_symbol_has_zero_entropy(self):
        assert entropy(SymbolModel((("A", 1.0),))) == 0.0

    def test_uniform_four_symbols(self):
        model = SymbolModel(tuple((i, 0.25) for i in range(4)))
        assert entropy(model) == pytest.approx(2.0, abs=1e-12)

    def test_uniform_maximizes_entropy(self):
        rng = np.random.default_rng(0)
        uniform = entropy(SymbolModel(tuple((i, 0.125) for i in range(8))))
        for _ in range(10_000):
            assert entropy(random_model(rng, 8)) <= uniform + 1e-12


class TestHuffman:
    def test_worked_example_codes(self):
        tree = huffman_build(WORKED_MODEL)
        codes = huffman_codes(tree)
        assert codes == {"A": "0", "B": "10", "C": "110", "D": "111"}
        lengths = {sym: len(code) for sym, code in codes.items()}
        assert lengths == {"A": 1, "B": 2, "C": 3, "D": 3}
        average = sum(WORKED_MODEL.probability(s) * len(c) for s, c in codes.items())
        assert average == pytest.approx(1.85, abs=1e-12)

    def test_equal_probabilities_give_balanced_tree(self):
        model = SymbolModel(tuple((i, 0.25) for i in range(4)))
        codes = huffman_codes(huffman_build(model))
        assert all(len(code) == 2 for code in codes.values())

    def test_tree_structure_invariants(self):
        tree = huffman_build(WORKED_MODEL)
        assert tree.leaf_count() == 4

        def check(node):
            if node.is_leaf:
                return
            assert node.probability == pytest.approx(
                node.left.probability + node.right.probability
            )
            check(node.left)
            check(node.right)

        check(tree.root)

    def test_prefix_free(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            codes = list(huffman_codes(huffman_build(random_model(rng, 8))).values())
            for i, a in enumerate(codes):
                for j, b in enumerate(codes):
                    if i != j:
                        assert not b.startswith(a)

    def test_noiseless_coding_bound(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            model = random_model(rng, 8)
            codes = huffman_codes(huffman_build(model))
            average = sum(model.probability(s) * len(c) for s, c in codes.items())
            h = entropy(model)
            assert h - 1e-9 <= average <= h + 1.0 + 1e-9

    def test_encode_worked_symbols(self):
        tree = huffman_build(WORKED_MODEL)
        assert huffman_encode(tree, "A") == "0"
        assert huffman_encode(tree, "D") == "111"

    def test_round_trip_long_messages(self):
        rng = random.Random(3)
        tree = huffman_build(WORKED_MODEL)
        for _ in range(5):
            message = rng.choices("ABCD", weights=[40, 35, 20, 5], k=1000)
            bits = huffman_encode(tree, message)
            assert huffman_decode(tree, bits, 1000) == message

    def test_errors(self):
        tree = huffman_build(WORKED_MODEL)
        with pytest.raises(ValueError, match="not in tree"):
            huffman_encode(tree, "AXE")
        bits = huffman_encode(tree, "ABD")
        with pytest.raises(ValueError, match="exhausted"):
            huffman_decode(tree, bits[:-1], 3)
        with pytest.raises(ValueError, match="at least 2"):
            huffman_build(SymbolModel((("A", 1.0),)))


class TestArithmetic:
    def test_worked_example_interval(self):
        result = arith_encode(WORKED_MODEL, "ABD")
        # The worked figure displays the interval as [0.29, 0.3); the exact
        # low endpoint under the stated construction is 0.293.
        assert result["low"] == pytest.approx(0.29, abs=0.005)
        assert result["high"] == pytest.approx(0.30, abs=1e-9)
        assert result["low_exact"] <= result["emitted"] < result["high_exact"]
        assert result["emitted_str"] == "0.293"
        assert result["low"] <= 0.295 < result["high"]

    def test_worked_example_decodes(self):
        assert arith_decode(WORKED_MODEL, 0.295, 3) == ["A", "B", "D"]

    def test_single_symbol_alphabet(self):
        model = SymbolModel((("Z", 1.0),))
        result = arith_encode(model, "ZZZZ")
        assert (result["low"], result["high"]) == (0.0, 1.0)
        assert arith_decode(model, 0.5, 4) == ["Z"] * 4

    def test_intervals_nest_strictly(self):
        from fractions import Fraction

        rng = random.Random(4)
        message = rng.choices("ABCD", weights=[40, 35, 20, 5], k=30)
        low, high = Fraction(0), Fraction(1)
        for i in range(1, len(message) + 1):
            result = arith_encode(WORKED_MODEL, message[:i])
            new_low, new_high = result["low_exact"], result["high_exact"]
            assert low <= new_low and new_high <= high
            expected_width = (high - low) * Fraction(
                WORKED_MODEL.probability(message[i - 1])
            ).limit_denominator(10**12)
            assert abs(float((new_high - new_low) - expected_width)) < 1e-12
            low, high = new_low, new_high

    def test_round_trip_random_messages(self):
        rng = random.Random(5)
        for _ in range(10):
            message = rng.choices("ABCD", weights=[40, 35, 20, 5], k=40)
            result = arith_encode(WORKED_MODEL, message)
            assert arith_decode(WORKED_MODEL, result["emitted"], len(message)) == message

    def test_errors(self):
        with pytest.raises(ValueError, match="outside"):
            arith_decode(WORKED_MODEL, 1.5, 1)
        with pytest.raises(ValueError, match="not in model"):
            arith_encode(WORKED_MODEL, "AXE")
