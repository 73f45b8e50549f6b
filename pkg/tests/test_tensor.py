import numpy as np
import pytest

from jpegspace.tensor import (
    LabeledTensor,
    contract,
    elementwise,
    reshape_fold,
    reshape_unfold,
)


def naive_contract(a, b, output_axes):
    """All-index-loop oracle for contract, independent of einsum."""
    extents = dict(a.axes)
    extents.update(dict(b.axes))
    all_labels = list(dict.fromkeys(list(a.labels) + list(b.labels)))
    summed = [l for l in all_labels if l not in output_axes]
    out_shape = tuple(extents[l] for l in output_axes)
    out = np.zeros(out_shape if out_shape else ())

    def entries(labels, index):
        return tuple(index[l] for l in labels)

    from itertools import product

    for out_idx in product(*(range(extents[l]) for l in output_axes)):
        index = dict(zip(output_axes, out_idx))
        total = 0.0
        for sum_idx in product(*(range(extents[l]) for l in summed)):
            index.update(zip(summed, sum_idx))
            total += a.data[entries(a.labels, index)] * b.data[entries(b.labels, index)]
        if out_shape:
            out[out_idx] = total
        else:
            out = np.array(total)
    return out


class TestLabeledTensor:
    def test_invariants(self):
        with pytest.raises(ValueError):
            LabeledTensor((("i", 2), ("i", 3)), np.zeros(6))
        with pytest.raises(ValueError):
            LabeledTensor((("i", 0),), np.zeros(0))
        with pytest.raises(ValueError):
            LabeledTensor((("i", 2), ("j", 3)), np.zeros(5))

    def test_immutability(self):
        t = LabeledTensor.from_array(np.zeros((2, 2)), ["i", "j"])
        with pytest.raises(ValueError):
            t.data[0, 0] = 1.0

    def test_transpose_and_rename(self):
        t = LabeledTensor.from_array(np.arange(6).reshape(2, 3), ["i", "j"])
        u = t.transpose(["j", "i"])
        assert u.shape == (3, 2)
        assert np.array_equal(u.data, t.data.T)
        v = t.rename({"i": "a"})
        assert v.labels == ("a", "j")


class TestContract:
    def test_identity_map(self):
        m = LabeledTensor.from_array(np.eye(2), ["i", "j"])
        n = LabeledTensor.from_array(np.array([[1.0, 2.0], [3.0, 4.0]]), ["j", "k"])
        out = contract(m, n, ["i", "k"])
        assert np.allclose(out.data, n.data)

    def test_inner_product(self):
        v = LabeledTensor.from_array(np.array([3.0, 4.0]), ["i"])
        out = contract(v, v, [])
        assert out.item() == pytest.approx(25.0)

    def test_dct_style_contraction_matches_loop_oracle(self):
        rng = np.random.default_rng(0)
        d = LabeledTensor.from_array(rng.normal(size=(4, 4, 4, 4)), ["a", "b", "m", "n"])
        p = LabeledTensor.from_array(rng.normal(size=(4, 4)), ["m", "n"])
        got = contract(d, p, ["a", "b"])
        want = naive_contract(d, p, ["a", "b"])
        assert np.allclose(got.data, want, rtol=1e-12, atol=1e-12)

    def test_agrees_with_loop_oracle_on_random_shapes(self):
        rng = np.random.default_rng(1)
        cases = [
            ((("i", 3), ("j", 4)), (("j", 4), ("k", 2)), ["i", "k"]),
            ((("i", 2), ("j", 3), ("k", 4)), (("j", 3), ("l", 2)), ["i", "k", "l"]),
            ((("i", 2), ("j", 2)), (("i", 2), ("j", 2)), []),
            ((("i", 2), ("j", 3)), (("k", 4),), ["i", "j", "k"]),  # outer product
            ((("i", 3), ("j", 2)), (("j", 2), ("k", 3)), ["j", "i", "k"]),  # kept shared
        ]
        for axes_a, axes_b, out_axes in cases:
            a = LabeledTensor(axes_a, rng.normal(size=[e for _, e in axes_a]))
            b = LabeledTensor(axes_b, rng.normal(size=[e for _, e in axes_b]))
            got = contract(a, b, out_axes)
            want = naive_contract(a, b, out_axes)
            assert np.allclose(got.data, want, rtol=1e-12, atol=1e-12), (axes_a, axes_b)

    def test_bilinearity(self):
        rng = np.random.default_rng(2)
        shape_a = (("i", 3), ("j", 4), ("k", 2), ("l", 3))
        shape_b = (("j", 4), ("l", 3), ("m", 2))
        a1 = LabeledTensor(shape_a, rng.normal(size=(3, 4, 2, 3)))
        a2 = LabeledTensor(shape_a, rng.normal(size=(3, 4, 2, 3)))
        b = LabeledTensor(shape_b, rng.normal(size=(4, 3, 2)))
        alpha, beta = 0.7, -1.3
        mixed = LabeledTensor(shape_a, alpha * a1.data + beta * a2.data)
        lhs = contract(mixed, b, ["i", "m"]).data
        rhs = alpha * contract(a1, b, ["i", "m"]).data + beta * contract(a2, b, ["i", "m"]).data
        scale = np.abs(rhs).max()
        assert np.abs(lhs - rhs).max() <= 1e-12 * max(scale, 1.0)

    def test_errors(self):
        a = LabeledTensor.from_array(np.zeros((2, 3)), ["i", "j"])
        b = LabeledTensor.from_array(np.zeros((4, 2)), ["j", "k"])
        with pytest.raises(ValueError, match="shared axis"):
            contract(a, b, ["i", "k"])
        c = LabeledTensor.from_array(np.zeros((3, 2)), ["j", "k"])
        with pytest.raises(ValueError, match="neither input"):
            contract(a, c, ["i", "z"])


class TestReshape:
    def test_fold_three_axes(self):
        rng = np.random.default_rng(3)
        t = LabeledTensor.from_array(rng.normal(size=(2, 2, 64)), ["x", "y", "k"])
        folded = reshape_fold(t, [("n", ["x", "y", "k"])])
        assert folded.axes == (("n", 256),)
        assert np.array_equal(folded.data, t.data.reshape(256))

    def test_fold_single_axis_is_identity(self):
        t = LabeledTensor.from_array(np.arange(4.0), ["i"])
        folded = reshape_fold(t, [("j", ["i"])])
        assert folded.axes == (("j", 4),)
        assert np.array_equal(folded.data, t.data)

    def test_fold_unfold_round_trip_bit_exact(self):
        rng = np.random.default_rng(4)
        t = LabeledTensor.from_array(rng.normal(size=(3, 2, 4, 5)), ["a", "b", "c", "d"])
        folded = reshape_fold(t, [("bc", ["b", "c"])])
        restored = reshape_unfold(folded, [("bc", [("b", 2), ("c", 4)])])
        assert restored.axes == t.axes
        assert np.array_equal(restored.data, t.data)

    def test_non_contiguous_fold_rejected(self):
        t = LabeledTensor.from_array(np.zeros((2, 3, 4)), ["a", "b", "c"])
        with pytest.raises(ValueError, match="contiguous"):
            reshape_fold(t, [("ac", ["a", "c"])])


class TestElementwise:
    def test_add_sub_mul(self):
        rng = np.random.default_rng(5)
        data = rng.normal(size=(3, 4))
        t = LabeledTensor.from_array(data, ["i", "j"])
        zeros = LabeledTensor.from_array(np.zeros((3, 4)), ["i", "j"])
        ones = LabeledTensor.from_array(np.ones((3, 4)), ["i", "j"])
        assert np.array_equal(elementwise(t, zeros, "add").data, data)
        assert np.array_equal(elementwise(t, ones, "mul").data, data)
        assert np.array_equal(elementwise(t, t, "sub").data, np.zeros((3, 4)))

    def test_axis_mismatch(self):
        t = LabeledTensor.from_array(np.zeros((2, 2)), ["i", "j"])
        u = LabeledTensor.from_array(np.zeros((2, 2)), ["i", "k"])
        with pytest.raises(ValueError, match="axis mismatch"):
            elementwise(t, u, "add")
