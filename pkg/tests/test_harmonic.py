import numpy as np
import pytest

from jpegspace.harmonic import (
    dct2_forward,
    dct2_inverse,
    dct_basis,
    dct_least_squares_check,
    dct_matrix,
    haar_dwt2,
    haar_idwt2,
    hadamard,
)
from jpegspace.tensor import LabeledTensor


def dct2_loop_oracle(block):
    """Four-nested-loop evaluation of the 8x8 DCT definition."""
    n = block.shape[0]
    out = np.zeros((n, n))
    scale = 2.0 / n

    def c(u):
        return 1.0 / np.sqrt(2.0) if u == 0 else 1.0

    for a in range(n):
        for b in range(n):
            total = 0.0
            for x in range(n):
                for y in range(n):
                    total += (
                        block[x, y]
                        * np.cos((2 * x + 1) * a * np.pi / (2 * n))
                        * np.cos((2 * y + 1) * b * np.pi / (2 * n))
                    )
            out[a, b] = scale * c(a) * c(b) * total
    return out


class TestDct:
    def test_constant_block_has_only_dc(self):
        block = LabeledTensor.from_array(np.full((8, 8), 3.0), ["m", "n"])
        coef = dct2_forward(block).data
        assert coef[0, 0] == pytest.approx(24.0, abs=1e-12)  # 8 * c
        coef_ac = coef.copy()
        coef_ac[0, 0] = 0.0
        assert np.abs(coef_ac).max() < 1e-12

    def test_dc_only_inverts_to_constant(self):
        coef = np.zeros((8, 8))
        coef[0, 0] = 8.0
        block = dct2_inverse(LabeledTensor.from_array(coef, ["a", "b"])).data
        assert np.allclose(block, 1.0, atol=1e-12)

    def test_zero_coefficients_invert_to_zero(self):
        coef = LabeledTensor.from_array(np.zeros((8, 8)), ["a", "b"])
        assert np.abs(dct2_inverse(coef).data).max() == 0.0

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            block = LabeledTensor.from_array(rng.normal(size=(8, 8)), ["m", "n"])
            back = dct2_inverse(dct2_forward(block))
            assert np.abs(back.data - block.data).max() < 1e-10

    def test_matches_nested_loop_oracle(self):
        rng = np.random.default_rng(1)
        block = rng.uniform(-128, 127, size=(8, 8))
        got = dct2_forward(LabeledTensor.from_array(block, ["m", "n"])).data
        want = dct2_loop_oracle(block)
        assert np.abs(got - want).max() < 1e-12

    @pytest.mark.parametrize("n", [4, 8, 16])
    def test_orthonormality(self, n):
        d = dct_matrix(n)
        assert np.abs(d @ d.T - np.eye(n)).max() < 1e-10
        assert np.abs(np.linalg.norm(d, axis=1) - 1.0).max() < 1e-12

    @pytest.mark.parametrize("n", [4, 8])
    def test_basis_composes_to_identity(self, n):
        basis = dct_basis(n)
        fwd = basis.forward.data.reshape(n * n, n * n)
        inv = basis.inverse.data.reshape(n * n, n * n)
        assert np.abs(inv @ fwd - np.eye(n * n)).max() < 1e-10

    def test_size_mismatch_rejected(self):
        with pytest.raises(ValueError):
            dct2_forward(LabeledTensor.from_array(np.zeros((4, 8)), ["m", "n"]))


class TestMeanVarianceTheorem:
    def test_holds_on_random_zero_mean_blocks(self):
        rng = np.random.default_rng(2)
        blocks = rng.uniform(-1, 1, size=(10_000, 8, 8))
        blocks -= blocks.mean(axis=(1, 2), keepdims=True)
        d = dct_matrix(8)
        coef = np.einsum("am,bn,Lmn->Lab", d, d, blocks, optimize=True)
        var_pixel = (blocks**2).mean(axis=(1, 2))
        mean_sq = (coef**2).mean(axis=(1, 2))
        assert np.abs(var_pixel - mean_sq).max() < 1e-10


class TestLeastSquares:
    def test_full_basis_is_exact(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=8)
        result = dct_least_squares_check(x, 8)
        assert result["approx_error"] == pytest.approx(0.0, abs=1e-20)
        assert result["is_minimal"]

    def test_m1_on_zero_mean_signal_is_zero(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=8)
        x -= x.mean()
        # Only the DC coefficient is kept and DC = 0, so p_1 is identically 0.
        from jpegspace.harmonic import truncated_reconstruction

        recon = truncated_reconstruction(x, 1)
        assert np.abs(recon).max() < 1e-12

    def test_beats_perturbations_and_matches_normal_equations(self):
        rng = np.random.default_rng(5)
        for trial in range(5):
            x = rng.normal(size=8)
            previous = np.inf
            for m in range(1, 9):
                result = dct_least_squares_check(x, m, n_perturbations=1000, seed=trial)
                assert result["is_minimal"], (trial, m)
                assert abs(result["approx_error"] - result["lstsq_error"]) < 1e-9
                assert result["approx_error"] <= previous + 1e-12  # non-increasing
                previous = result["approx_error"]

    def test_m_out_of_range(self):
        with pytest.raises(ValueError):
            dct_least_squares_check(np.zeros(8), 0)
        with pytest.raises(ValueError):
            dct_least_squares_check(np.zeros(8), 9)


class TestHadamard:
    def test_base_case(self):
        assert hadamard(0).data.tolist() == [[1.0]]

    def test_one_step(self):
        assert hadamard(1).data.tolist() == [[1.0, 1.0], [1.0, -1.0]]

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_orthogonality(self, m):
        h = hadamard(m).data
        n = 2**m
        assert np.array_equal(h @ h.T, n * np.eye(n))
        assert set(np.unique(h)) == {-1.0, 1.0}

    def test_negative_power_rejected(self):
        with pytest.raises(ValueError):
            hadamard(-1)


class TestHaar:
    def test_constant_image(self):
        img = LabeledTensor.from_array(np.full((8, 6), 5.0), ["h", "w"])
        bands = haar_dwt2(img)
        assert np.allclose(bands["LL"].data, 10.0)  # (4 * 5) / 2
        for name in ("LH", "HL", "HH"):
            assert np.abs(bands[name].data).max() < 1e-12

    def test_two_by_two(self):
        a, b, c, d = 1.0, 2.0, 3.0, 4.0
        img = LabeledTensor.from_array(np.array([[a, b], [c, d]]), ["h", "w"])
        bands = haar_dwt2(img)
        assert bands["LL"].data[0, 0] == pytest.approx((a + b + c + d) / 2)
        assert bands["LH"].data[0, 0] == pytest.approx((a - b + c - d) / 2)
        assert bands["HL"].data[0, 0] == pytest.approx((a + b - c - d) / 2)
        assert bands["HH"].data[0, 0] == pytest.approx((a - b - c + d) / 2)

    def test_energy_preservation_and_reconstruction(self):
        rng = np.random.default_rng(6)
        img = LabeledTensor.from_array(rng.normal(size=(16, 12)), ["h", "w"])
        bands = haar_dwt2(img)
        energy_in = float((img.data**2).sum())
        energy_out = sum(float((band.data**2).sum()) for band in bands.values())
        assert abs(energy_in - energy_out) < 1e-9
        back = haar_idwt2(bands)
        assert np.abs(back.data - img.data).max() < 1e-10

    def test_odd_dimensions_rejected(self):
        with pytest.raises(ValueError):
            haar_dwt2(LabeledTensor.from_array(np.zeros((3, 4)), ["h", "w"]))
