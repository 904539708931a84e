"""Engine-level tests: forward oracles, gradients vs finite differences,
and the algebraic properties of softmax / mse / cross-entropy."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import gradcheck
from crossnli import autodiff as ad
from crossnli.autodiff import (
    Tensor,
    backward,
    cross_entropy,
    gelu,
    layer_norm,
    mse_loss,
    softmax,
)
from crossnli.errors import LabelError, NumericalError, ShapeError


def erf_series(x: float) -> float:
    """Independent Maclaurin-series erf oracle (converges fast for |x| < 4)."""
    total = 0.0
    term = x
    n = 0
    while abs(term) > 1e-18:
        total += term / (2 * n + 1)
        n += 1
        term *= -x * x / n
    return 2.0 / math.sqrt(math.pi) * total


def gelu_oracle(x: float) -> float:
    return 0.5 * x * (1.0 + erf_series(x / math.sqrt(2.0)))


class TestGelu:
    def test_zero(self):
        assert gelu(Tensor(0.0)).item() == 0.0

    def test_asymptote_large_positive(self):
        for x in (6.0, 8.0, 12.0):
            assert abs(gelu(Tensor(x)).item() - x) < 1e-6

    def test_against_erf_series_oracle(self):
        # frozen from the series oracle: gelu(1.0) = 0.8413447460685429...
        assert gelu(Tensor(1.0)).item() == pytest.approx(0.8413447460685429, abs=1e-15)
        for x in (-2.5, -1.5, -0.3, 0.5, 1.0, 2.0, 3.7):
            assert gelu(Tensor(x)).item() == pytest.approx(gelu_oracle(x), abs=1e-14)

    def test_shape_preserved(self):
        out = gelu(Tensor(np.zeros((3, 5))))
        assert out.shape == (3, 5)

    def test_non_finite_rejected(self):
        with pytest.raises(NumericalError):
            gelu(Tensor([1.0, np.nan]))
        with pytest.raises(NumericalError):
            gelu(Tensor([np.inf]))

    def test_gradient(self):
        rng = np.random.default_rng(0)
        x = Tensor(rng.normal(size=7), requires_grad=True)
        assert gradcheck(lambda: ad.sum_(gelu(x)), [x]) < 1e-4


class TestSoftmax:
    def test_uniform_logits(self):
        np.testing.assert_allclose(softmax(Tensor([0.0, 0.0, 0.0])).data, np.full(3, 1 / 3))

    def test_stability_under_large_logits(self):
        out = softmax(Tensor([1000.0, 0.0, 0.0])).data
        assert np.all(np.isfinite(out))
        np.testing.assert_allclose(out, [1.0, 0.0, 0.0], atol=1e-12)

    def test_direct_exp_sum_oracle(self):
        # brute-force oracle: exp each logit, divide by the sum
        logits = [1.0, 2.0, 3.0]
        exps = [math.exp(v) for v in logits]
        expected = [e / sum(exps) for e in exps]
        np.testing.assert_allclose(softmax(Tensor(logits)).data, expected, rtol=1e-15)

    def test_empty_vector_rejected(self):
        with pytest.raises(ShapeError):
            softmax(Tensor(np.zeros(0)))

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=12), st.floats(-30, 30))
    def test_sums_to_one_and_shift_invariant(self, logits, shift):
        base = softmax(Tensor(logits)).data
        assert abs(base.sum() - 1.0) < 1e-9
        assert np.all(base >= 0)
        shifted = softmax(Tensor([v + shift for v in logits])).data
        np.testing.assert_allclose(base, shifted, atol=1e-9)

    def test_batch_axis(self):
        out = softmax(Tensor([[0.0, 0.0], [5.0, 5.0]]), axis=-1).data
        np.testing.assert_allclose(out, np.full((2, 2), 0.5))

    def test_gradient(self):
        rng = np.random.default_rng(1)
        x = Tensor(rng.normal(size=5), requires_grad=True)
        w = Tensor(rng.normal(size=5))
        assert gradcheck(lambda: ad.sum_(softmax(x) * w), [x]) < 1e-4


class TestMseLoss:
    def test_identical_inputs(self):
        v = Tensor(np.arange(6.0).reshape(2, 3))
        assert mse_loss(v, Tensor(v.data.copy())).item() == 0.0

    def test_unit_differences(self):
        assert mse_loss(Tensor([1.0, 0.0]), Tensor([0.0, 1.0])).item() == 1.0

    def test_random_pair_against_loop_oracle(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(4, 8))
        b = rng.normal(size=(4, 8))
        total = 0.0
        for i in range(4):
            for j in range(8):
                total += (a[i, j] - b[i, j]) ** 2
        expected = total / 32.0
        assert mse_loss(Tensor(a), Tensor(b)).item() == pytest.approx(expected, rel=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            mse_loss(Tensor([1.0, 2.0]), Tensor([1.0, 2.0, 3.0]))

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(-100, 100).map(lambda v: round(v, 3)), min_size=1, max_size=8),
        st.lists(st.floats(-100, 100).map(lambda v: round(v, 3)), min_size=1, max_size=8),
    )
    def test_non_negative_zero_iff_equal(self, xs, ys):
        n = min(len(xs), len(ys))
        a, b = Tensor(xs[:n]), Tensor(ys[:n])
        value = mse_loss(a, b).item()
        assert value >= 0.0
        assert (value == 0.0) == bool(np.array_equal(a.data, b.data))

    def test_gradient_zero_at_minimum(self):
        v = Tensor([1.0, -2.0, 3.0], requires_grad=True)
        loss = mse_loss(v, Tensor([1.0, -2.0, 3.0]))
        backward(loss)
        np.testing.assert_array_equal(v.grad, np.zeros(3))

    def test_gradient(self):
        rng = np.random.default_rng(2)
        a = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
        b = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
        assert gradcheck(lambda: mse_loss(a, b), [a, b]) < 1e-4


class TestCrossEntropy:
    def test_uniform_distribution(self):
        for gold in range(3):
            value = cross_entropy(Tensor([1 / 3, 1 / 3, 1 / 3]), gold).item()
            assert value == pytest.approx(math.log(3.0), rel=1e-12)

    def test_perfect_prediction(self):
        assert cross_entropy(Tensor([1.0, 0.0, 0.0]), 0).item() == pytest.approx(0.0, abs=1e-12)

    def test_direct_computation_oracle(self):
        value = cross_entropy(Tensor([0.7, 0.2, 0.1]), 1).item()
        assert value == pytest.approx(-math.log(0.2), rel=1e-15)
        assert value == pytest.approx(1.6094379124341003, abs=1e-14)

    def test_gold_out_of_range(self):
        with pytest.raises(LabelError):
            cross_entropy(Tensor([0.5, 0.3, 0.2]), 3)
        with pytest.raises(LabelError):
            cross_entropy(Tensor([0.5, 0.3, 0.2]), -1)

    def test_unnormalized_rejected(self):
        with pytest.raises(NumericalError):
            cross_entropy(Tensor([0.9, 0.9, 0.9]), 0)

    def test_clamp_keeps_log_finite(self):
        value = cross_entropy(Tensor([1.0, 0.0, 0.0]), 1).item()
        assert value == pytest.approx(-math.log(1e-12))


class TestBackward:
    def test_requires_scalar(self):
        t = Tensor([1.0, 2.0], requires_grad=True)
        with pytest.raises(ShapeError):
            backward(t)

    def test_softmax_cross_entropy_closed_form(self):
        logits = Tensor([0.0, 0.0, 0.0], requires_grad=True)
        backward(cross_entropy(softmax(logits), 0))
        np.testing.assert_allclose(logits.grad, [-2 / 3, 1 / 3, 1 / 3], atol=1e-12)

    def test_repeated_calls_accumulate(self):
        x = Tensor([2.0], requires_grad=True)
        loss = ad.sum_(x * x)
        backward(loss)
        first = x.grad.copy()
        backward(loss)
        np.testing.assert_allclose(x.grad, 2 * first)

    def test_mse_gradient_splits_sign(self):
        a = Tensor([1.0, 2.0], requires_grad=True)
        b = Tensor([0.0, 0.0], requires_grad=True)
        backward(mse_loss(a, b))
        np.testing.assert_allclose(a.grad, [1.0, 2.0])
        np.testing.assert_allclose(b.grad, [-1.0, -2.0])

    def test_no_grad_suppresses_recording(self):
        x = Tensor([1.0], requires_grad=True)
        with ad.no_grad():
            y = x * Tensor([3.0])
        assert y._vjp is None and not y.requires_grad

    def test_diamond_graph_accumulates_paths(self):
        x = Tensor([3.0], requires_grad=True)
        y = x * x + x * Tensor([2.0])  # d/dx = 2x + 2 = 8
        backward(ad.sum_(y))
        np.testing.assert_allclose(x.grad, [8.0])


class TestPrimitiveGradients:
    """Every differentiable primitive against central finite differences,
    across 20 seeds."""

    @pytest.mark.parametrize("seed", range(20))
    def test_all_ops_composite(self, seed):
        rng = np.random.default_rng(seed)
        W = Tensor(rng.normal(size=(6, 4)), requires_grad=True)
        M = Tensor(rng.normal(size=(4, 4)), requires_grad=True)
        x = Tensor(rng.normal(size=6), requires_grad=True)
        gain = Tensor(rng.uniform(0.8, 1.2, size=4), requires_grad=True)
        bias = Tensor(rng.normal(0, 0.1, size=4), requires_grad=True)
        target = Tensor(rng.normal(size=(3, 2)))
        idx = list(rng.integers(0, 4, size=3))

        def loss():
            h = layer_norm(gelu(x @ W), gain, bias)  # (4,)
            rows = ad.take_rows(M + h, idx)  # gather with broadcasted add
            cols = ad.take_cols(rows @ M.T, 1, 3)  # matmul, transpose, slice
            mixed = ad.concat([cols * Tensor(2.0), ad.powc(cols, 2.0)], axis=1)
            pooled = ad.mean(ad.reshape(mixed, (3, 4)), axis=1, keepdims=True)
            scaled = cols - softmax(pooled, axis=0)  # broadcast (3,1) over (3,2)
            probe = ad.sum_(scaled * scaled, axis=1, keepdims=True) - scaled
            return mse_loss(probe, target)

        params = [W, M, x, gain, bias]
        assert gradcheck(loss, params) < 1e-4

    @pytest.mark.parametrize("seed", range(5))
    def test_matmul_variants(self, seed):
        rng = np.random.default_rng(seed)
        A = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
        B = Tensor(rng.normal(size=(4, 2)), requires_grad=True)
        v = Tensor(rng.normal(size=4), requires_grad=True)
        u = Tensor(rng.normal(size=3), requires_grad=True)
        assert gradcheck(lambda: ad.sum_(ad.powc(A @ B, 2.0)), [A, B]) < 1e-4
        assert gradcheck(lambda: ad.sum_(ad.powc(v @ B, 2.0)), [v, B]) < 1e-4
        assert gradcheck(lambda: ad.sum_(ad.powc(A @ v, 2.0)), [A, v]) < 1e-4
        assert gradcheck(lambda: ad.powc(u @ (A @ v), 2.0), [u, A, v]) < 1e-4


class TestTensorInvariants:
    def test_data_length_matches_shape(self):
        t = Tensor(np.zeros((2, 3, 4)))
        assert t.data.size == 2 * 3 * 4

    def test_grad_matches_shape_after_backward(self):
        x = Tensor(np.ones((3, 2)), requires_grad=True)
        backward(ad.sum_(x * x))
        assert x.grad.shape == x.data.shape

    def test_values_finite_after_training_style_pass(self):
        rng = np.random.default_rng(3)
        W = Tensor(rng.normal(size=(5, 3)), requires_grad=True)
        x = Tensor(rng.normal(size=5))
        loss = cross_entropy(softmax(x @ W), 2)
        backward(loss)
        assert np.isfinite(loss.data).all()
        assert np.isfinite(W.grad).all()
