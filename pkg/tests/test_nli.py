"""Classifier-head tests: feature combination oracle, the six-layer GELU
stack, paper-scale shapes, pair prediction, and end-to-end gradients."""

import numpy as np
import pytest

from conftest import gradcheck, rerandomize
from crossnli import autodiff as ad
from crossnli.autodiff import Tensor, backward, cross_entropy, gelu, softmax
from crossnli.encoder import EncoderConfig, EncoderModel
from crossnli.errors import ShapeError
from crossnli.nli import (
    CLASSES,
    CLASS_INDEX,
    HeadConfig,
    NliHead,
    NliModel,
    combine_features,
)
from crossnli.vocab import Vocabulary


@pytest.fixture
def vocab():
    return Vocabulary("a man woman plays soccer sport sleeps reads book".split())


def tiny_model(vocab, seed=0):
    config = EncoderConfig(embed_dim=8, num_layers=1, num_heads=2, ffn_dim=16, max_tokens_length=16)
    encoder = EncoderModel(config, len(vocab), seed=seed)
    head = NliHead(HeadConfig(input_dim=16, hidden_dims=(12, 8, 6, 4, 4)), seed=seed + 1)
    return NliModel(encoder, head, vocab)


class TestCombineFeatures:
    def test_direct_arithmetic_oracle(self):
        out = combine_features(Tensor([1.0, 2.0]), Tensor([3.0, 4.0]))
        np.testing.assert_array_equal(out.data, [3.0, 8.0, -2.0, -2.0])

    def test_self_pair_zero_difference(self):
        u = Tensor([1.0, -2.0, 0.5])
        out = combine_features(u, Tensor(u.data.copy()))
        np.testing.assert_array_equal(out.data[:3], u.data * u.data)
        np.testing.assert_array_equal(out.data[3:], np.zeros(3))

    def test_zero_vector_first_argument(self):
        v = Tensor([2.0, -1.0])
        out = combine_features(Tensor([0.0, 0.0]), v)
        np.testing.assert_array_equal(out.data, [0.0, 0.0, -2.0, 1.0])

    def test_length_is_twice_embed_dim(self):
        out = combine_features(Tensor(np.ones(5)), Tensor(np.ones(5)))
        assert out.shape == (10,)

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            combine_features(Tensor([1.0]), Tensor([1.0, 2.0]))

    def test_product_commutes_difference_anticommutes(self):
        rng = np.random.default_rng(0)
        u, v = rng.normal(size=4), rng.normal(size=4)
        ab = combine_features(Tensor(u), Tensor(v)).data
        ba = combine_features(Tensor(v), Tensor(u)).data
        np.testing.assert_allclose(ab[:4], ba[:4], rtol=1e-15)
        np.testing.assert_allclose(ab[4:], -ba[4:], rtol=1e-15)

    def test_differentiable_in_both_arguments(self):
        rng = np.random.default_rng(1)
        u = Tensor(rng.normal(size=4), requires_grad=True)
        v = Tensor(rng.normal(size=4), requires_grad=True)
        t = Tensor(rng.normal(size=8))
        assert gradcheck(lambda: ad.mse_loss(combine_features(u, v), t), [u, v]) < 1e-4


class TestHeadConfig:
    def test_paper_scale_ladder(self):
        config = HeadConfig.paper_scale()
        assert config.dims == (1536, 1024, 512, 256, 128, 64, 3)

    def test_desk_scale_ladder(self):
        config = HeadConfig.for_embed_dim(64)
        assert config.dims == (128, 32, 16, 8, 8, 4, 3)

    def test_exactly_six_layers_enforced(self):
        with pytest.raises(ValueError):
            HeadConfig(input_dim=16, hidden_dims=(8, 8, 8))

    def test_input_always_twice_embed_dim(self):
        for d in (8, 16, 64, 100, 768):
            assert HeadConfig.for_embed_dim(d).input_dim == 2 * d


class TestClassify:
    def test_zero_network_gives_uniform(self):
        head = NliHead(HeadConfig(input_dim=4, hidden_dims=(4, 4, 4, 4, 4)), seed=0)
        for p in head.parameters():
            p.data = np.zeros_like(p.data)
        prediction = head.classify(np.ones(4))
        np.testing.assert_allclose(prediction.probabilities, np.full(3, 1 / 3), atol=1e-12)
        assert prediction.predicted_label == CLASSES[0]  # tie -> lowest index

    def test_paper_scale_forward(self):
        head = NliHead(HeadConfig.paper_scale(), seed=0)
        prediction = head.classify(np.random.default_rng(0).normal(size=1536))
        assert prediction.probabilities.shape == (3,)
        assert abs(prediction.probabilities.sum() - 1.0) < 1e-6

    def test_layer_by_layer_matrix_oracle(self):
        # straight-line forward oracle: plain numpy affine+GELU chain
        config = HeadConfig(input_dim=6, hidden_dims=(5, 4, 4, 4, 4))
        head = NliHead(config, seed=9)
        rng = np.random.default_rng(11)
        rerandomize({f"h{i}": p for i, p in enumerate(head.parameters())}, rng)
        x = rng.normal(size=6)
        expected = x.copy()
        for i in range(6):
            w = head.params[f"layer{i}.w"].data
            b = head.params[f"layer{i}.b"].data
            expected = gelu(Tensor(expected @ w + b)).data
        exp = np.exp(expected - expected.max())
        expected_probs = exp / exp.sum()
        prediction = head.classify(x)
        np.testing.assert_allclose(prediction.probabilities, expected_probs, atol=1e-6)

    def test_probabilities_valid_simplex(self):
        head = NliHead(HeadConfig(input_dim=4, hidden_dims=(4, 4, 4, 4, 4)), seed=2)
        rng = np.random.default_rng(3)
        for _ in range(25):
            p = head.classify(rng.normal(size=4)).probabilities
            assert abs(p.sum() - 1.0) < 1e-6
            assert np.all(p >= 0) and np.all(p <= 1)

    def test_wrong_feature_length(self):
        head = NliHead(HeadConfig(input_dim=4, hidden_dims=(4, 4, 4, 4, 4)), seed=0)
        with pytest.raises(ShapeError):
            head.classify(np.ones(5))


class TestPredictPair:
    def test_composition_matches_manual_pipeline(self, vocab):
        model = tiny_model(vocab)
        premise, hypothesis = "a man plays soccer", "a man plays sport"
        prediction = model.predict_pair(premise, hypothesis)
        u = model.encoder.encode_sentence(premise, vocab).vector
        v = model.encoder.encode_sentence(hypothesis, vocab).vector
        manual = model.head.classify(combine_features(Tensor(u), Tensor(v)).data)
        np.testing.assert_array_equal(prediction.probabilities, manual.probabilities)
        assert prediction.predicted_label == manual.predicted_label

    def test_self_pair_difference_half_zero(self, vocab):
        model = tiny_model(vocab)
        ids = model._ids("a man plays soccer")
        with ad.no_grad():
            u = model.encoder.forward(ids)
            features = combine_features(u, model.encoder.forward(ids))
        np.testing.assert_array_equal(features.data[8:], np.zeros(8))

    def test_siamese_replay_determinism(self, vocab):
        model = tiny_model(vocab)
        first = model.predict_pair("a man reads book", "a man reads book")
        second = model.predict_pair("a man reads book", "a man reads book")
        np.testing.assert_array_equal(first.probabilities, second.probabilities)

    def test_asymmetry_witness_exists(self, vocab):
        # the difference feature is signed, so swapped inputs can change the
        # label; search a randomly weighted model for a witness pair
        texts = ["a man plays soccer", "a man sleeps", "a woman reads book", "a man plays sport"]
        for seed in range(10):
            model = tiny_model(vocab, seed=seed)
            rerandomize(model.named_parameters(), np.random.default_rng(seed + 100))
            for a in texts:
                for b in texts:
                    if a == b:
                        continue
                    ab = model.predict_pair(a, b).predicted_label
                    ba = model.predict_pair(b, a).predicted_label
                    if ab != ba:
                        return
        pytest.fail("no asymmetry witness found across 10 models")

    def test_end_to_end_gradient(self, vocab):
        model = tiny_model(vocab)
        rerandomize(model.named_parameters(), np.random.default_rng(42))
        gold = CLASS_INDEX["neutral"]

        def loss():
            return cross_entropy(model.forward_pair("a man plays soccer", "a woman sleeps"), gold)

        worst = gradcheck(loss, list(model.named_parameters().values()))
        assert worst < 1e-4

    def test_head_dim_mismatch_rejected(self, vocab):
        config = EncoderConfig(embed_dim=8, num_layers=1, num_heads=2, ffn_dim=16)
        encoder = EncoderModel(config, len(vocab), seed=0)
        head = NliHead(HeadConfig(input_dim=10, hidden_dims=(8, 8, 4, 4, 4)), seed=0)
        with pytest.raises(ShapeError):
            NliModel(encoder, head, vocab)
