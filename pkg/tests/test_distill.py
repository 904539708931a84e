"""Distillation tests: the batch-MSE objective against a double-loop
oracle, teacher frozenness, the identity fixed point, and transfer of the
composed student."""

import numpy as np
import pytest

from crossnli import autodiff as ad
from crossnli.data import ParallelPair
from crossnli.distill import TeacherStudentSetup, assemble_target_nli, distill, kd_loss
from crossnli.encoder import EncoderConfig, EncoderModel
from crossnli.errors import DataError
from crossnli.nli import HeadConfig, NliHead
from crossnli.optim import TrainingHyperParams
from crossnli.synth import build_cipher, build_grammar, gen_sentences, parallel_from_sentences
from crossnli.vocab import Vocabulary

GRAMMAR = build_grammar(12)
VOCAB = Vocabulary(GRAMMAR.words())


def make_setup(seed=0, embed_dim=16):
    config = EncoderConfig(embed_dim=embed_dim, num_layers=1, num_heads=2, ffn_dim=32, max_tokens_length=16)
    teacher = EncoderModel(config, len(VOCAB), seed=seed)
    return TeacherStudentSetup.from_teacher(teacher, VOCAB)


def kd_hyper(**overrides):
    base = dict(
        batch_size=8,
        max_sentence_length=256,
        max_tokens_length=16,
        epochs=1,
        learning_rate=1e-3,
        epsilon=1e-6,
        weight_decay=1e-2,
        accumulation_step=1,
    )
    base.update(overrides)
    return TrainingHyperParams(**base)


def double_loop_mse(teacher_vectors, student_vectors):
    """Independent Eq-style oracle: explicit loops over pairs and dims."""
    total = 0.0
    count = 0
    for t, s in zip(teacher_vectors, student_vectors):
        for j in range(len(t)):
            total += (t[j] - s[j]) ** 2
            count += 1
    return total / count


class TestKdLoss:
    def test_empty_batch_rejected(self):
        with pytest.raises(DataError):
            kd_loss([], make_setup())

    def test_identical_setup_and_sentences_gives_zero(self):
        setup = make_setup()
        batch = [ParallelPair(s, s) for s in gen_sentences(0, 6, GRAMMAR)]
        assert kd_loss(batch, setup, 16).item() == 0.0

    def test_matches_double_loop_oracle(self):
        setup = make_setup(seed=1)
        # drift the student so the loss is non-trivial
        rng = np.random.default_rng(2)
        for p in setup.student.parameters():
            p.data = p.data + rng.normal(0, 0.05, size=p.data.shape)
        sentences = gen_sentences(3, 10, GRAMMAR)
        cipher = build_cipher(GRAMMAR.words(), 5)
        batch = parallel_from_sentences(sentences, cipher)
        value = kd_loss(batch, setup, 16).item()
        from crossnli.vocab import tokenize

        teacher_vecs = [
            setup.teacher.encode_tokens(tokenize(p.source_sentence, VOCAB, 16)) for p in batch
        ]
        student_vecs = [
            setup.student.encode_tokens(tokenize(p.target_sentence, VOCAB, 16)) for p in batch
        ]
        assert value == pytest.approx(double_loop_mse(teacher_vecs, student_vecs), abs=1e-9)

    def test_hand_fixed_embedding_reduction(self):
        # reduction convention: mean over batch AND embedding dims;
        # T(s1)=[1,0], S(t1)=[0,0], T(s2)=[0,1], S(t2)=[0,1] -> mean of
        # squared diffs {1,0,0,0} = 0.25
        t = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        s = [np.array([0.0, 0.0]), np.array([0.0, 1.0])]
        from crossnli.autodiff import Tensor, mse_loss, concat

        value = mse_loss(concat([Tensor(v) for v in s]), concat([Tensor(v) for v in t])).item()
        assert value == 0.25
        assert value == pytest.approx(double_loop_mse(t, s), abs=1e-15)

    def test_gradient_never_reaches_teacher(self):
        setup = make_setup(seed=4)
        rng = np.random.default_rng(5)
        for p in setup.student.parameters():
            p.data = p.data + rng.normal(0, 0.05, size=p.data.shape)
        batch = [ParallelPair(s, s) for s in gen_sentences(6, 8, GRAMMAR)]
        loss = kd_loss(batch, setup, 16)
        ad.backward(loss)
        for p in setup.teacher.parameters():
            assert p.grad is None
        assert any(
            p.grad is not None and np.any(p.grad != 0) for p in setup.student.parameters()
        )


class TestDistill:
    def test_empty_corpus_rejected(self):
        with pytest.raises(DataError):
            distill(make_setup(), [], kd_hyper())

    def test_paper_kd_regime_representable(self):
        hyper = TrainingHyperParams.distillation()
        assert (hyper.batch_size, hyper.epochs, hyper.accumulation_step) == (24, 6, 4)
        assert (hyper.learning_rate, hyper.epsilon, hyper.weight_decay) == (2e-5, 1e-6, 1e-2)

    def test_teacher_bit_identical_across_run(self):
        setup = make_setup(seed=6)
        frozen = {k: v.data.copy() for k, v in setup.teacher.named_parameters().items()}
        cipher = build_cipher(GRAMMAR.words(), 7)
        corpus = parallel_from_sentences(gen_sentences(8, 60, GRAMMAR), cipher)
        distill(setup, corpus, kd_hyper(epochs=2), seed=9)
        for name, tensor in setup.teacher.named_parameters().items():
            np.testing.assert_array_equal(tensor.data, frozen[name])

    def test_identity_corpus_fixed_point(self):
        # student = teacher copy, target = source, wd = 0: loss starts at 0
        # and the student never drifts
        setup = make_setup(seed=10)
        corpus = [ParallelPair(s, s) for s in gen_sentences(11, 40, GRAMMAR)]
        log = distill(setup, corpus, kd_hyper(weight_decay=0.0), seed=12)
        assert log.step_losses[0] == 0.0
        assert log.epochs[0].mean_loss == 0.0
        for (name, student), teacher in zip(
            setup.student.named_parameters().items(), setup.teacher.parameters()
        ):
            np.testing.assert_allclose(student.data, teacher.data, atol=1e-6)

    def test_cipher_distillation_reduces_loss(self):
        setup = make_setup(seed=13)
        cipher = build_cipher(GRAMMAR.words(), 14)
        corpus = parallel_from_sentences(gen_sentences(15, 300, GRAMMAR), cipher)
        log = distill(setup, corpus, kd_hyper(epochs=4, batch_size=24), seed=16)
        assert log.epochs[-1].mean_loss < log.epochs[0].mean_loss
        # weak monotonicity against the first epoch
        assert all(e.mean_loss <= log.epochs[0].mean_loss for e in log.epochs[1:])

    def test_logs_one_stats_entry_per_epoch(self):
        setup = make_setup(seed=17)
        corpus = [ParallelPair(s, s) for s in gen_sentences(18, 16, GRAMMAR)]
        log = distill(setup, corpus, kd_hyper(epochs=3), seed=19)
        assert [e.epoch for e in log.epochs] == [0, 1, 2]


class TestAssembleTargetNli:
    def test_identity_transfer_preserves_predictions(self):
        setup = make_setup(seed=20)
        head = NliHead(HeadConfig.for_embed_dim(16), seed=21)
        source = assemble_target_nli(setup.teacher, head, VOCAB)
        composed = assemble_target_nli(setup.student, head, VOCAB)
        for sentence in gen_sentences(22, 10, GRAMMAR):
            a = source.predict_pair(sentence, sentence)
            b = composed.predict_pair(sentence, sentence)
            np.testing.assert_array_equal(a.probabilities, b.probabilities)

    def test_head_untouched_by_distillation(self):
        setup = make_setup(seed=23)
        head = NliHead(HeadConfig.for_embed_dim(16), seed=24)
        before = {k: v.data.copy() for k, v in head.named_parameters().items()}
        cipher = build_cipher(GRAMMAR.words(), 25)
        corpus = parallel_from_sentences(gen_sentences(26, 40, GRAMMAR), cipher)
        distill(setup, corpus, kd_hyper(), seed=27)
        for name, tensor in head.named_parameters().items():
            np.testing.assert_array_equal(tensor.data, before[name])

    def test_dimension_mismatch_rejected(self):
        setup = make_setup(seed=28, embed_dim=16)
        wrong_head = NliHead(HeadConfig.for_embed_dim(8), seed=29)
        from crossnli.errors import ShapeError

        with pytest.raises(ShapeError):
            assemble_target_nli(setup.student, wrong_head, VOCAB)
