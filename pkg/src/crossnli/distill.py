"""Knowledge distillation of sentence embeddings across languages.

A frozen teacher encoder maps source-language sentences; a trainable
student encoder (initialized as an exact copy of the teacher) maps the
target-language side of each parallel pair. Training minimizes the mean
squared error between the two embeddings, averaged over the mini-batch and
the embedding dimensions, so gradient flows only into the student. The
source-trained classifier head is reused unchanged on top of the student.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .data import ParallelPair
from .encoder import EncoderModel
from .errors import DataError, ShapeError
from .nli import NliHead, NliModel
from .optim import Adam, TrainingHyperParams
from .train import EpochStats, TrainingLog
from .vocab import Vocabulary, tokenize


@dataclass
class TeacherStudentSetup:
    """Frozen teacher, trainable student, and the vocabulary they share."""

    teacher: EncoderModel
    student: EncoderModel
    vocab: Vocabulary

    def __post_init__(self):
        if self.teacher.config.embed_dim != self.student.config.embed_dim:
            raise ShapeError("teacher and student must share the embedding dimension")

    @classmethod
    def from_teacher(cls, teacher: EncoderModel, vocab: Vocabulary) -> "TeacherStudentSetup":
        return cls(teacher=teacher, student=teacher.clone(), vocab=vocab)


def kd_loss(
    batch: Sequence[ParallelPair],
    setup: TeacherStudentSetup,
    max_tokens_length: int = 128,
    max_sentence_length: int = 256,
) -> Tensor:
    """Batch-mean squared error between teacher and student embeddings.

    The teacher side is computed without graph recording, so its
    parameters never receive gradient.
    """
    batch = list(batch)
    if not batch:
        raise DataError("empty distillation batch")
    teacher_vectors = []
    student_vectors = []
    for pair in batch:
        source_ids = tokenize(pair.source_sentence, setup.vocab, max_tokens_length, max_sentence_length)
        target_ids = tokenize(pair.target_sentence, setup.vocab, max_tokens_length, max_sentence_length)
        with ad.no_grad():
            teacher_vectors.append(Tensor(setup.teacher.forward(source_ids).data))
        student_vectors.append(setup.student.forward(target_ids))
    return ad.mse_loss(ad.concat(student_vectors), ad.concat(teacher_vectors))


def distill(
    setup: TeacherStudentSetup,
    corpus: Sequence[ParallelPair],
    hyper: TrainingHyperParams,
    seed: int = 0,
) -> TrainingLog:
    """Epochs of shuffled mini-batch Adam on ``kd_loss``; teacher untouched."""
    corpus = list(corpus)
    if not corpus:
        raise DataError("empty parallel corpus")
    optimizer = Adam.from_hyper(setup.student.parameters(), hyper)
    rng = np.random.default_rng(seed)
    log = TrainingLog()
    for epoch in range(hyper.epochs):
        order = rng.permutation(len(corpus))
        loss_sum = 0.0
        pending = 0
        for start in range(0, len(corpus), hyper.batch_size):
            batch = [corpus[i] for i in order[start : start + hyper.batch_size]]
            loss = kd_loss(batch, setup, hyper.max_tokens_length, hyper.max_sentence_length)
            ad.backward(loss)
            pending += 1
            value = loss.item()
            log.step_losses.append(value)
            loss_sum += value * len(batch)
            if pending == hyper.accumulation_step:
                optimizer.step()
                pending = 0
        if pending:
            optimizer.step()
        log.epochs.append(EpochStats(epoch, loss_sum / len(corpus)))
    return log


def assemble_target_nli(
    student: EncoderModel,
    head: NliHead,
    vocab: Vocabulary,
    max_tokens_length: int | None = None,
    max_sentence_length: int = 256,
) -> NliModel:
    """Compose the distilled student with the source-trained head, unchanged."""
    return NliModel(student, head, vocab, max_tokens_length, max_sentence_length)
