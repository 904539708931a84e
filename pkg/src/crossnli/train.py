"""Supervised NLI fine-tuning loop shared by the source-language and the
translation-baseline pipelines.

Single-threaded and deterministic: given the same model state, dataset,
hyper-parameters, and seed, two runs produce bit-identical weights. The
optional ``batch_hook`` is the only difference between plain fine-tuning
and the per-batch translation variant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .data import NliExample
from .errors import DataError
from .nli import CLASS_INDEX, NliModel
from .optim import Adam, TrainingHyperParams


@dataclass
class EpochStats:
    epoch: int
    mean_loss: float
    accuracy: float | None = None


@dataclass
class TrainingLog:
    step_losses: list[float] = field(default_factory=list)
    epochs: list[EpochStats] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.epochs[-1].mean_loss


def _batches(order: np.ndarray, batch_size: int):
    for start in range(0, len(order), batch_size):
        yield order[start : start + batch_size]


def finetune_nli(
    model: NliModel,
    dataset: Sequence[NliExample],
    hyper: TrainingHyperParams,
    seed: int = 0,
    batch_hook: Callable[[list[NliExample]], list[NliExample]] | None = None,
    on_batch_end: Callable[[int, float], None] | None = None,
) -> TrainingLog:
    """Minimize cross-entropy over softmax outputs with Adam; encoder and
    head update together. Gradients accumulate across ``accumulation_step``
    mini-batches before each optimizer step (the tail group keeps the same
    divisor so the update rule is constant)."""
    dataset = list(dataset)
    if not dataset:
        raise DataError("empty training dataset")
    for example in dataset:
        if example.label not in CLASS_INDEX:
            raise DataError(f"unknown label {example.label!r}")

    optimizer = Adam.from_hyper(model.parameters(), hyper)
    rng = np.random.default_rng(seed)
    log = TrainingLog()
    step = 0
    for epoch in range(hyper.epochs):
        order = rng.permutation(len(dataset))
        loss_sum = 0.0
        correct = 0
        pending = 0
        for group in _batches(order, hyper.batch_size):
            batch = [dataset[i] for i in group]
            if batch_hook is not None:
                batch = batch_hook(batch)
            losses = []
            for example in batch:
                probs = model.forward_pair(example.premise, example.hypothesis)
                gold = CLASS_INDEX[example.label]
                losses.append(ad.cross_entropy(probs, gold))
                if int(np.argmax(probs.data)) == gold:
                    correct += 1
            total = losses[0]
            for loss in losses[1:]:
                total = total + loss
            batch_loss = total * Tensor(1.0 / len(batch))
            ad.backward(batch_loss)
            pending += 1
            step += 1
            value = batch_loss.item()
            log.step_losses.append(value)
            loss_sum += value * len(batch)
            if pending == hyper.accumulation_step:
                optimizer.step()
                pending = 0
            if on_batch_end is not None:
                on_batch_end(step, value)
        if pending:
            optimizer.step()
        log.epochs.append(
            EpochStats(epoch, loss_sum / len(dataset), correct / len(dataset))
        )
    return log
