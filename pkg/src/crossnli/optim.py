"""Adam optimizer with decoupled weight decay and gradient accumulation.

Weight decay is applied directly to the parameters rather than folded into
the gradient (AdamW semantics), since it is configured as a standalone
hyper-parameter. Accumulated gradients are divided by ``accumulation_step``
before the update so the effective learning rate does not depend on the
accumulation setting.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .autodiff import Tensor
from .errors import OptimizerStateError


@dataclass
class TrainingHyperParams:
    """One training regime: batching, truncation bounds, and Adam settings."""

    batch_size: int
    max_sentence_length: int
    max_tokens_length: int
    epochs: int
    learning_rate: float
    epsilon: float
    weight_decay: float
    accumulation_step: int

    def __post_init__(self):
        positive = {
            "batch_size": self.batch_size,
            "max_sentence_length": self.max_sentence_length,
            "max_tokens_length": self.max_tokens_length,
            "epochs": self.epochs,
            "epsilon": self.epsilon,
            "accumulation_step": self.accumulation_step,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        # learning_rate = 0 is the legal null-optimizer degenerate case
        for name, value in (("learning_rate", self.learning_rate), ("weight_decay", self.weight_decay)):
            if value < 0:
                raise ValueError(f"{name} must be non-negative, got {value}")
        if self.max_tokens_length > self.max_sentence_length:
            raise ValueError("max_tokens_length cannot exceed max_sentence_length")

    @classmethod
    def nli_source(cls) -> "TrainingHyperParams":
        """Source-language NLI fine-tuning regime."""
        return cls(
            batch_size=8,
            max_sentence_length=256,
            max_tokens_length=128,
            epochs=1,
            learning_rate=2e-5,
            epsilon=1e-8,
            weight_decay=0.0,
            accumulation_step=8,
        )

    @classmethod
    def distillation(cls) -> "TrainingHyperParams":
        """Teacher-to-student embedding distillation regime."""
        return cls(
            batch_size=24,
            max_sentence_length=256,
            max_tokens_length=128,
            epochs=6,
            learning_rate=2e-5,
            epsilon=1e-6,
            weight_decay=1e-2,
            accumulation_step=4,
        )

    @classmethod
    def translation_finetune(cls) -> "TrainingHyperParams":
        """Per-batch machine-translation fine-tuning regime."""
        return cls(
            batch_size=8,
            max_sentence_length=256,
            max_tokens_length=256,
            epochs=5,
            learning_rate=4e-5,
            epsilon=1e-16,
            weight_decay=1e-4,
            accumulation_step=4,
        )

    def scaled(self, **overrides) -> "TrainingHyperParams":
        """Copy with desk-scale overrides (smaller batches, larger lr, ...)."""
        return replace(self, **overrides)


@dataclass
class AdamState:
    """Per-parameter Adam buffers; moments match the parameter shape."""

    step_count: int
    first_moment: np.ndarray
    second_moment: np.ndarray


class Adam:
    """Adam with bias correction, decoupled weight decay, and fixed betas."""

    def __init__(
        self,
        params: Sequence[Tensor],
        learning_rate: float,
        epsilon: float = 1e-8,
        weight_decay: float = 0.0,
        accumulation_step: int = 1,
        beta1: float = 0.9,
        beta2: float = 0.999,
    ):
        self.params = list(params)
        self.learning_rate = learning_rate
        self.epsilon = epsilon
        self.weight_decay = weight_decay
        self.accumulation_step = accumulation_step
        self.beta1 = beta1
        self.beta2 = beta2
        self.state = [
            AdamState(0, np.zeros_like(p.data), np.zeros_like(p.data)) for p in self.params
        ]

    @classmethod
    def from_hyper(cls, params: Sequence[Tensor], hyper: TrainingHyperParams) -> "Adam":
        return cls(
            params,
            learning_rate=hyper.learning_rate,
            epsilon=hyper.epsilon,
            weight_decay=hyper.weight_decay,
            accumulation_step=hyper.accumulation_step,
        )

    def step(self) -> None:
        """Apply one update from the accumulated gradients, then zero them."""
        for param, state in zip(self.params, self.state):
            if param.grad is None:
                raise OptimizerStateError("parameter has no gradient; run backward first")
            grad = param.grad / self.accumulation_step
            state.step_count += 1
            state.first_moment *= self.beta1
            state.first_moment += (1.0 - self.beta1) * grad
            state.second_moment *= self.beta2
            state.second_moment += (1.0 - self.beta2) * grad * grad
            m_hat = state.first_moment / (1.0 - self.beta1 ** state.step_count)
            v_hat = state.second_moment / (1.0 - self.beta2 ** state.step_count)
            update = m_hat / (np.sqrt(v_hat) + self.epsilon)
            if self.weight_decay:
                update = update + self.weight_decay * param.data
            param.data -= self.learning_rate * update
        self.zero_grad()

    def zero_grad(self) -> None:
        for param in self.params:
            param.grad = None
