"""Feature combination and the six-layer GELU classifier head.

The pair of sentence embeddings (u, v) is combined into
``[u * v ; u - v]`` — element-wise product followed by the signed
difference, premise minus hypothesis — and fed through six affine layers,
every one of them GELU-activated (including the last), then softmax over
the three NLI classes.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .encoder import EncoderModel
from .errors import ShapeError
from .vocab import Vocabulary, tokenize

ENTAILMENT = "entailment"
NEUTRAL = "neutral"
CONTRADICTION = "contradiction"
CLASSES = (ENTAILMENT, NEUTRAL, CONTRADICTION)
CLASS_INDEX = {label: i for i, label in enumerate(CLASSES)}

NUM_HEAD_LAYERS = 6


def combine_features(u: Tensor, v: Tensor) -> Tensor:
    """[u ⊙ v ; u − v] feature vector of length 2d; differentiable in both."""
    if u.shape != v.shape or u.data.ndim != 1:
        raise ShapeError(f"embedding shape mismatch: {u.shape} vs {v.shape}")
    return ad.concat([u * v, u - v], axis=0)


@dataclass(frozen=True)
class HeadConfig:
    """Layer widths for the classifier; always six layers down to 3 classes."""

    input_dim: int
    hidden_dims: tuple[int, ...]
    num_classes: int = 3

    def __post_init__(self):
        if len(self.hidden_dims) != NUM_HEAD_LAYERS - 1:
            raise ValueError(
                f"expected {NUM_HEAD_LAYERS - 1} hidden widths, got {len(self.hidden_dims)}"
            )
        if self.input_dim <= 0 or any(d <= 0 for d in self.hidden_dims):
            raise ValueError("all layer widths must be positive")

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_dims, self.num_classes)

    @classmethod
    def paper_scale(cls) -> "HeadConfig":
        return cls(input_dim=1536, hidden_dims=(1024, 512, 256, 128, 64))

    @classmethod
    def for_embed_dim(cls, embed_dim: int) -> "HeadConfig":
        """Head sized for a 2×embed_dim input; named scales are pinned."""
        if embed_dim == 768:
            return cls.paper_scale()
        if embed_dim == 64:
            return cls(input_dim=128, hidden_dims=(32, 16, 8, 8, 4))
        width = 2 * embed_dim
        ratio = (3.0 / width) ** (1.0 / NUM_HEAD_LAYERS)
        hidden = tuple(
            max(3, round(width * ratio ** k)) for k in range(1, NUM_HEAD_LAYERS)
        )
        return cls(input_dim=width, hidden_dims=hidden)


@dataclass(frozen=True)
class NliPrediction:
    """Class probabilities and the argmax label (ties -> lowest index)."""

    probabilities: np.ndarray
    predicted_label: str

    @property
    def class_index(self) -> int:
        return CLASS_INDEX[self.predicted_label]


class NliHead:
    """Six GELU-activated affine layers followed by softmax."""

    def __init__(self, config: HeadConfig, seed: int = 0):
        self.config = config
        rng = np.random.default_rng(seed)
        self.params: dict[str, Tensor] = {}
        dims = config.dims
        for i in range(NUM_HEAD_LAYERS):
            # fan-in scaling keeps the 6-deep GELU stack from collapsing
            # its logits toward zero at init
            std = np.sqrt(2.0 / dims[i])
            self.params[f"layer{i}.w"] = Tensor(
                rng.normal(0.0, std, size=(dims[i], dims[i + 1])), requires_grad=True
            )
            self.params[f"layer{i}.b"] = Tensor(np.zeros(dims[i + 1]), requires_grad=True)

    def named_parameters(self) -> dict[str, Tensor]:
        return dict(self.params)

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def clone(self) -> "NliHead":
        return copy.deepcopy(self)

    def forward(self, features: Tensor) -> Tensor:
        """Differentiable path from a feature vector to class probabilities."""
        if features.data.ndim != 1 or features.shape[0] != self.config.input_dim:
            raise ShapeError(
                f"feature length {features.shape} does not match head input "
                f"{self.config.input_dim}"
            )
        x = features
        for i in range(NUM_HEAD_LAYERS):
            x = ad.gelu(x @ self.params[f"layer{i}.w"] + self.params[f"layer{i}.b"])
        return ad.softmax(x)

    def classify(self, features) -> NliPrediction:
        value = features if isinstance(features, Tensor) else Tensor(np.asarray(features))
        with ad.no_grad():
            probs = self.forward(value).data
        return NliPrediction(probs, CLASSES[int(np.argmax(probs))])


class NliModel:
    """Siamese encoder + classifier head + vocabulary, bundled for inference."""

    def __init__(
        self,
        encoder: EncoderModel,
        head: NliHead,
        vocab: Vocabulary,
        max_tokens_length: int | None = None,
        max_sentence_length: int = 256,
    ):
        if head.config.input_dim != 2 * encoder.config.embed_dim:
            raise ShapeError(
                f"head input {head.config.input_dim} != 2 x encoder dim "
                f"{encoder.config.embed_dim}"
            )
        self.encoder = encoder
        self.head = head
        self.vocab = vocab
        self.max_tokens_length = max_tokens_length or encoder.config.max_tokens_length
        self.max_sentence_length = max_sentence_length

    def named_parameters(self) -> dict[str, Tensor]:
        named = {f"encoder.{k}": v for k, v in self.encoder.named_parameters().items()}
        named.update({f"head.{k}": v for k, v in self.head.named_parameters().items()})
        return named

    def parameters(self) -> list[Tensor]:
        return list(self.named_parameters().values())

    def _ids(self, text: str) -> list[int]:
        return tokenize(text, self.vocab, self.max_tokens_length, self.max_sentence_length)

    def forward_pair(self, premise: str, hypothesis: str) -> Tensor:
        """Differentiable probabilities for one sentence pair."""
        u = self.encoder.forward(self._ids(premise))
        v = self.encoder.forward(self._ids(hypothesis))
        return self.head.forward(combine_features(u, v))

    def predict_pair(self, premise: str, hypothesis: str) -> NliPrediction:
        with ad.no_grad():
            probs = self.forward_pair(premise, hypothesis).data
        return NliPrediction(probs, CLASSES[int(np.argmax(probs))])
