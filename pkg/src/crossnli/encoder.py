"""Tiny pre-norm transformer sentence encoder with mean pooling.

The same weights are applied independently to each sentence of a pair
(siamese contract): encoding one sentence never sees the other. PAD
positions are masked out of attention keys and excluded from pooling, so
appending padding leaves the embedding unchanged.
"""

from __future__ import annotations

import copy
import hashlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ShapeError, TokenizationError
from .vocab import PAD_ID, Vocabulary, tokenize

_MASK_VALUE = -1e9


@dataclass(frozen=True)
class EncoderConfig:
    """Architecture sizes; ``embed_dim`` must divide evenly across heads."""

    embed_dim: int = 64
    num_layers: int = 2
    num_heads: int = 4
    ffn_dim: int = 128
    max_tokens_length: int = 128

    def __post_init__(self):
        for name in ("embed_dim", "num_layers", "num_heads", "ffn_dim", "max_tokens_length"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.embed_dim % self.num_heads != 0:
            raise ValueError(
                f"embed_dim {self.embed_dim} not divisible by num_heads {self.num_heads}"
            )

    @classmethod
    def desk_scale(cls) -> "EncoderConfig":
        return cls()

    @classmethod
    def paper_scale(cls) -> "EncoderConfig":
        """Production-width encoder: 768-dim embeddings (classifier input 1536)."""
        return cls(embed_dim=768, num_layers=2, num_heads=12, ffn_dim=3072)


@dataclass(frozen=True)
class SentenceEmbedding:
    """Fixed-dimension sentence vector plus a stable hash of its source text."""

    vector: np.ndarray
    source_text_hash: str


def text_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sinusoidal_positions(length: int, dim: int) -> np.ndarray:
    """Fixed sin/cos positional table of shape (length, dim)."""
    positions = np.arange(length, dtype=np.float64)[:, None]
    index = np.arange(dim, dtype=np.float64)[None, :]
    angles = positions / np.power(10000.0, (2.0 * (index // 2)) / dim)
    table = np.zeros((length, dim))
    table[:, 0::2] = np.sin(angles[:, 0::2])
    table[:, 1::2] = np.cos(angles[:, 1::2])
    return table


class EncoderModel:
    """Embedding lookup + sinusoidal positions + pre-norm transformer blocks.

    ``calls`` counts forward invocations; the split-inference cache path is
    validated by observing it stay at zero.
    """

    def __init__(self, config: EncoderConfig, vocab_size: int, seed: int = 0):
        self.config = config
        self.vocab_size = vocab_size
        self.calls = 0
        self._positions = sinusoidal_positions(config.max_tokens_length, config.embed_dim)
        rng = np.random.default_rng(seed)
        d, f = config.embed_dim, config.ffn_dim

        def weight(*shape):
            return Tensor(rng.normal(0.0, 0.02, size=shape), requires_grad=True)

        def ones(n):
            return Tensor(np.ones(n), requires_grad=True)

        def zeros(n):
            return Tensor(np.zeros(n), requires_grad=True)

        self.params: dict[str, Tensor] = {"tok_embed": weight(vocab_size, d)}
        for i in range(config.num_layers):
            p = f"layer{i}."
            self.params[p + "ln1_gain"] = ones(d)
            self.params[p + "ln1_bias"] = zeros(d)
            for name in ("wq", "wk", "wv", "wo"):
                self.params[p + name] = weight(d, d)
            for name in ("bq", "bk", "bv", "bo"):
                self.params[p + name] = zeros(d)
            self.params[p + "ln2_gain"] = ones(d)
            self.params[p + "ln2_bias"] = zeros(d)
            self.params[p + "w_ff1"] = weight(d, f)
            self.params[p + "b_ff1"] = zeros(f)
            self.params[p + "w_ff2"] = weight(f, d)
            self.params[p + "b_ff2"] = zeros(d)
        self.params["ln_f_gain"] = ones(d)
        self.params["ln_f_bias"] = zeros(d)

    def named_parameters(self) -> dict[str, Tensor]:
        return dict(self.params)

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def clone(self) -> "EncoderModel":
        """Deep copy sharing nothing; the distillation student starts here."""
        other = copy.deepcopy(self)
        other.calls = 0
        return other

    def forward(self, ids: Sequence[int]) -> Tensor:
        """Differentiable encoding of one token-id sequence into a (d,) vector."""
        ids = list(ids)
        length = len(ids)
        if not 1 <= length <= self.config.max_tokens_length:
            raise ShapeError(
                f"sequence length {length} outside [1, {self.config.max_tokens_length}]"
            )
        for i in ids:
            if not 0 <= i < self.vocab_size:
                raise TokenizationError(f"token id {i} outside vocabulary of {self.vocab_size}")
        self.calls += 1
        d = self.config.embed_dim
        scale = Tensor(np.sqrt(float(d)))
        x = ad.take_rows(self.params["tok_embed"], ids) * scale + Tensor(self._positions[:length])

        pad_mask = None
        if any(i == PAD_ID for i in ids):
            row = np.where(np.asarray(ids) == PAD_ID, _MASK_VALUE, 0.0)
            pad_mask = Tensor(row[None, :])

        for i in range(self.config.num_layers):
            p = f"layer{i}."
            h = ad.layer_norm(x, self.params[p + "ln1_gain"], self.params[p + "ln1_bias"])
            x = x + self._attention(h, p, pad_mask)
            h = ad.layer_norm(x, self.params[p + "ln2_gain"], self.params[p + "ln2_bias"])
            f = ad.gelu(h @ self.params[p + "w_ff1"] + self.params[p + "b_ff1"])
            x = x + (f @ self.params[p + "w_ff2"] + self.params[p + "b_ff2"])

        x = ad.layer_norm(x, self.params["ln_f_gain"], self.params["ln_f_bias"])
        keep = [i for i, t in enumerate(ids) if t != PAD_ID]
        return ad.mean(ad.take_rows(x, keep), axis=0)

    def _attention(self, h: Tensor, prefix: str, pad_mask: Tensor | None) -> Tensor:
        """Multi-head self-attention; PAD key columns are masked out."""
        heads = self.config.num_heads
        dk = self.config.embed_dim // heads
        q = h @ self.params[prefix + "wq"] + self.params[prefix + "bq"]
        k = h @ self.params[prefix + "wk"] + self.params[prefix + "bk"]
        v = h @ self.params[prefix + "wv"] + self.params[prefix + "bv"]
        inv_sqrt_dk = Tensor(1.0 / np.sqrt(dk))
        outputs = []
        for head in range(heads):
            lo, hi = head * dk, (head + 1) * dk
            qh = ad.take_cols(q, lo, hi)
            kh = ad.take_cols(k, lo, hi)
            vh = ad.take_cols(v, lo, hi)
            scores = (qh @ kh.T) * inv_sqrt_dk
            if pad_mask is not None:
                scores = scores + pad_mask
            outputs.append(ad.softmax(scores, axis=-1) @ vh)
        merged = ad.concat(outputs, axis=1)
        return merged @ self.params[prefix + "wo"] + self.params[prefix + "bo"]

    def encode_tokens(self, ids: Sequence[int]) -> np.ndarray:
        """Inference-path encoding; returns a plain (d,) vector."""
        with ad.no_grad():
            return self.forward(ids).data

    def encode_sentence(
        self,
        text: str,
        vocab: Vocabulary,
        max_tokens_length: int | None = None,
        max_sentence_length: int | None = None,
    ) -> SentenceEmbedding:
        limit = min(
            self.config.max_tokens_length,
            max_tokens_length or self.config.max_tokens_length,
        )
        ids = tokenize(text, vocab, limit, max_sentence_length)
        return SentenceEmbedding(self.encode_tokens(ids), text_hash(text))


def encode_pair(
    model: EncoderModel,
    vocab: Vocabulary,
    premise: str,
    hypothesis: str,
    max_tokens_length: int | None = None,
    max_sentence_length: int | None = None,
) -> tuple[SentenceEmbedding, SentenceEmbedding]:
    """Two independent invocations of the same weights (siamese contract)."""
    u = model.encode_sentence(premise, vocab, max_tokens_length, max_sentence_length)
    v = model.encode_sentence(hypothesis, vocab, max_tokens_length, max_sentence_length)
    return u, v
