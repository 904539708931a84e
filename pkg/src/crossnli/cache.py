"""File-backed sentence-embedding cache for split inference.

The recommended inference layout encodes every sentence once up front;
classification then runs off the cache without ever invoking the encoder.
Entries are keyed by the text hash and bound to the producing encoder
checkpoint id, so a cache built under different weights is rejected.
Vectors are stored in float64, making a cache hit bit-identical to a
fresh encode.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .data import NliExample
from .encoder import EncoderModel, text_hash
from .errors import DataError, StaleCacheError
from .metrics import EvalReport, evaluate
from .nli import CLASSES, NliHead, combine_features
from .vocab import Vocabulary, tokenize

MAGIC = b"XNLICCH\x01"
VERSION = 1


class EmbeddingCache:
    """Map from text hash to embedding, bound to one encoder checkpoint."""

    def __init__(self, checkpoint_id: str):
        self.checkpoint_id = checkpoint_id
        self.entries: dict[str, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def has(self, text: str) -> bool:
        return text_hash(text) in self.entries

    def get(self, text: str) -> np.ndarray:
        key = text_hash(text)
        if key not in self.entries:
            raise DataError(f"text not present in embedding cache: {text[:40]!r}")
        return self.entries[key]

    def put(self, text: str, vector: np.ndarray) -> None:
        self.entries[text_hash(text)] = np.asarray(vector, dtype=np.float64)

    def save(self, path) -> None:
        path = Path(path)
        out = bytearray()
        out += MAGIC
        out += struct.pack("<I", VERSION)
        encoded = self.checkpoint_id.encode("utf-8")
        out += struct.pack("<I", len(encoded)) + encoded
        out += struct.pack("<I", len(self.entries))
        for key, vector in sorted(self.entries.items()):
            key_bytes = key.encode("utf-8")
            out += struct.pack("<I", len(key_bytes)) + key_bytes
            out += struct.pack("<I", vector.size)
            out += vector.astype("<f8").tobytes()
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_bytes(bytes(out))
        os.replace(tmp, path)

    @classmethod
    def load(cls, path, expected_checkpoint_id: str | None = None) -> "EmbeddingCache":
        blob = Path(path).read_bytes()
        if blob[:8] != MAGIC:
            raise DataError(f"{path}: not an embedding cache")
        offset = 8
        (version,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        if version != VERSION:
            raise DataError(f"{path}: unsupported cache version {version}")
        (id_len,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        cache_id = blob[offset : offset + id_len].decode("utf-8")
        offset += id_len
        if expected_checkpoint_id is not None and cache_id != expected_checkpoint_id:
            raise StaleCacheError(
                f"cache built under checkpoint {cache_id}, expected {expected_checkpoint_id}"
            )
        cache = cls(cache_id)
        (count,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        for _ in range(count):
            (key_len,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            key = blob[offset : offset + key_len].decode("utf-8")
            offset += key_len
            (dim,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            vector = np.frombuffer(blob, dtype="<f8", count=dim, offset=offset).copy()
            offset += dim * 8
            cache.entries[key] = vector
        return cache


def embed_corpus(
    texts: Iterable[str],
    encoder: EncoderModel,
    vocab: Vocabulary,
    cache_path,
    checkpoint_id: str,
    max_tokens_length: int | None = None,
    max_sentence_length: int = 256,
) -> EmbeddingCache:
    """Embed each distinct text once, extending an existing cache when the
    checkpoint id matches (a mismatch raises rather than silently mixing)."""
    cache_path = Path(cache_path)
    if cache_path.exists():
        cache = EmbeddingCache.load(cache_path, expected_checkpoint_id=checkpoint_id)
    else:
        cache = EmbeddingCache(checkpoint_id)
    limit = max_tokens_length or encoder.config.max_tokens_length
    for text in texts:
        if cache.has(text):
            continue
        ids = tokenize(text, vocab, limit, max_sentence_length)
        cache.put(text, encoder.encode_tokens(ids))
    cache.save(cache_path)
    return cache


def classify_cached(cache: EmbeddingCache, head: NliHead, premise: str, hypothesis: str):
    """Head-only prediction from cached embeddings; no encoder involved."""
    u = Tensor(cache.get(premise))
    v = Tensor(cache.get(hypothesis))
    with ad.no_grad():
        features = combine_features(u, v)
    return head.classify(features)


def evaluate_nli_cached(
    examples: Sequence[NliExample], cache: EmbeddingCache, head: NliHead
) -> EvalReport:
    """Three-class evaluation entirely from the cache (split inference)."""
    if not examples:
        raise DataError("empty evaluation set")
    predictions = [
        classify_cached(cache, head, e.premise, e.hypothesis).predicted_label
        for e in examples
    ]
    return evaluate(predictions, [e.label for e in examples], CLASSES)
