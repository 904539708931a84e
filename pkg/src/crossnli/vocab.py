"""Whitespace tokenizer and vocabulary with fixed reserved ids.

Vocabulary file format: plain UTF-8 text, one token per line; the id of a
token is its line number plus the reserved-id count.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyInputError

PAD_TOKEN, UNK_TOKEN, BOS_TOKEN, EOS_TOKEN = "<pad>", "<unk>", "<bos>", "<eos>"
RESERVED_TOKENS = (PAD_TOKEN, UNK_TOKEN, BOS_TOKEN, EOS_TOKEN)
PAD_ID, UNK_ID, BOS_ID, EOS_ID = 0, 1, 2, 3


def normalize_text(text: str) -> str:
    """Collapse runs of whitespace and strip the ends."""
    return " ".join(text.split())


class Vocabulary:
    """Bijective token-to-id map over lowercase tokens; ids 0-3 reserved."""

    def __init__(self, tokens: Iterable[str]):
        self._id_to_token: list[str] = list(RESERVED_TOKENS)
        self._token_to_id: dict[str, int] = {t: i for i, t in enumerate(RESERVED_TOKENS)}
        for token in tokens:
            token = token.strip().lower()
            if not token or token in self._token_to_id:
                continue
            self._token_to_id[token] = len(self._id_to_token)
            self._id_to_token.append(token)

    def __len__(self) -> int:
        return len(self._id_to_token)

    def __contains__(self, token: str) -> bool:
        return token.lower() in self._token_to_id

    def id_of(self, token: str) -> int:
        return self._token_to_id.get(token.lower(), UNK_ID)

    def token_of(self, token_id: int) -> str:
        return self._id_to_token[token_id]

    def tokens(self) -> list[str]:
        """Non-reserved tokens in id order."""
        return self._id_to_token[len(RESERVED_TOKENS):]

    def save(self, path) -> None:
        Path(path).write_text("\n".join(self.tokens()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(line.strip() for line in lines if line.strip())


def tokenize(
    text: str,
    vocab: Vocabulary,
    max_tokens_length: int,
    max_sentence_length: int | None = None,
) -> list[int]:
    """Lowercase, whitespace-split, map to ids, wrap in BOS/EOS, truncate.

    Character-level truncation to ``max_sentence_length`` happens before
    tokenization; the id sequence (including BOS/EOS) is then capped at
    ``max_tokens_length``, keeping the EOS marker.
    """
    text = normalize_text(text)
    if not text:
        raise EmptyInputError("cannot tokenize empty or whitespace-only text")
    if max_sentence_length is not None:
        text = text[:max_sentence_length]
    words = text.lower().split()
    ids = [BOS_ID] + [vocab.id_of(w) for w in words] + [EOS_ID]
    if len(ids) > max_tokens_length:
        ids = ids[: max_tokens_length - 1] + [EOS_ID]
    return ids


def detokenize(ids: Sequence[int], vocab: Vocabulary) -> str:
    """Inverse of tokenize for display; drops reserved markers."""
    return " ".join(
        vocab.token_of(i) for i in ids if i >= len(RESERVED_TOKENS) or i == UNK_ID
    )
