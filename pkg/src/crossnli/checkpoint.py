"""Binary model checkpoints: named tensor table with atomic writes.

Layout (all integers little-endian):
  8-byte magic | u32 version | u8 kind | u8 dtype | i64 seed
  | u32 config length + UTF-8 key=value lines
  | u32 tensor count
  | per tensor: u32 name length, name bytes, u32 rank, u32 dims..., payload

Payload floats are 32-bit by default; ``wide=True`` stores 64-bit so the
round trip is bit-exact against float64 training weights. Files are
written to a temporary sibling and atomically renamed, so a partial write
never passes the magic check.
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoder import EncoderConfig, EncoderModel
from .errors import CheckpointFormatError, CheckpointIntegrityError, ShapeError
from .nli import HeadConfig, NliHead, NliModel
from .vocab import Vocabulary

MAGIC = b"XNLICKP\x01"
VERSION = 1
KINDS = ("encoder", "head", "composed")


@dataclass
class Checkpoint:
    """Deserialized checkpoint; tensors are float64 arrays after load."""

    kind: str
    seed: int
    config: dict[str, str]
    tensors: dict[str, np.ndarray]
    version: int = VERSION


def _config_bytes(config: dict[str, str]) -> bytes:
    lines = [f"{key}={value}" for key, value in sorted(config.items())]
    return "\n".join(lines).encode("utf-8")


def _parse_config(blob: bytes) -> dict[str, str]:
    config = {}
    for line in blob.decode("utf-8").splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("=")
        config[key] = value
    return config


def save_checkpoint(
    path,
    kind: str,
    tensors: dict[str, np.ndarray],
    config: dict[str, str] | None = None,
    seed: int = 0,
    wide: bool = False,
) -> None:
    if kind not in KINDS:
        raise ValueError(f"unknown checkpoint kind {kind!r}")
    path = Path(path)
    dtype = np.float64 if wide else np.float32
    blob = _config_bytes(config or {})
    out = bytearray()
    out += MAGIC
    out += struct.pack("<I", VERSION)
    out += struct.pack("<BB", KINDS.index(kind), 1 if wide else 0)
    out += struct.pack("<q", seed)
    out += struct.pack("<I", len(blob)) + blob
    out += struct.pack("<I", len(tensors))
    for name, array in tensors.items():
        encoded = name.encode("utf-8")
        array = np.asarray(array, dtype=dtype)
        out += struct.pack("<I", len(encoded)) + encoded
        out += struct.pack("<I", array.ndim)
        out += struct.pack(f"<{array.ndim}I", *array.shape)
        out += array.astype("<" + dtype().dtype.char).tobytes()
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(bytes(out))
    os.replace(tmp, path)


class _Reader:
    def __init__(self, blob: bytes, context: str):
        self.blob = blob
        self.offset = 0
        self.context = context

    def take(self, count: int) -> bytes:
        if self.offset + count > len(self.blob):
            raise CheckpointIntegrityError(
                f"checkpoint truncated while reading {self.context}"
            )
        chunk = self.blob[self.offset : self.offset + count]
        self.offset += count
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def i64(self) -> int:
        return struct.unpack("<q", self.take(8))[0]


def load_checkpoint(path) -> Checkpoint:
    blob = Path(path).read_bytes()
    if blob[:8] != MAGIC:
        raise CheckpointFormatError(f"{path}: bad magic bytes")
    reader = _Reader(blob, "header")
    reader.take(8)
    version = reader.u32()
    if version != VERSION:
        raise CheckpointFormatError(f"{path}: unsupported version {version}")
    kind_index, wide = struct.unpack("<BB", reader.take(2))
    if kind_index >= len(KINDS):
        raise CheckpointFormatError(f"{path}: unknown kind tag {kind_index}")
    seed = reader.i64()
    config = _parse_config(reader.take(reader.u32()))
    count = reader.u32()
    dtype = np.dtype("<f8") if wide else np.dtype("<f4")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        reader.context = f"tensor table (after {len(tensors)} tensors)"
        name = reader.take(reader.u32()).decode("utf-8")
        reader.context = f"tensor {name!r}"
        rank = reader.u32()
        dims = struct.unpack(f"<{rank}I", reader.take(4 * rank))
        size = int(np.prod(dims)) if dims else 1
        payload = reader.take(size * dtype.itemsize)
        tensors[name] = (
            np.frombuffer(payload, dtype=dtype).reshape(dims).astype(np.float64)
        )
    return Checkpoint(KINDS[kind_index], seed, config, tensors, version)


def checkpoint_id(path) -> str:
    """Stable identifier of a checkpoint file's exact contents."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# model-level bridges


def _encoder_config_echo(model: EncoderModel) -> dict[str, str]:
    c = model.config
    return {
        "embed_dim": str(c.embed_dim),
        "num_layers": str(c.num_layers),
        "num_heads": str(c.num_heads),
        "ffn_dim": str(c.ffn_dim),
        "max_tokens_length": str(c.max_tokens_length),
        "vocab_size": str(model.vocab_size),
    }


def _head_config_echo(head: NliHead) -> dict[str, str]:
    return {
        "head_input_dim": str(head.config.input_dim),
        "head_hidden_dims": ",".join(str(d) for d in head.config.hidden_dims),
    }


def save_encoder(model: EncoderModel, path, seed: int = 0, wide: bool = False) -> None:
    tensors = {name: t.data for name, t in model.named_parameters().items()}
    save_checkpoint(path, "encoder", tensors, _encoder_config_echo(model), seed, wide)


def save_head(head: NliHead, path, seed: int = 0, wide: bool = False) -> None:
    tensors = {name: t.data for name, t in head.named_parameters().items()}
    save_checkpoint(path, "head", tensors, _head_config_echo(head), seed, wide)


def save_composed(model: NliModel, path, seed: int = 0, wide: bool = False) -> None:
    tensors = {name: t.data for name, t in model.named_parameters().items()}
    config = _encoder_config_echo(model.encoder)
    config.update(_head_config_echo(model.head))
    config["max_sentence_length"] = str(model.max_sentence_length)
    save_checkpoint(path, "composed", tensors, config, seed, wide)


def _fill(params: dict, tensors: dict[str, np.ndarray], prefix: str = "") -> None:
    for name, tensor in params.items():
        key = prefix + name
        if key not in tensors:
            raise CheckpointIntegrityError(f"checkpoint missing tensor {key!r}")
        if tensors[key].shape != tensor.data.shape:
            raise CheckpointIntegrityError(
                f"tensor {key!r} has shape {tensors[key].shape}, model expects {tensor.data.shape}"
            )
        tensor.data = tensors[key].copy()


def encoder_from_checkpoint(ckpt: Checkpoint, prefix: str = "") -> EncoderModel:
    config = EncoderConfig(
        embed_dim=int(ckpt.config["embed_dim"]),
        num_layers=int(ckpt.config["num_layers"]),
        num_heads=int(ckpt.config["num_heads"]),
        ffn_dim=int(ckpt.config["ffn_dim"]),
        max_tokens_length=int(ckpt.config["max_tokens_length"]),
    )
    model = EncoderModel(config, int(ckpt.config["vocab_size"]), seed=ckpt.seed)
    _fill(model.named_parameters(), ckpt.tensors, prefix)
    return model


def head_from_checkpoint(ckpt: Checkpoint, prefix: str = "") -> NliHead:
    config = HeadConfig(
        input_dim=int(ckpt.config["head_input_dim"]),
        hidden_dims=tuple(int(d) for d in ckpt.config["head_hidden_dims"].split(",")),
    )
    head = NliHead(config, seed=ckpt.seed)
    _fill(head.named_parameters(), ckpt.tensors, prefix)
    return head


def composed_from_checkpoint(ckpt: Checkpoint, vocab: Vocabulary) -> NliModel:
    if ckpt.kind != "composed":
        raise CheckpointFormatError(f"expected a composed checkpoint, got {ckpt.kind!r}")
    encoder = encoder_from_checkpoint(ckpt, prefix="encoder.")
    head = head_from_checkpoint(ckpt, prefix="head.")
    if len(vocab) != encoder.vocab_size:
        raise ShapeError(
            f"vocabulary size {len(vocab)} does not match checkpoint {encoder.vocab_size}"
        )
    return NliModel(
        encoder,
        head,
        vocab,
        max_sentence_length=int(ckpt.config.get("max_sentence_length", "256")),
    )
