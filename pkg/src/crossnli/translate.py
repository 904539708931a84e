"""Pluggable translators and the machine-translation fine-tuning baseline.

Translators are total, deterministic string functions. The training
pipeline translates each mini-batch lazily right before it is consumed —
never as a materialized pre-pass — so the number of translated examples in
memory stays bounded by the batch size. ``calls`` counts translated
sentences, making the laziness observable.
"""

from __future__ import annotations

import subprocess
from typing import Callable, Sequence

from .data import NliExample
from .errors import CoverageError, DataError, TranslationError
from .nli import NliModel
from .optim import TrainingHyperParams
from .synth import CipherSpec
from .train import TrainingLog, finetune_nli
from .vocab import normalize_text


class Translator:
    """Base contract: deterministic, never empty output for non-empty input."""

    def __init__(self):
        self.calls = 0

    def translate(self, text: str) -> str:
        self.calls += 1
        result = self._translate(text)
        if text.strip() and not result.strip():
            raise TranslationError(f"translator returned empty output for {text!r}", -1)
        return result

    def translate_many(self, texts: Sequence[str]) -> list[str]:
        return [self.translate(t) for t in texts]

    def _translate(self, text: str) -> str:
        raise NotImplementedError


class IdentityTranslator(Translator):
    def _translate(self, text: str) -> str:
        return text


class DictionaryTranslator(Translator):
    """Word-by-word substitution; the map must be injective."""

    def __init__(self, mapping: dict[str, str], passthrough_unknown: bool = True):
        super().__init__()
        values = list(mapping.values())
        if len(set(values)) != len(values):
            raise ValueError("substitution map must be injective")
        self.mapping = {k.lower(): v for k, v in mapping.items()}
        self.passthrough_unknown = passthrough_unknown

    @classmethod
    def from_cipher(cls, spec: CipherSpec, passthrough_unknown: bool = True) -> "DictionaryTranslator":
        return cls(spec.substitution, passthrough_unknown)

    def _translate(self, text: str) -> str:
        out = []
        for word in normalize_text(text).lower().split():
            if word in self.mapping:
                out.append(self.mapping[word])
            elif self.passthrough_unknown:
                out.append(word)
            else:
                raise CoverageError(f"word {word!r} not in dictionary")
        return " ".join(out)


class SubprocessTranslator(Translator):
    """Line-oriented external translator: one UTF-8 sentence per line on the
    child's stdin, one translated sentence per line back, flushed per batch.
    The child must answer line-for-line."""

    def __init__(self, command: Sequence[str]):
        super().__init__()
        self.command = list(command)
        self._process: subprocess.Popen | None = None

    def _ensure_process(self) -> subprocess.Popen:
        if self._process is None or self._process.poll() is not None:
            self._process = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
            )
        return self._process

    def translate_many(self, texts: Sequence[str]) -> list[str]:
        if not texts:
            return []
        process = self._ensure_process()
        for text in texts:
            process.stdin.write(normalize_text(text) + "\n")
        process.stdin.flush()
        results = []
        for text in texts:
            line = process.stdout.readline()
            if not line:
                raise TranslationError("translator subprocess closed its output", len(results))
            self.calls += 1
            result = line.rstrip("\n")
            if text.strip() and not result.strip():
                raise TranslationError(f"empty translation for {text!r}", len(results))
            results.append(result)
        return results

    def _translate(self, text: str) -> str:
        # route through translate_many so the counter stays consistent
        self.calls -= 1
        return self.translate_many([text])[0]

    def close(self) -> None:
        if self._process is not None and self._process.poll() is None:
            self._process.stdin.close()
            self._process.wait(timeout=10)
        self._process = None

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


def translate_batch(translator: Translator, batch: Sequence[NliExample]) -> list[NliExample]:
    """Translate premise and hypothesis of each example; labels and order
    are preserved. A failure aborts the batch, naming the example index."""
    batch = list(batch)
    if not batch:
        raise DataError("empty batch")
    translated = []
    for index, example in enumerate(batch):
        try:
            premise = translator.translate(example.premise)
            hypothesis = translator.translate(example.hypothesis)
        except TranslationError:
            raise
        except Exception as exc:
            raise TranslationError(str(exc), index) from exc
        translated.append(NliExample(premise, hypothesis, example.label))
    return translated


def finetune_translated(
    model: NliModel,
    dataset: Sequence[NliExample],
    translator: Translator,
    hyper: TrainingHyperParams,
    seed: int = 0,
    on_batch_end: Callable[[int, float], None] | None = None,
) -> TrainingLog:
    """Identical to ``finetune_nli`` except every mini-batch passes through
    ``translate_batch`` immediately before use."""
    return finetune_nli(
        model,
        dataset,
        hyper,
        seed=seed,
        batch_hook=lambda batch: translate_batch(translator, batch),
        on_batch_end=on_batch_end,
    )
