"""Flat key=value run configuration mirroring the training regime names.

Recognized keys: batch_size, max_sentence_length, max_tokens_length,
epochs, learning_rate, epsilon, weight_decay, accumulation_step.
Lines starting with '#' and blank lines are ignored.
"""

from __future__ import annotations

from pathlib import Path

from .errors import DataError
from .optim import TrainingHyperParams

_INT_KEYS = ("batch_size", "max_sentence_length", "max_tokens_length", "epochs", "accumulation_step")
_FLOAT_KEYS = ("learning_rate", "epsilon", "weight_decay")

def _desk_nli() -> TrainingHyperParams:
    """Calibrated from-scratch regime for the synthetic corpus (the
    published learning rate assumes pretrained weights)."""
    return TrainingHyperParams.nli_source().scaled(
        batch_size=16, max_tokens_length=16, epochs=8, learning_rate=2e-3, accumulation_step=1
    )


def _desk_kd() -> TrainingHyperParams:
    """Distillation regime scaled to desk size; epochs stay at 6."""
    return TrainingHyperParams.distillation().scaled(
        max_tokens_length=16, learning_rate=2e-3, accumulation_step=1
    )


def _desk_mt() -> TrainingHyperParams:
    """Translation fine-tuning scaled to desk size; epochs stay at 5."""
    return TrainingHyperParams.translation_finetune().scaled(
        batch_size=16,
        max_tokens_length=16,
        learning_rate=2e-3,
        epsilon=1e-8,
        accumulation_step=1,
    )


PRESETS = {
    "nli": TrainingHyperParams.nli_source,
    "kd": TrainingHyperParams.distillation,
    "mt": TrainingHyperParams.translation_finetune,
    "desk-nli": _desk_nli,
    "desk-kd": _desk_kd,
    "desk-mt": _desk_mt,
}


def load_config(path) -> dict[str, str]:
    values: dict[str, str] = {}
    for number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DataError(f"{path}:{number}: expected key=value, got {line!r}")
        values[key.strip()] = value.strip()
    return values


def save_config(values: dict[str, str], path) -> None:
    lines = [f"{key} = {value}" for key, value in values.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def hyper_from_config(values: dict[str, str]) -> TrainingHyperParams:
    kwargs = {}
    for key in _INT_KEYS:
        if key not in values:
            raise DataError(f"config missing required key {key!r}")
        kwargs[key] = int(values[key])
    for key in _FLOAT_KEYS:
        if key not in values:
            raise DataError(f"config missing required key {key!r}")
        kwargs[key] = float(values[key])
    return TrainingHyperParams(**kwargs)


def hyper_to_config(hyper: TrainingHyperParams) -> dict[str, str]:
    return {
        "batch_size": str(hyper.batch_size),
        "max_sentence_length": str(hyper.max_sentence_length),
        "max_tokens_length": str(hyper.max_tokens_length),
        "epochs": str(hyper.epochs),
        "learning_rate": repr(hyper.learning_rate),
        "epsilon": repr(hyper.epsilon),
        "weight_decay": repr(hyper.weight_decay),
        "accumulation_step": str(hyper.accumulation_step),
    }


def resolve_hyper(config_arg: str | None, preset: str) -> TrainingHyperParams:
    """CLI helper: a path loads a config file, a preset name builds one."""
    if config_arg is None:
        return PRESETS[preset]()
    if config_arg in PRESETS:
        return PRESETS[config_arg]()
    return hyper_from_config(load_config(config_arg))
