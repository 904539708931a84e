"""Cross-lingual NLI: siamese sentence-encoder classifier, teacher-student
embedding distillation, translation fine-tuning baseline, and the
evaluation harness for NLI, RTE, and fixed-hypothesis zero-shot tasks.
"""

from .autodiff import (
    Tensor,
    backward,
    cross_entropy,
    gelu,
    mse_loss,
    no_grad,
    softmax,
)
from .data import AbsaExample, NliExample, ParallelPair, RteExample, balance_sample
from .distill import TeacherStudentSetup, assemble_target_nli, distill, kd_loss
from .encoder import EncoderConfig, EncoderModel, SentenceEmbedding, encode_pair
from .metrics import EvalReport, LabelMapping, TASK_MAPPINGS, evaluate, map_prediction
from .nli import (
    CLASSES,
    HeadConfig,
    NliHead,
    NliModel,
    NliPrediction,
    combine_features,
)
from .optim import Adam, AdamState, TrainingHyperParams
from .synth import CipherSpec, build_cipher, gen_synthetic_absa, gen_synthetic_nli
from .tasks import HypothesisTemplate, evaluate_nli, evaluate_rte, zero_shot_task
from .train import TrainingLog, finetune_nli
from .translate import (
    DictionaryTranslator,
    IdentityTranslator,
    SubprocessTranslator,
    Translator,
    finetune_translated,
    translate_batch,
)
from .vocab import Vocabulary, tokenize

__version__ = "0.1.0"

__all__ = [
    "AbsaExample",
    "Adam",
    "AdamState",
    "CLASSES",
    "CipherSpec",
    "DictionaryTranslator",
    "EncoderConfig",
    "EncoderModel",
    "EvalReport",
    "HeadConfig",
    "HypothesisTemplate",
    "IdentityTranslator",
    "LabelMapping",
    "NliExample",
    "NliHead",
    "NliModel",
    "NliPrediction",
    "ParallelPair",
    "RteExample",
    "SentenceEmbedding",
    "SubprocessTranslator",
    "TASK_MAPPINGS",
    "TeacherStudentSetup",
    "Tensor",
    "TrainingHyperParams",
    "TrainingLog",
    "Translator",
    "Vocabulary",
    "assemble_target_nli",
    "backward",
    "balance_sample",
    "build_cipher",
    "combine_features",
    "cross_entropy",
    "distill",
    "encode_pair",
    "evaluate",
    "evaluate_nli",
    "evaluate_rte",
    "finetune_nli",
    "finetune_translated",
    "gelu",
    "gen_synthetic_absa",
    "gen_synthetic_nli",
    "kd_loss",
    "map_prediction",
    "mse_loss",
    "no_grad",
    "softmax",
    "tokenize",
    "translate_batch",
    "zero_shot_task",
]
