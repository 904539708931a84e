"""Command-line surface: data synthesis, training, distillation, the
translation baseline, evaluation, split-inference embedding, prediction.

Every subcommand is deterministically seeded; progress and metrics go to
stdout, errors to stderr with exit status 1 (usage errors exit 2).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .cache import EmbeddingCache, embed_corpus, evaluate_nli_cached
from .checkpoint import (
    checkpoint_id,
    composed_from_checkpoint,
    load_checkpoint,
    save_composed,
)
from .config import resolve_hyper
from .data import load_absa, load_nli, load_parallel, load_rte, save_absa, save_nli, save_parallel
from .distill import TeacherStudentSetup, assemble_target_nli, distill
from .encoder import EncoderConfig, EncoderModel
from .errors import CrossNliError
from .metrics import TASK_MAPPINGS, format_report, report_record
from .nli import HeadConfig, NliHead, NliModel
from .synth import (
    build_cipher,
    build_grammar,
    cipher_nli,
    gen_sentences,
    gen_synthetic_absa,
    gen_synthetic_nli,
    parallel_from_sentences,
    save_cipher,
)
from .tasks import DEFAULT_TEMPLATES, HypothesisTemplate, evaluate_nli, evaluate_rte, zero_shot_task
from .train import finetune_nli
from .translate import DictionaryTranslator, IdentityTranslator, finetune_translated
from .vocab import Vocabulary


def _load_model(model_path: str, vocab_path: str) -> NliModel:
    vocab = Vocabulary.load(vocab_path)
    return composed_from_checkpoint(load_checkpoint(model_path), vocab)


def _write_report(report, task: str, record_path: str | None) -> None:
    print(format_report(report, task))
    line = report_record(task, report)
    print(line)
    if record_path:
        Path(record_path).write_text(line + "\n", encoding="utf-8")


def _cmd_gen_data(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grammar = build_grammar(args.grammar_size)
    vocab = Vocabulary(grammar.words())
    vocab.save(out / "vocab.txt")

    train = gen_synthetic_nli(args.seed, args.n_train, args.grammar_size)
    test = gen_synthetic_nli(args.seed + 1, args.n_test, args.grammar_size)
    save_nli(train, out / "nli_train.tsv")
    save_nli(test, out / "nli_test.tsv")

    cipher = build_cipher(grammar.words(), args.cipher_seed)
    save_cipher(cipher, out / "cipher.tsv")
    save_nli(cipher_nli(test, cipher), out / "nli_test_ciphered.tsv")

    sentences = gen_sentences(args.seed + 2, args.pairs, grammar)
    save_parallel(parallel_from_sentences(sentences, cipher), out / "parallel.tsv")

    save_absa(gen_synthetic_absa(args.seed + 3, args.absa_n), out / "absa.tsv")
    print(
        f"wrote vocab ({len(vocab)} ids), {len(train)} train / {len(test)} test NLI pairs, "
        f"{args.pairs} parallel pairs, {args.absa_n} review records to {out}"
    )
    return 0


def _cmd_train_nli(args) -> int:
    vocab = Vocabulary.load(args.vocab)
    dataset = load_nli(args.data)
    hyper = resolve_hyper(args.config, "nli")
    config = EncoderConfig(
        embed_dim=args.embed_dim,
        num_layers=args.layers,
        num_heads=args.heads,
        ffn_dim=args.ffn_dim,
        max_tokens_length=hyper.max_tokens_length,
    )
    encoder = EncoderModel(config, len(vocab), seed=args.seed)
    head = NliHead(HeadConfig.for_embed_dim(args.embed_dim), seed=args.seed + 1)
    model = NliModel(encoder, head, vocab, max_sentence_length=hyper.max_sentence_length)
    log = finetune_nli(model, dataset, hyper, seed=args.seed)
    for stats in log.epochs:
        print(f"epoch {stats.epoch}: loss {stats.mean_loss:.6f} accuracy {stats.accuracy:.4f}")
    save_composed(model, args.out, seed=args.seed, wide=args.wide)
    print(f"saved composed checkpoint to {args.out}")
    return 0


def _cmd_distill(args) -> int:
    vocab = Vocabulary.load(args.vocab)
    ckpt = load_checkpoint(args.teacher)
    teacher_model = composed_from_checkpoint(ckpt, vocab)
    corpus = load_parallel(args.parallel)
    hyper = resolve_hyper(args.config, "kd")
    setup = TeacherStudentSetup.from_teacher(teacher_model.encoder, vocab)
    log = distill(setup, corpus, hyper, seed=args.seed)
    for stats in log.epochs:
        print(f"epoch {stats.epoch}: kd loss {stats.mean_loss:.8f}")
    student_model = assemble_target_nli(
        setup.student,
        teacher_model.head,
        vocab,
        max_sentence_length=teacher_model.max_sentence_length,
    )
    save_composed(student_model, args.out, seed=args.seed, wide=args.wide)
    print(f"saved distilled composed checkpoint to {args.out}")
    return 0


def _cmd_translate_train(args) -> int:
    vocab = Vocabulary.load(args.vocab)
    model = _load_model(args.model, args.vocab)
    dataset = load_nli(args.data)
    hyper = resolve_hyper(args.config, "mt")
    if args.dictionary:
        mapping = {}
        for line in Path(args.dictionary).read_text(encoding="utf-8").splitlines():
            if line.strip():
                source, target = line.split("\t")
                mapping[source] = target
        translator = DictionaryTranslator(mapping)
    else:
        translator = IdentityTranslator()
    log = finetune_translated(model, dataset, translator, hyper, seed=args.seed)
    for stats in log.epochs:
        print(f"epoch {stats.epoch}: loss {stats.mean_loss:.6f} accuracy {stats.accuracy:.4f}")
    save_composed(model, args.out, seed=args.seed, wide=args.wide)
    print(f"saved translation-tuned checkpoint to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    model = _load_model(args.model, args.vocab)
    if args.task == "nli":
        report = evaluate_nli(model, load_nli(args.data))
    elif args.task == "rte":
        report = evaluate_rte(model, load_rte(args.data))
    else:
        default = DEFAULT_TEMPLATES[args.task]
        template = HypothesisTemplate(
            args.task,
            args.hypothesis or default.hypothesis_text,
            target_topic=args.topic or default.target_topic,
        )
        report = zero_shot_task(model, load_absa(args.data), template, TASK_MAPPINGS[args.task])
    _write_report(report, args.task, args.record)
    return 0


def _cmd_embed(args) -> int:
    vocab = Vocabulary.load(args.vocab)
    ckpt = load_checkpoint(args.model)
    model = composed_from_checkpoint(ckpt, vocab)
    texts = [
        line
        for line in Path(args.texts).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    cache = embed_corpus(
        texts,
        model.encoder,
        vocab,
        args.cache,
        checkpoint_id(args.model),
        max_sentence_length=model.max_sentence_length,
    )
    print(f"cached {len(cache)} embeddings under checkpoint {cache.checkpoint_id}")
    return 0


def _cmd_eval_cached(args) -> int:
    vocab = Vocabulary.load(args.vocab)
    ckpt = load_checkpoint(args.model)
    model = composed_from_checkpoint(ckpt, vocab)
    cache = EmbeddingCache.load(args.cache, expected_checkpoint_id=checkpoint_id(args.model))
    report = evaluate_nli_cached(load_nli(args.data), cache, model.head)
    _write_report(report, "nli", args.record)
    return 0


def _cmd_predict(args) -> int:
    model = _load_model(args.model, args.vocab)
    prediction = model.predict_pair(args.premise, args.hypothesis)
    probs = ", ".join(
        f"{label}={p:.4f}" for label, p in zip(("entailment", "neutral", "contradiction"), prediction.probabilities)
    )
    print(f"{prediction.predicted_label}\t[{probs}]")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crossnli",
        description="Cross-lingual NLI: train, distill, translate-tune, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate the synthetic desk-scale corpus suite")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--n-train", type=int, default=600)
    p.add_argument("--n-test", type=int, default=150)
    p.add_argument("--grammar-size", type=int, default=16)
    p.add_argument("--cipher-seed", type=int, default=11)
    p.add_argument("--pairs", type=int, default=2000)
    p.add_argument("--absa-n", type=int, default=420)
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("train-nli", help="train encoder + head on an NLI dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--config", help="config file path or preset name (nli/kd/mt)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--embed-dim", type=int, default=64)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--ffn-dim", type=int, default=128)
    p.add_argument("--wide", action="store_true", help="store float64 tensors")
    p.set_defaults(func=_cmd_train_nli)

    p = sub.add_parser("distill", help="distill the encoder into a target language")
    p.add_argument("--teacher", required=True, help="composed source checkpoint")
    p.add_argument("--vocab", required=True)
    p.add_argument("--parallel", required=True)
    p.add_argument("--config", help="config file path or preset name")
    p.add_argument("--seed", type=int, default=2)
    p.add_argument("--out", required=True)
    p.add_argument("--wide", action="store_true")
    p.set_defaults(func=_cmd_distill)

    p = sub.add_parser("translate-train", help="fine-tune on per-batch translated data")
    p.add_argument("--model", required=True, help="composed source checkpoint")
    p.add_argument("--vocab", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--dictionary", help="2-column word map; omit for identity translation")
    p.add_argument("--config", help="config file path or preset name")
    p.add_argument("--seed", type=int, default=3)
    p.add_argument("--out", required=True)
    p.add_argument("--wide", action="store_true")
    p.set_defaults(func=_cmd_translate_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a task")
    p.add_argument("--model", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--task", choices=("nli", "rte", "sa", "tr", "absa"), default="nli")
    p.add_argument("--hypothesis", help="fixed hypothesis for sa/tr/absa")
    p.add_argument("--topic", help="target topic for tr/absa")
    p.add_argument("--record", help="write the single-line record here")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("embed", help="embed a text corpus into a cache file")
    p.add_argument("--model", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--texts", required=True, help="one sentence per line")
    p.add_argument("--cache", required=True)
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("eval-cached", help="evaluate NLI from a prebuilt embedding cache")
    p.add_argument("--model", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--cache", required=True)
    p.add_argument("--record")
    p.set_defaults(func=_cmd_eval_cached)

    p = sub.add_parser("predict", help="predict one sentence pair")
    p.add_argument("--model", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--premise", required=True)
    p.add_argument("--hypothesis", required=True)
    p.set_defaults(func=_cmd_predict)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CrossNliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
