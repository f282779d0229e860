"""Command-line pipeline: ingest, pretrain, train, topics, eval and
verify-theorem subcommands.

Configuration is a flat UTF-8 file of ``key = value`` lines with ``#``
comments; command-line flags override file values; unknown keys are
rejected. Exit codes: 0 ok, 2 input format, 3 training failure, 4 usage,
5 verification failure. VMFTOPICS_LOG sets the log level (default WARNING).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .attention import init_attention
from .checkpoint import load_checkpoint, save_checkpoint
from .corpus import filter_vocabulary, load_corpus, load_labels
from .errors import EmptyCorpusError, FormatError, ParameterError, \
    TrainingError, UsageError, VerificationError
from .gmm_equivalence import verify_equivalence
from .metrics import build_cooc_counts, cluster_documents, nmi, \
    topic_diversity, umass, uci
from .report import build_report, export_report, top_words, word_type_latents
from .seeding import substream
from .trainer import TrainConfig, format_log_line, pretrain, train


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def _parse_dims(text: str) -> tuple:
    try:
        dims = tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}")
    if not dims:
        raise UsageError("hidden_dims must name at least one layer")
    return dims


_CONFIG_PARSERS = {
    "embeddings": str,
    "vocab": str,
    "labels": str,
    "out_dir": str,
    "min_count": int,
    "k": int,
    "r_prime": int,
    "kappa": float,
    "lambda": float,
    "epochs": int,
    "pretrain_epochs": int,
    "learning_rate": float,
    "batch_size": int,
    "seed": int,
    "adam_beta1": float,
    "adam_beta2": float,
    "adam_epsilon": float,
    "grad_check_tolerance": float,
    "attention_dim": int,
    "hidden_dims": _parse_dims,
    "attention_content_only": _parse_bool,
    "kmeans_max_iters": int,
    "top_m": int,
    "diversity_m": int,
    "window": int,
    "k_eval": int,
}

_TRAIN_KEYS = {
    "k": "k", "r_prime": "r_prime", "kappa": "kappa", "lambda": "lambda_",
    "epochs": "epochs", "pretrain_epochs": "pretrain_epochs",
    "learning_rate": "learning_rate", "batch_size": "batch_size",
    "seed": "seed", "adam_beta1": "adam_beta1", "adam_beta2": "adam_beta2",
    "adam_epsilon": "adam_epsilon",
    "grad_check_tolerance": "grad_check_tolerance",
    "attention_dim": "attention_dim", "hidden_dims": "hidden_dims",
    "attention_content_only": "attention_content_only",
    "kmeans_max_iters": "kmeans_max_iters",
}


def read_config_file(path) -> dict:
    values = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_PARSERS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = _CONFIG_PARSERS[key](value)
        except (ValueError, TypeError):
            raise UsageError(f"{path}:{lineno}: bad value for {key!r}")
    return values


def _merged_settings(args, required=()) -> dict:
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for key in _CONFIG_PARSERS:
        flag_value = vars(args).get(key)
        if flag_value is not None:
            values[key] = flag_value
    missing = [key for key in required if key not in values]
    if missing:
        raise UsageError(f"missing required setting(s): {', '.join(missing)}")
    return values


def _train_config(settings: dict) -> TrainConfig:
    kwargs = {field: settings[key] for key, field in _TRAIN_KEYS.items()
              if key in settings}
    return TrainConfig(**kwargs)


def _require_files(*paths) -> None:
    missing = [str(p) for p in paths if p and not Path(p).is_file()]
    if missing:
        raise UsageError(f"no such file: {', '.join(missing)}")


def _load_filtered(settings: dict):
    _require_files(settings["embeddings"], settings["vocab"],
                   settings.get("labels"))
    corpus = load_corpus(settings["embeddings"], settings["vocab"])
    return filter_vocabulary(corpus, settings.get("min_count", 5))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_settings_flags(parser, keys):
    for key in keys:
        flag = "--" + key.replace("_", "-")
        parser.add_argument(flag, dest=key, type=_CONFIG_PARSERS[key],
                            default=None)


def _build_parser() -> _Parser:
    parser = _Parser(prog="vmftopics",
                     description="spherical latent-space topic discovery")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and summarize a corpus")
    _add_settings_flags(p, ("embeddings", "vocab", "min_count"))
    p.set_defaults(func=cmd_ingest)

    for name, func in (("pretrain", cmd_pretrain), ("train", cmd_train)):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        _add_settings_flags(p, ("embeddings", "vocab", "out_dir", "min_count",
                                *_TRAIN_KEYS, "top_m", "diversity_m"))
        p.set_defaults(func=func)

    p = sub.add_parser("topics", help="derive the topic report")
    p.add_argument("--checkpoint", required=True)
    _add_settings_flags(p, ("embeddings", "vocab", "out_dir", "min_count",
                            "top_m", "diversity_m"))
    p.set_defaults(func=cmd_topics)

    p = sub.add_parser("eval", help="compute quality metrics")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--nmi", action="store_true")
    _add_settings_flags(p, ("embeddings", "vocab", "out_dir", "min_count",
                            "labels", "top_m", "diversity_m", "window",
                            "k_eval", "seed"))
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify-theorem",
                       help="check the GMM-posterior/softmax identity")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--r", type=int, default=8)
    p.add_argument("--vocab-size", type=int, default=32)
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.set_defaults(func=cmd_verify_theorem)
    return parser


def cmd_ingest(args) -> int:
    settings = _merged_settings(args, required=("embeddings", "vocab"))
    corpus = _load_filtered(settings)
    print(f"{corpus.n_docs} docs, {corpus.n_tokens} tokens, "
          f"{len(corpus.vocabulary)} words")
    print(f"dropped {len(corpus.dropped_doc_ids)} document(s)")
    return 0


def _report_width(settings: dict) -> int:
    return max(settings.get("top_m", 10), settings.get("diversity_m", 25))


def cmd_train(args) -> int:
    settings = _merged_settings(args,
                                required=("embeddings", "vocab", "out_dir"))
    corpus = _load_filtered(settings)
    config = _train_config(settings)
    out = Path(settings["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "train_log.tsv", "w", encoding="utf-8") as log_file:
        def on_epoch(epoch, breakdown):
            log_file.write(format_log_line(epoch, breakdown) + "\n")
            log_file.flush()

        result = train(corpus, config, epoch_callback=on_epoch)
    save_checkpoint(out / "checkpoint.bin", result.model, result.attention,
                    config.seed)
    report = build_report(result.model, result.attention, corpus,
                          m=_report_width(settings))
    export_report(report, out)
    print(f"trained {config.epochs} epoch(s); wrote {out / 'checkpoint.bin'}")
    return 0


def cmd_pretrain(args) -> int:
    settings = _merged_settings(args,
                                required=("embeddings", "vocab", "out_dir"))
    corpus = _load_filtered(settings)
    config = _train_config(settings)
    out = Path(settings["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    model = pretrain(corpus, config)
    attention = init_attention(config.attention_dim, corpus.dim,
                               substream(config.seed, "attention-init"))
    save_checkpoint(out / "checkpoint.bin", model, attention, config.seed)
    print(f"pretrained {config.pretrain_epochs} epoch(s); "
          f"wrote {out / 'checkpoint.bin'}")
    return 0


def cmd_topics(args) -> int:
    settings = _merged_settings(args,
                                required=("embeddings", "vocab", "out_dir"))
    _require_files(args.checkpoint)
    model, attention, _ = load_checkpoint(args.checkpoint)
    corpus = _load_filtered(settings)
    report = build_report(model, attention, corpus, m=_report_width(settings))
    paths = export_report(report, Path(settings["out_dir"]))
    print("wrote " + ", ".join(str(p) for p in paths))
    return 0


def cmd_eval(args) -> int:
    settings = _merged_settings(args,
                                required=("embeddings", "vocab", "out_dir"))
    _require_files(args.checkpoint)
    model, attention, ckpt_seed = load_checkpoint(args.checkpoint)
    corpus = _load_filtered(settings)
    top_m = settings.get("top_m", 10)
    diversity_m = settings.get("diversity_m", 25)
    window = settings.get("window", 10)

    latents = word_type_latents(model, corpus)
    width = max(top_m, diversity_m)
    topics = [top_words(model, corpus, k, min(width, len(corpus.vocabulary)),
                        latents=latents)
              for k in range(model.n_topics)]
    vocab_of_interest = {s for topic in topics for s, _ in topic}
    counts = build_cooc_counts(corpus, window_size=window,
                               restrict_to=vocab_of_interest)

    result = {
        "umass": umass(topics, counts, top_m),
        "uci": uci(topics, counts, top_m),
        "diversity": topic_diversity(topics, diversity_m),
    }
    if args.nmi:
        label_path = settings.get("labels")
        if not label_path:
            raise UsageError("--nmi needs a label file (--labels)")
        label_map = load_labels(label_path)
        missing = [int(d) for d in corpus.doc_ids if int(d) not in label_map]
        if missing:
            raise UsageError(f"label file misses doc ids {missing[:5]}")
        truth = [label_map[int(d)] for d in corpus.doc_ids]
        k_eval = settings.get("k_eval") or len(set(truth))
        if k_eval < 2:
            raise UsageError("NMI evaluation needs at least 2 clusters")
        seed = settings.get("seed", ckpt_seed)
        predicted = cluster_documents(model, attention, corpus, k_eval,
                                      seed=seed)
        result["nmi"] = nmi(predicted.tolist(), truth)
    result["config"] = {"top_m": top_m, "diversity_m": diversity_m,
                        "window": window}

    out = Path(settings["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "metrics.json", "w", encoding="utf-8") as fh:
        json.dump(result, fh, indent=2)
        fh.write("\n")
    print(f"wrote {out / 'metrics.json'}")
    return 0


def cmd_verify_theorem(args) -> int:
    try:
        deviation = verify_equivalence(seed=args.seed, r=args.r,
                                       vocab_size=args.vocab_size,
                                       trials=args.trials,
                                       tolerance=args.tolerance)
    except VerificationError as exc:
        print(f"trials={args.trials} max_deviation={exc.deviation:.6e} FAIL")
        return 5
    print(f"trials={args.trials} max_deviation={deviation:.6e} PASS")
    return 0


def main(argv=None) -> int:
    level = os.environ.get("VMFTOPICS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 4
    except (FormatError, EmptyCorpusError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except TrainingError as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return 3
    except ParameterError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 4
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 5


def entry() -> None:
    sys.exit(main())
