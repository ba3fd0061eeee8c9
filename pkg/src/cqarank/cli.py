"""Command-line interface.

Every subcommand accepts ``--config FILE`` (``key = value`` lines, see
:func:`cqarank.pipeline.parse_settings`), ``--set KEY=VALUE`` overrides,
``--seed``, ``--jobs`` and ``--out DIR``. The effective configuration is
written to ``DIR/effective_config.json``.

Exit codes: 0 success, 1 usage or configuration error, 2 invalid input
data, 3 training failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import Corpus, dump_corpus, dump_profiles, load_corpus, load_profiles, read_run_file, relevance_judgements, write_run_file
from .errors import ConfigurationError, CqaError, TrainingError
from .features import FeatureMatrix, feature_manifest, read_svmlight, write_csv, write_svmlight
from .pipeline import (
    PipelineConfig,
    RankerModel,
    build_models,
    build_pmi,
    category_counts,
    extract_matrix,
    load_models,
    parse_settings,
    read_config_file,
    run_from_scores,
    run_pipeline,
    save_credibility,
    save_models,
    train_credibility,
    train_embeddings,
    train_ranker,
    train_topics,
)
from .rank_eval import ablate, map_score
from .embeddings import save_text_vectors
from .topics import TopicModel

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_TRAINING = 0, 1, 2, 3

logger = logging.getLogger("cqarank")

CONFIG_HELP = """\
config file format: one "key = value" per line, '#' comments. Nested settings
go under [embedding], [topics] or [svm] sections (or use dotted keys with
--set, e.g. --set svm.C=10). Top-level keys: seed, subtask, classifier,
groups (comma list or "all"), jobs, grid_search, map_depth,
exclude_zero_relevant, link_allowlist, extra_similarities, reference_time,
pmi_smoothing, pmi_min_count, corpus, profiles, models, out, vectors,
lexicons, gazetteers, credibility_corpus.

exit codes: 0 ok, 1 usage/configuration, 2 invalid data, 3 training failure
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


class _KeyValueFormatter(logging.Formatter):
    def format(self, record):
        msg = record.getMessage().replace('"', "'")
        return f'ts={self.formatTime(record, "%Y-%m-%dT%H:%M:%S")} level={record.levelname} logger={record.name} msg="{msg}"'


def _setup_logging(level: str) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_KeyValueFormatter())
    root = logging.getLogger("cqarank")
    root.handlers[:] = [handler]
    root.setLevel(level.upper())
    root.propagate = False


# -- argument parsing -----------------------------------------------------------------


def _common(p: argparse.ArgumentParser, corpus=False, models=False) -> None:
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one setting")
    p.add_argument("--seed", type=int, help="seed for every stochastic component")
    p.add_argument("--jobs", type=int, help="feature extraction workers (default: CPU count)")
    p.add_argument("--out", help="output directory (default: cqarank-out)")
    p.add_argument("--subtask", choices=["A", "B", "C"])
    p.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    if corpus:
        p.add_argument("--corpus", help="corpus JSONL")
        p.add_argument("--profiles", help="user profiles JSONL")
    if models:
        p.add_argument("--models", help="directory of trained models")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cqarank", description="Learning-to-rank for community question answering.",
                     epilog=CONFIG_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"cqarank {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("ingest", help="validate a corpus and profiles, write normalized copies")
    _common(p, corpus=True)

    p = sub.add_parser("train-embeddings", help="train skip-gram vectors on corpus text")
    _common(p, corpus=True)
    p.add_argument("--text", action="append", default=[], help="extra raw text file, one document per line")

    p = sub.add_parser("train-topics", help="train the LDA topic model")
    _common(p, corpus=True)

    p = sub.add_parser("build-pmi", help="build the PMI dictionary from labelled comments")
    _common(p, corpus=True)

    p = sub.add_parser("train-credibility", help="train the credibility classifier")
    _common(p, corpus=True)

    p = sub.add_parser("extract", help="extract feature matrices (CSV, svmlight, manifest)")
    _common(p, corpus=True, models=True)

    p = sub.add_parser("train", help="train the ranking classifier (and any missing auxiliary models)")
    _common(p, corpus=True, models=True)
    p.add_argument("--features", help="train from an svmlight file instead of a corpus")
    p.add_argument("--manifest", help="feature manifest naming the svmlight columns")

    p = sub.add_parser("rank", help="rank a corpus and write a run file")
    _common(p, corpus=True, models=True)

    p = sub.add_parser("evaluate", help="MAP of a run file against gold labels")
    _common(p)
    p.add_argument("--run", required=True, help="run file")
    p.add_argument("--gold", required=True, help="corpus JSONL with gold labels")
    p.add_argument("--depth", type=int, help="MAP cutoff (default 10)")

    p = sub.add_parser("ablate", help="retrain with each feature group removed")
    _common(p, models=True)
    p.add_argument("--train", required=True, help="training corpus JSONL")
    p.add_argument("--dev", required=True, help="development corpus JSONL")
    p.add_argument("--test", help="optional test corpus JSONL")
    p.add_argument("--profiles", help="user profiles JSONL")
    p.add_argument("--ablate-groups", help="comma list of groups to remove (default: every enabled group)")

    p = sub.add_parser("topics", help="topic model utilities")
    tsub = p.add_subparsers(dest="topics_command", metavar="ACTION", parser_class=_Parser)
    tsub.required = True
    d = tsub.add_parser("dump", help="print the top words of every topic")
    _common(d, models=True)
    d.add_argument("-n", type=int, default=10, help="words per topic")

    p = sub.add_parser("pipeline", help="train on one corpus and rank another, end to end")
    _common(p)
    p.add_argument("--train", required=True, help="training corpus JSONL")
    p.add_argument("--eval", required=True, help="corpus to rank")
    p.add_argument("--dev", help="dev corpus for grid search")
    p.add_argument("--profiles", help="user profiles JSONL")
    return parser


# -- helpers ------------------------------------------------------------------------


def _config(args) -> PipelineConfig:
    settings = read_config_file(args.config) if args.config else {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        settings[key.strip()] = value
    flags = {"seed": args.seed, "jobs": args.jobs, "subtask": args.subtask, "out": args.out,
             "corpus": getattr(args, "corpus", None), "profiles": getattr(args, "profiles", None),
             "models": getattr(args, "models", None)}
    for key, value in flags.items():
        if value is not None:
            settings[key] = str(value)
    config = parse_settings(settings)
    if config.out is None:
        config = dataclasses.replace(config, out="cqarank-out")
    return config


def _out(config: PipelineConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _record_config(config: PipelineConfig, command: str) -> None:
    payload = {"command": command, "config": config.to_dict()}
    (_out(config) / "effective_config.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                                                       encoding="utf-8")


def _load(path, profiles=None) -> Corpus:
    if path is None:
        raise UsageError("a corpus path is required (--corpus or 'corpus' in the config)")
    corpus = load_corpus(path)
    if profiles:
        corpus = corpus.with_profiles(load_profiles(profiles)[0])
    return corpus


def _corpus(config: PipelineConfig) -> Corpus:
    return _load(config.corpus, config.profiles)


def _models_dir(config: PipelineConfig) -> Path:
    if config.models is None:
        raise UsageError("a models directory is required (--models or 'models' in the config)")
    return Path(config.models)


# -- commands -----------------------------------------------------------------------


def cmd_ingest(args, config):
    corpus = _corpus(config)
    out = _out(config)
    dump_corpus(corpus, out / "corpus.jsonl")
    if corpus.profiles:
        dump_profiles(corpus.profiles, out / "profiles.jsonl")
    labels = Counter(c.label.value if c.label else "unlabelled" for t in corpus.threads for c in t.comments)
    summary = {
        "threads": len(corpus.threads),
        "comments": sum(len(t.comments) for t in corpus.threads),
        "profiles": len(corpus.profiles),
        "labels": dict(sorted(labels.items())),
        "categories": category_counts(corpus),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(json.dumps(summary, sort_keys=True))


def cmd_train_embeddings(args, config):
    corpus = _corpus(config)
    extra = []
    for path in args.text:
        with open(path, encoding="utf-8") as fh:
            extra += [line.rstrip("\n") for line in fh if line.strip()]
    if extra:
        from .embeddings import train_sgns
        from .pipeline import corpus_texts

        model = train_sgns(corpus_texts(corpus) + extra, config.embedding)
    else:
        model = train_embeddings(corpus, config)
    out = _out(config)
    model.save(out / "embeddings.npz")
    save_text_vectors(model, out / "vectors.txt")
    print(f"{len(model.words)} words, dim {model.dim}")


def cmd_train_topics(args, config):
    model = train_topics(_corpus(config), config)
    model.save(_out(config) / "topics.npz")
    print(f"{model.K} topics, {len(model.vocab)} words")


def cmd_build_pmi(args, config):
    pmi = build_pmi(_corpus(config), config)
    pmi.save(_out(config) / "pmi.json")
    print(f"{len(pmi.entries)} n-grams, classes {', '.join(pmi.classes)}")


def cmd_train_credibility(args, config):
    model = train_credibility(_corpus(config), config)
    save_credibility(model, _out(config) / "credibility.npz")
    print("credibility model written")


def _existing_models(config: PipelineConfig, corpus: Corpus):
    """Models from --models when given; missing statistics come from ``corpus``."""
    if config.models is None:
        return None
    return load_models(config.models, config, fallback=corpus)


def cmd_extract(args, config):
    corpus = _corpus(config)
    models = _existing_models(config, corpus)
    models = build_models(corpus, config, models)
    matrix = extract_matrix(corpus, models, config)
    out = _out(config)
    write_csv(matrix, out / "features.csv")
    write_svmlight(matrix, out / "features.svmlight")
    (out / "manifest.tsv").write_text(feature_manifest(models.layout(config.groups)), encoding="utf-8")
    print(f"{len(matrix.keys)} pairs x {len(matrix.names)} features")


def _read_manifest(path) -> list[tuple[str, str]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        next(fh, None)
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            if len(parts) == 3:
                rows.append((parts[1], parts[2]))
    return rows


def cmd_train(args, config):
    out = _out(config)
    if args.features:
        if not args.manifest:
            raise UsageError("--features needs --manifest")
        layout = _read_manifest(args.manifest)
        X, y, keys = read_svmlight(args.features, len(layout))
        groups: dict[str, list[int]] = {}
        for i, (_, g) in enumerate(layout):
            groups.setdefault(g, []).append(i)
        matrix = FeatureMatrix([n for n, _ in layout], groups, X, keys, y, np.ones(len(y), dtype=np.int64))
        ranker = train_ranker(matrix, config)
        ranker.save(out)
        print(f"trained {ranker.kind} classifier on {len(y)} rows")
        return
    corpus = _corpus(config)
    models = build_models(corpus, config, _existing_models(config, corpus))
    matrix = extract_matrix(corpus, models, config)
    ranker = train_ranker(matrix, config)
    save_models(models, out)
    ranker.save(out)
    print(f"trained {ranker.kind} classifier on {int((matrix.labels != 0).sum())} pairs")


def cmd_rank(args, config):
    corpus = _corpus(config)
    d = _models_dir(config)
    models = load_models(d, config)
    ranker = RankerModel.load(d)
    matrix = extract_matrix(corpus, models, config)
    probs = ranker.probabilities(matrix)
    run = run_from_scores(matrix, probs, config.subtask)
    out = _out(config)
    write_run_file(run, out / "run.txt")
    print(f"ranked {len(matrix.keys)} documents for {len(run.queries)} queries")


def cmd_evaluate(args, config):
    run = read_run_file(args.run)
    gold = relevance_judgements(load_corpus(args.gold), config.subtask)
    depth = args.depth or config.map_depth
    score = map_score(run, gold, depth, config.exclude_zero_relevant)
    metrics = {"map": score, "depth": depth, "queries": len(run.queries), "subtask": config.subtask}
    (_out(config) / "metrics.json").write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"MAP {score:.2f}")


def cmd_ablate(args, config):
    train = _load(args.train, args.profiles)
    dev = _load(args.dev, args.profiles)
    test = _load(args.test, args.profiles) if args.test else None
    groups = list(config.groups) if not args.ablate_groups else [g.strip() for g in args.ablate_groups.split(",")]
    models = None
    if config.models:
        models = build_models(train, config, _existing_models(config, train))
    report = ablate(train, (dev, test) if test is not None else dev, groups, config, models)
    out = _out(config)
    (out / "ablation.txt").write_text(report.to_text(), encoding="utf-8")
    (out / "ablation.csv").write_text(report.to_csv(), encoding="utf-8")
    print(report.to_text(), end="")


def cmd_topics_dump(args, config):
    model = TopicModel.load(_models_dir(config) / "topics.npz")
    lines = [f"topic {k:3d}: {' '.join(words)}" for k, words in enumerate(model.top_words(args.n))]
    text = "\n".join(lines) + "\n"
    (_out(config) / "topics.txt").write_text(text, encoding="utf-8")
    print(text, end="")


def cmd_pipeline(args, config):
    train = _load(args.train, args.profiles)
    evaluation = _load(args.eval, args.profiles)
    dev = _load(args.dev, args.profiles) if args.dev else None
    result = run_pipeline(train, evaluation, config, _out(config), dev=dev)
    m = result.metrics
    if "map" in m:
        print(f"MAP {m['map']:.2f}  Accuracy {m['accuracy']:.2f}")
    else:
        print(f"ranked {m['pairs']} documents for {m['queries']} queries")


COMMANDS = {
    "ingest": cmd_ingest,
    "train-embeddings": cmd_train_embeddings,
    "train-topics": cmd_train_topics,
    "build-pmi": cmd_build_pmi,
    "train-credibility": cmd_train_credibility,
    "extract": cmd_extract,
    "train": cmd_train,
    "rank": cmd_rank,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
    "topics dump": cmd_topics_dump,
    "pipeline": cmd_pipeline,
}


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    _setup_logging(args.log_level)
    command = args.command + (f" {args.topics_command}" if args.command == "topics" else "")
    try:
        config = _config(args)
        _record_config(config, command)
        COMMANDS[command](args, config)
    except UsageError as exc:
        print(f"cqarank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigurationError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_USAGE
    except TrainingError as exc:
        logger.error("training failed: %s", exc)
        return EXIT_TRAINING
    except (CqaError, ValueError, KeyError, OSError) as exc:
        logger.error("invalid input: %s", exc)
        return EXIT_DATA
    return EXIT_OK


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
