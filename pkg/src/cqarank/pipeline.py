"""End-to-end training and ranking for subtasks A, B and C.

Auxiliary models (embeddings, topics, PMI, credibility) and all frozen
statistics are fit on the training corpus only. The classifier is binary
Good-vs-rest; its calibrated probability is the ranking score, divided by
the related question's search rank for subtask C.
"""
from __future__ import annotations

import configparser
import dataclasses
import json
import logging
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .corpus import CommentLabel, Corpus, RankedRun, write_run_file
from .embeddings import EmbeddingConfig, EmbeddingModel, load_text_vectors, train_sgns
from .errors import ConfigurationError, TrainingError, ValidationError
from .features import (
    GROUPS,
    CredibilityModel,
    FeatureMatrix,
    FeatureModels,
    PairContext,
    Scaler,
    TextAnalyzer,
    check_groups,
    credibility_training_data,
    extract_raw,
    train_credibility_model,
)
from .pmi import PmiDictionary, build_pmi_dictionary
from .rank_eval import AblationReport, AblationRow, ablation_configurations, accuracy, fuse_subtask_c, map_score
from .svm import TrainConfig, load_model, predict_proba, save_model, train_linear_sgd, train_rbf_smo
from .textproc import Gazetteer, Lexicons, default_gazetteer, default_lexicons, surfaces, tokenize, words
from .topics import TopicModel, train_lda

logger = logging.getLogger(__name__)

SUBTASKS = ("A", "B", "C")
GRID_C = (0.1, 1.0, 10.0)


@dataclass(frozen=True)
class TopicSettings:
    K: int = 100
    alpha: float | None = None
    beta: float = 0.01
    iterations: int = 1000
    infer_iterations: int = 100
    text: str = "subject_body"  # or "body"

    def __post_init__(self):
        if self.text not in ("subject_body", "body"):
            raise ValueError("topics.text must be 'subject_body' or 'body'")


@dataclass(frozen=True)
class PipelineConfig:
    subtask: str = "A"
    seed: int = 0
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    topics: TopicSettings = field(default_factory=TopicSettings)
    svm: TrainConfig = field(default_factory=TrainConfig)
    classifier: str = "rbf"
    groups: tuple[str, ...] = GROUPS
    pmi_smoothing: float = 0.5
    pmi_min_count: int = 2
    map_depth: int = 10
    exclude_zero_relevant: bool = True
    link_allowlist: tuple[str, ...] = ("qatarliving.com",)
    extra_similarities: bool = True
    grid_search: bool = False
    reference_time: int | None = None
    jobs: int | None = None
    # paths
    corpus: str | None = None
    profiles: str | None = None
    models: str | None = None
    out: str | None = None
    vectors: str | None = None
    lexicons: str | None = None
    gazetteers: str | None = None
    credibility_corpus: str | None = None

    def __post_init__(self):
        if self.subtask not in SUBTASKS:
            raise ConfigurationError(f"subtask must be one of {', '.join(SUBTASKS)}")
        if self.classifier not in ("rbf", "linear"):
            raise ConfigurationError("classifier must be 'rbf' or 'linear'")
        try:
            object.__setattr__(self, "groups", tuple(check_groups(self.groups)))
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
        if self.map_depth < 1:
            raise ConfigurationError("map_depth must be >= 1")

    def with_seed(self, seed: int) -> PipelineConfig:
        """Apply one seed to every stochastic component."""
        return dataclasses.replace(
            self,
            seed=seed,
            embedding=dataclasses.replace(self.embedding, seed=seed),
            svm=dataclasses.replace(self.svm, seed=seed),
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def effective_jobs(self) -> int:
        return self.jobs or os.cpu_count() or 1


# -- config files ----------------------------------------------------------------------

_SECTIONS = {"embedding": EmbeddingConfig, "topics": TopicSettings, "svm": TrainConfig}


def _coerce(value: str, current, name: str):
    v = value.strip()
    if isinstance(current, bool):
        if v.lower() in ("1", "true", "yes", "on"):
            return True
        if v.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigurationError(f"{name}: expected a boolean, got {value!r}")
    if v.lower() in ("none", "null", ""):
        return None
    if isinstance(current, tuple):
        return tuple(x.strip() for x in v.split(",") if x.strip())
    try:
        if isinstance(current, int):
            return int(v)
        if isinstance(current, float):
            return float(v)
    except ValueError:
        raise ConfigurationError(f"{name}: cannot parse {value!r}") from None
    # fields defaulting to None: guess from the literal
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def parse_settings(items: Mapping[str, str], base: PipelineConfig | None = None) -> PipelineConfig:
    """Build a config from flat ``key = value`` settings.

    Keys of the nested settings use a section prefix, e.g. ``svm.C`` or
    ``embedding.dim``. ``groups = all`` enables every feature group.
    """
    base = base or PipelineConfig()
    top: dict = {}
    nested: dict[str, dict] = {name: {} for name in _SECTIONS}
    top_fields = {f.name for f in dataclasses.fields(PipelineConfig)} - set(_SECTIONS)
    for key, value in items.items():
        section, _, name = key.partition(".")
        if name:
            if section not in _SECTIONS:
                raise ConfigurationError(f"unknown config section {section!r}")
            obj = getattr(base, section)
            if name not in {f.name for f in dataclasses.fields(obj)}:
                raise ConfigurationError(f"unknown config key {key!r}")
            nested[section][name] = _coerce(value, getattr(obj, name), key)
        else:
            if key not in top_fields:
                raise ConfigurationError(f"unknown config key {key!r}")
            if key == "groups" and value.strip().lower() == "all":
                top[key] = GROUPS
            else:
                top[key] = _coerce(value, getattr(base, key), key)
    try:
        sections = {s: dataclasses.replace(getattr(base, s), **kv) for s, kv in nested.items() if kv}
        config = dataclasses.replace(base, **top, **sections)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(str(exc)) from None
    if "seed" in top:
        config = config.with_seed(config.seed)
    return config


def read_config_file(path) -> dict[str, str]:
    """Read ``key = value`` lines; ``#`` starts a comment, [sections] prefix keys."""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    parser.optionxform = str
    text = Path(path).read_text(encoding="utf-8")
    try:
        parser.read_string("[__top__]\n" + text)
    except configparser.Error as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    out = {}
    for section in parser.sections():
        prefix = "" if section == "__top__" else section + "."
        for k, v in parser.items(section):
            out[prefix + k] = v
    return out


# -- auxiliary models -------------------------------------------------------------------


def _special_tokens(text: str) -> list[str]:
    return surfaces(words(tokenize(text, substitute_specials=True)))


def corpus_texts(corpus: Corpus) -> list[str]:
    """Every distinct question and comment text, in corpus order."""
    seen, texts = set(), []
    for thread in corpus.threads:
        questions = [thread.original_question, thread.question]
        for q in questions:
            if q is not None and ("q", q.id) not in seen:
                seen.add(("q", q.id))
                texts.append(q.text)
        for c in thread.comments:
            if ("c", c.id) not in seen:
                seen.add(("c", c.id))
                texts.append(c.body)
    return texts


def topic_documents(corpus: Corpus, text_mode: str = "subject_body") -> list[list[str]]:
    seen, docs = set(), []
    for thread in corpus.threads:
        for q in (thread.original_question, thread.question):
            if q is not None and ("q", q.id) not in seen:
                seen.add(("q", q.id))
                docs.append(_special_tokens(q.body if text_mode == "body" else q.text))
        for c in thread.comments:
            if ("c", c.id) not in seen:
                seen.add(("c", c.id))
                docs.append(_special_tokens(c.body))
    return [d for d in docs if d]


def spell_vocabulary(corpus: Corpus, min_count: int) -> frozenset:
    counts = Counter(t.surface for text in corpus_texts(corpus) for t in words(tokenize(text)))
    return frozenset(w for w, n in counts.items() if n >= min_count)


def default_reference_time(corpus: Corpus) -> int:
    times = [p.last_activity_time for p in corpus.profiles.values()]
    for thread in corpus.threads:
        for q in (thread.question, thread.original_question):
            if q is not None and q.timestamp is not None:
                times.append(q.timestamp)
    return max(times, default=0)


def category_counts(corpus: Corpus) -> dict[str, int]:
    seen = {}
    for thread in corpus.threads:
        seen[thread.question.id] = thread.question.category
    return dict(sorted(Counter(seen.values()).items()))


def _load_text_resources(config: PipelineConfig) -> tuple[Lexicons, Gazetteer]:
    lex = Lexicons.load(config.lexicons) if config.lexicons else default_lexicons()
    gaz = Gazetteer.load(config.gazetteers) if config.gazetteers else default_gazetteer()
    return lex, gaz


def train_embeddings(corpus: Corpus, config: PipelineConfig) -> EmbeddingModel:
    if config.vectors:
        return load_text_vectors(config.vectors)
    return train_sgns(corpus_texts(corpus), config.embedding)


def train_topics(corpus: Corpus, config: PipelineConfig, on_sweep=None) -> TopicModel:
    t = config.topics
    return train_lda(topic_documents(corpus, t.text), K=t.K, alpha=t.alpha, beta=t.beta,
                     iterations=t.iterations, seed=config.seed, on_sweep=on_sweep)


def build_pmi(corpus: Corpus, config: PipelineConfig) -> PmiDictionary:
    return build_pmi_dictionary(corpus, smoothing_k=config.pmi_smoothing, min_count=config.pmi_min_count)


def train_credibility(corpus: Corpus, config: PipelineConfig, lexicons: Lexicons | None = None) -> CredibilityModel:
    if config.credibility_corpus:
        from .corpus import load_corpus

        corpus = load_corpus(config.credibility_corpus)
    texts, labels = credibility_training_data(corpus)
    return train_credibility_model(texts, labels, dataclasses.replace(TrainConfig(), seed=config.seed), lexicons)


def build_models(corpus: Corpus, config: PipelineConfig, existing: FeatureModels | None = None) -> FeatureModels:
    """Fit whatever the enabled feature groups need on ``corpus``."""
    groups = set(config.groups)
    lex, gaz = _load_text_resources(config)
    prev = existing or FeatureModels(lexicons=lex, gazetteer=gaz)
    emb, top, pmi, cred = prev.embeddings, prev.topics, prev.pmi, prev.credibility
    if emb is None and groups & {"semantic_vectors", "distances"}:
        logger.info("training embeddings")
        emb = train_embeddings(corpus, config)
    if top is None and "distances" in groups:
        logger.info("training topic model (K=%d)", config.topics.K)
        top = train_topics(corpus, config)
    if pmi is None and "pmi" in groups:
        pmi = build_pmi(corpus, config)
    if cred is None and "credibility" in groups:
        cred = train_credibility(corpus, config, lex)
    return FeatureModels(
        pmi=pmi,
        embeddings=emb,
        topics=top,
        credibility=cred,
        lexicons=lex,
        gazetteer=gaz,
        category_counts=prev.category_counts or category_counts(corpus),
        reference_time=(config.reference_time if config.reference_time is not None
                        else prev.reference_time or default_reference_time(corpus)),
        link_allowlist=tuple(config.link_allowlist),
        topic_iterations=config.topics.infer_iterations,
        topic_seed=config.seed,
        topic_text=config.topics.text,
        extra_similarities=config.extra_similarities,
        spell_vocabulary=prev.spell_vocabulary or spell_vocabulary(corpus, config.embedding.min_count),
    )


# -- persistence of auxiliary models ----------------------------------------------------


def save_models(models: FeatureModels, directory) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    if models.embeddings is not None:
        models.embeddings.save(d / "embeddings.npz")
    if models.topics is not None:
        models.topics.save(d / "topics.npz")
    if models.pmi is not None:
        models.pmi.save(d / "pmi.json")
    if models.credibility is not None:
        save_credibility(models.credibility, d / "credibility.npz")
    stats = {
        "category_counts": dict(sorted(models.category_counts.items())),
        "reference_time": models.reference_time,
        "spell_vocabulary": sorted(models.spell_vocabulary or ()),
    }
    (d / "feature_stats.json").write_text(json.dumps(stats, indent=1, sort_keys=True), encoding="utf-8")


def save_credibility(model: CredibilityModel, path) -> None:
    save_model(model.linear, path)
    scaling = {"mean": model.mean.tolist(), "scale": model.scale.tolist()}
    Path(str(path) + ".scaling.json").write_text(json.dumps(scaling), encoding="utf-8")


def load_credibility(path) -> CredibilityModel:
    scaling = json.loads(Path(str(path) + ".scaling.json").read_text(encoding="utf-8"))
    return CredibilityModel(load_model(path), np.array(scaling["mean"]), np.array(scaling["scale"]))


def corpus_statistics(corpus: Corpus, config: PipelineConfig) -> dict:
    return {
        "category_counts": category_counts(corpus),
        "reference_time": default_reference_time(corpus),
        "spell_vocabulary": sorted(spell_vocabulary(corpus, config.embedding.min_count)),
    }


def load_models(directory, config: PipelineConfig, fallback: Corpus | None = None) -> FeatureModels:
    """Load saved auxiliary models.

    Frozen statistics come from ``feature_stats.json``; when it is absent they
    are computed from ``fallback``, which must then be the training corpus.
    """
    d = Path(directory)
    stats_path = d / "feature_stats.json"
    if stats_path.is_file():
        stats = json.loads(stats_path.read_text(encoding="utf-8"))
    elif fallback is not None:
        logger.info("no feature_stats.json in %s; computing statistics from the given corpus", d)
        stats = corpus_statistics(fallback, config)
    else:
        raise ConfigurationError(f"{d}: no feature_stats.json (run train first)")
    lex, gaz = _load_text_resources(config)

    def opt(name, loader):
        p = d / name
        return loader(p) if p.is_file() else None

    return FeatureModels(
        pmi=opt("pmi.json", PmiDictionary.load),
        embeddings=opt("embeddings.npz", EmbeddingModel.load),
        topics=opt("topics.npz", TopicModel.load),
        credibility=opt("credibility.npz", load_credibility),
        lexicons=lex,
        gazetteer=gaz,
        category_counts=stats["category_counts"],
        reference_time=stats["reference_time"] if config.reference_time is None else config.reference_time,
        link_allowlist=tuple(config.link_allowlist),
        topic_iterations=config.topics.infer_iterations,
        topic_seed=config.seed,
        topic_text=config.topics.text,
        extra_similarities=config.extra_similarities,
        spell_vocabulary=frozenset(stats["spell_vocabulary"]),
    )


# -- feature extraction -------------------------------------------------------------


def pair_contexts(corpus: Corpus, models: FeatureModels, subtask: str):
    """(context, key, label, search rank) for every pair of the subtask."""
    for thread in corpus.threads:
        if subtask in ("B", "C") and thread.original_question is None:
            raise ValidationError(f"thread {thread.question.id}: subtask {subtask} needs original_question")
        if subtask == "B":
            rel = thread.question.relevance
            label = 0 if rel is None else (1 if rel.relevant else -1)
            ctx = PairContext(thread, None, models, corpus.profiles, "B")
            yield ctx, (ctx.query_id, ctx.candidate_id), label, thread.question.search_rank or 1
            continue
        rank = 1
        if subtask == "C":
            rank = thread.question.search_rank
            if rank is None:
                raise ValidationError(f"thread {thread.question.id}: subtask C needs search_rank")
        for c in thread.comments:
            label = 0 if c.label is None else (1 if c.label is CommentLabel.GOOD else -1)
            ctx = PairContext(thread, c, models, corpus.profiles, subtask)
            yield ctx, (ctx.query_id, ctx.candidate_id), label, rank


_WORKER: dict = {}


def _init_worker(models, profiles, groups, subtask):
    _WORKER.update(models=models, profiles=profiles, groups=groups, subtask=subtask,
                   analyzer=TextAnalyzer(models))


def _extract_threads(threads):
    w = _WORKER
    part = Corpus(tuple(threads), w["profiles"])
    return [extract_raw(ctx, w["groups"], w["analyzer"]).values
            for ctx, _, _, _ in pair_contexts(part, w["models"], w["subtask"])]


def extract_matrix(corpus: Corpus, models: FeatureModels, config: PipelineConfig,
                   groups: Iterable[str] | None = None, jobs: int | None = None) -> FeatureMatrix:
    """Raw feature matrix of every pair; rows follow corpus order."""
    groups = check_groups(groups if groups is not None else config.groups)
    models.require(groups)
    layout = models.layout(groups)
    names = [n for n, _ in layout]
    group_idx: dict[str, list[int]] = {}
    for i, (_, g) in enumerate(layout):
        group_idx.setdefault(g, []).append(i)

    meta = [(key, label, rank) for _, key, label, rank in pair_contexts(corpus, models, config.subtask)]
    jobs = jobs or config.effective_jobs
    threads = list(corpus.threads)
    if jobs > 1 and len(threads) > 1:
        chunks = [threads[i::jobs] for i in range(jobs)]
        # interleaved chunks balance the load; rows are put back in corpus order below
        with ProcessPoolExecutor(jobs, initializer=_init_worker,
                                 initargs=(models, corpus.profiles, groups, config.subtask)) as pool:
            parts = list(pool.map(_extract_threads, chunks))
        by_thread = {}
        for chunk, rows in zip(chunks, parts):
            it = iter(rows)
            for t in chunk:
                n = 1 if config.subtask == "B" else len(t.comments)
                by_thread[id(t)] = [next(it) for _ in range(n)]
        rows = [r for t in threads for r in by_thread[id(t)]]
    else:
        _init_worker(models, corpus.profiles, groups, config.subtask)
        rows = _extract_threads(threads)
    X = np.array(rows, dtype=float).reshape(len(meta), len(names))
    if not np.all(np.isfinite(X)):
        raise ValidationError("non-finite feature values")
    return FeatureMatrix(
        names=names,
        groups=group_idx,
        X=X,
        keys=[m[0] for m in meta],
        labels=np.array([m[1] for m in meta], dtype=float),
        search_ranks=np.array([m[2] for m in meta], dtype=np.int64),
    )


# -- classifier ------------------------------------------------------------------------


@dataclass
class RankerModel:
    classifier: object
    scaler: Scaler
    kind: str

    def probabilities(self, matrix: FeatureMatrix) -> np.ndarray:
        X = self.scaler.transform(matrix.X, matrix.names)
        return np.atleast_1d(predict_proba(self.classifier, X)) if len(X) else np.zeros(0)

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        save_model(self.classifier, d / "classifier.npz")
        payload = {"kind": self.kind, "scaler": self.scaler.to_dict()}
        (d / "ranker.json").write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, directory) -> RankerModel:
        d = Path(directory)
        payload = json.loads((d / "ranker.json").read_text(encoding="utf-8"))
        return cls(load_model(d / "classifier.npz"), Scaler.from_dict(payload["scaler"]), payload["kind"])


def train_ranker(matrix: FeatureMatrix, config: PipelineConfig, svm: TrainConfig | None = None) -> RankerModel:
    """Standardize on the training rows and fit the binary classifier."""
    labelled = matrix.labels != 0
    if not labelled.any():
        raise TrainingError("no labelled training pairs")
    X, y = matrix.X[labelled], matrix.labels[labelled]
    scaler = Scaler.fit(matrix.names, X)
    Xs = scaler.transform(X)
    svm = svm or config.svm
    if config.classifier == "linear":
        clf = train_linear_sgd(Xs, y, svm)
    else:
        clf = train_rbf_smo(Xs, y, svm)
    return RankerModel(clf, scaler, config.classifier)


def run_from_scores(matrix: FeatureMatrix, probs: np.ndarray, subtask: str, tag: str = "cqarank") -> RankedRun:
    """Rank every query's documents by probability (fused with search rank for C).

    Ties keep corpus order, which is comment position for A and C; subtask B
    breaks ties by search rank.
    """
    per_query: dict[str, list[tuple[int, str, float]]] = {}
    for i, ((qid, doc), p) in enumerate(zip(matrix.keys, probs)):
        score = fuse_subtask_c(float(p), int(matrix.search_ranks[i])) if subtask == "C" else float(p)
        tie = int(matrix.search_ranks[i]) if subtask == "B" else 0
        per_query.setdefault(qid, []).append((tie, doc, score))
    run = RankedRun(tag=tag)
    for qid, items in per_query.items():
        items = sorted(items, key=lambda it: it[0])  # stable
        run.add(qid, [(doc, score) for _, doc, score in items])
    return run


def gold_from_matrix(matrix: FeatureMatrix) -> dict[tuple[str, str], bool]:
    return {k: bool(lab > 0) for k, lab in zip(matrix.keys, matrix.labels) if lab != 0}


def evaluate_scores(matrix: FeatureMatrix, probs: np.ndarray, config: PipelineConfig) -> dict[str, float]:
    """MAP and binary accuracy (percent) over labelled pairs."""
    labelled = matrix.labels != 0
    gold = gold_from_matrix(matrix)
    keep = [i for i in range(len(matrix.keys)) if labelled[i]]
    sub = dataclasses.replace(matrix, X=matrix.X[keep], keys=[matrix.keys[i] for i in keep],
                              labels=matrix.labels[keep], search_ranks=matrix.search_ranks[keep])
    run = run_from_scores(sub, probs[keep], config.subtask)
    preds = {matrix.keys[i]: bool(probs[i] >= 0.5) for i in keep}
    return {
        "map": map_score(run, gold, config.map_depth, config.exclude_zero_relevant),
        "accuracy": accuracy(preds, gold) if gold else 0.0,
    }


def grid_search(train_m: FeatureMatrix, dev_m: FeatureMatrix, config: PipelineConfig):
    """Pick C and gamma by dev MAP; the first best setting wins ties."""
    d = len(train_m.names)
    best = None
    for C in GRID_C:
        for gamma in (0.01, 1.0 / max(1, d), 0.1):
            svm = dataclasses.replace(config.svm, C=C, gamma=gamma)
            ranker = train_ranker(train_m, config, svm)
            score = evaluate_scores(dev_m, ranker.probabilities(dev_m), config)["map"]
            logger.info("grid C=%g gamma=%g: dev MAP %.2f", C, gamma, score)
            if best is None or score > best[0]:
                best = (score, svm)
    return best[1], best[0]


def ablate_matrices(train_m: FeatureMatrix, dev_m: FeatureMatrix, test_m: FeatureMatrix | None,
                    group_list: list[str], config: PipelineConfig) -> AblationReport:
    """One row for all enabled groups plus one per excluded group.

    The RBF width is fixed from the full feature count so that every row uses
    the same kernel; otherwise dropping even an uninformative group would
    change gamma = 1/d.
    """
    enabled = [g for g in config.groups if g in train_m.groups]
    gamma = config.svm.resolved_gamma(len(train_m.names))
    svm = dataclasses.replace(config.svm, gamma=gamma)
    report = AblationReport()
    for name, groups in ablation_configurations(enabled, group_list):
        tr = train_m.select(groups)
        ranker = train_ranker(tr, config, svm)
        dev = evaluate_scores(dev_m.select(groups), ranker.probabilities(dev_m.select(groups)), config)
        row = AblationRow(name, dev["map"], dev["accuracy"])
        if test_m is not None:
            te_m = test_m.select(groups)
            te = evaluate_scores(te_m, ranker.probabilities(te_m), config)
            row.map_test, row.acc_test = te["map"], te["accuracy"]
        logger.info("ablation %s: dev MAP %.2f", name, row.map_dev)
        report.rows.append(row)
    return report


# -- full runs --------------------------------------------------------------------------


@dataclass
class PipelineResult:
    run: RankedRun
    metrics: dict
    ranker: RankerModel
    models: FeatureModels


def run_pipeline(train: Corpus, evaluation: Corpus, config: PipelineConfig, out_dir=None,
                 dev: Corpus | None = None) -> PipelineResult:
    """Train everything on ``train``, rank ``evaluation``, optionally write artifacts."""
    models = build_models(train, config)
    train_m = extract_matrix(train, models, config)
    svm = config.svm
    if config.grid_search:
        if dev is None:
            raise ConfigurationError("grid search needs a dev corpus")
        svm, _ = grid_search(train_m, extract_matrix(dev, models, config), config)
    ranker = train_ranker(train_m, config, svm)
    eval_m = extract_matrix(evaluation, models, config)
    probs = ranker.probabilities(eval_m)
    run = run_from_scores(eval_m, probs, config.subtask)
    metrics = {"subtask": config.subtask, "pairs": len(eval_m.keys), "queries": len(run.queries)}
    if gold_from_matrix(eval_m):
        metrics.update(evaluate_scores(eval_m, probs, config))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_models(models, out / "models")
        ranker.save(out / "models")
        write_run_file(run, out / "run.txt")
        (out / "metrics.json").write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return PipelineResult(run, metrics, ranker, models)
