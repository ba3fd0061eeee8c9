"""Named, grouped feature vectors for question-comment and question-question pairs.

Every feature belongs to exactly one group; groups are the unit of ablation.
Enabled groups are always emitted in :data:`GROUPS` order, and features keep
a fixed order inside their group, so removing a group removes exactly its
columns and nothing else moves.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Comment, CommentLabel, Corpus, Question, Thread, UserProfile, missing_profile
from .embeddings import EmbeddingModel, centroid
from .errors import ConfigurationError
from .pmi import PmiDictionary, pmi_features
from .readability import ReadabilityScores, compute_readability
from .similarity import cosine, hamming_similarity, hash64, simhash
from .svm import LinearModel, TrainConfig, predict_proba, train_linear_sgd
from .textproc import (
    Gazetteer,
    Lexicons,
    SpellIndex,
    TokenKind,
    count_misspellings,
    count_pos,
    default_gazetteer,
    default_lexicons,
    detect_patterns,
    surfaces,
    tokenize,
    words,
)
from .topics import TopicModel, infer_topics, topic_distance

GROUPS = (
    "metadata",
    "lexical",
    "readability",
    "pmi",
    "simhash",
    "semantic_vectors",
    "distances",
    "urls",
    "user_stats",
    "troll",
    "credibility",
    "pos_q",
    "pos_c",
    "wh_q",
    "wh_c",
    "locorg_c",
)
AUTHOR_BUCKETS = 256
SECONDS_PER_DAY = 86400.0
SPECIAL_PUNCTUATION = frozenset("?!…")


def check_groups(groups: Iterable[str]) -> list[str]:
    groups = list(groups)
    unknown = [g for g in groups if g not in GROUPS]
    if unknown:
        raise ValueError(f"unknown feature group(s): {', '.join(unknown)}")
    return [g for g in GROUPS if g in groups]


# -- layout ----------------------------------------------------------------------

CREDIBILITY_INPUTS = (
    "char_length",
    "has_special_punct",
    "has_emoticon",
    "has_first_person",
    "has_third_person",
    "has_mention",
    "has_url",
)
_POS_FIELDS = ("n_nouns", "n_verbs", "n_pronouns", "n_adjectives", "n_tokens")


def class_feature_name(cls: str) -> str:
    return "pmi_" + re.sub(r"(?<!^)(?=[A-Z])", "_", cls).lower()


def group_names(group: str, dim: int = 100, pmi_classes: Sequence[str] = tuple(c.value for c in CommentLabel),
                extra_similarities: bool = True) -> list[str]:
    """Feature names of one group, in emission order."""
    if group == "metadata":
        return ["is_author_comment", "comment_position", "author_id_hash_bucket", "len_ratio",
                "same_user_comment_count", "same_user_comment_order", "category_question_count"]
    if group == "urls":
        return ["n_inbound_links", "n_outbound_links"]
    if group == "lexical":
        return ["has_smiley", "has_currency", "has_email", "has_phone", "laughter_only", "has_thanks",
                "has_opinion_marker", "has_disagreement_marker", "has_user_mention",
                "n_question_marks_q", "n_question_marks_c", "n_misspellings_c", "n_offensive_c"]
    if group == "wh_q":
        return ["n_wh_words_q"]
    if group == "wh_c":
        return ["n_wh_words_c", "wh_answer_match"]
    if group in ("pos_q", "pos_c"):
        side = group[-1]
        return [f"{f}_{side}" for f in _POS_FIELDS]
    if group == "locorg_c":
        return ["n_locations_c", "n_organisations_c", "n_persons_c", "n_addresses_c", "has_location_or_address_c"]
    if group == "readability":
        return [f"{n}_{side}" for side in ("q", "c") for n in ReadabilityScores.names()]
    if group == "pmi":
        return [class_feature_name(c) for c in pmi_classes]
    if group == "simhash":
        return ["simhash_similarity"]
    if group == "semantic_vectors":
        return ([f"q_vec_{i:03d}" for i in range(dim)] + [f"c_vec_{i:03d}" for i in range(dim)]
                + ["oov_all_q", "oov_all_c"])
    if group == "distances":
        names = ["cosine_qc", "topic_distance"]
        if extra_similarities:
            names += ["cosine_c_subject", "cosine_c_category"]
        return names
    if group == "user_stats":
        return (["user_n_questions", "user_n_comments", "user_n_classifieds", "user_days_since_registration",
                 "user_days_since_last_activity"]
                + [f"user_active_hour_{h:02d}" for h in range(24)]
                + ["user_n_good_comments", "user_n_bad_comments", "user_profile_missing"])
    if group == "troll":
        return ["user_troll_mentions"]
    if group == "credibility":
        return [f"cred_{n}" for n in CREDIBILITY_INPUTS] + ["cred_predicted_credible", "cred_probability"]
    raise ValueError(f"unknown feature group {group!r}")


def feature_layout(groups: Iterable[str] = GROUPS, **kwargs) -> list[tuple[str, str]]:
    """(name, group) for every feature of the enabled groups, in output order."""
    return [(name, g) for g in check_groups(groups) for name in group_names(g, **kwargs)]


def feature_manifest(layout: Sequence[tuple[str, str]]) -> str:
    lines = ["index\tname\tgroup"]
    lines += [f"{i}\t{name}\t{group}" for i, (name, group) in enumerate(layout)]
    return "\n".join(lines) + "\n"


# -- vectors ----------------------------------------------------------------------


@dataclass
class FeatureVector:
    names: list[str]
    values: np.ndarray
    groups: dict[str, list[int]]

    @classmethod
    def from_items(cls, items: Sequence[tuple[str, str, float]]) -> FeatureVector:
        groups: dict[str, list[int]] = {}
        for i, (_, group, _) in enumerate(items):
            groups.setdefault(group, []).append(i)
        return cls([n for n, _, _ in items], np.array([float(v) for _, _, v in items]), groups)

    def __len__(self):
        return len(self.names)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))

    def group_of(self, index: int) -> str:
        for g, idx in self.groups.items():
            if index in idx:
                return g
        raise KeyError(index)


# -- credibility model -------------------------------------------------------------


def credibility_inputs(text: str, lexicons: Lexicons | None = None) -> list[float]:
    lexicons = lexicons or default_lexicons()
    tokens = tokenize(text)
    kinds = {t.kind for t in tokens}
    word_set = {t.surface for t in tokens if t.kind is TokenKind.WORD}
    return [
        float(len(text)),
        float(any(ch in SPECIAL_PUNCTUATION for ch in text)),
        float(TokenKind.SMILEY in kinds),
        float(bool(word_set & lexicons.first_person)),
        float(bool(word_set & lexicons.third_person)),
        float(TokenKind.MENTION in kinds),
        float(bool(kinds & {TokenKind.URL, TokenKind.IMAGE})),
    ]


def _credibility_transform(raw: np.ndarray) -> np.ndarray:
    out = np.array(raw, dtype=float)
    out[..., 0] = np.log1p(out[..., 0])
    return out


@dataclass
class CredibilityModel:
    """Linear SVM over the credibility inputs, standardized internally."""

    linear: LinearModel
    mean: np.ndarray
    scale: np.ndarray

    def _x(self, raw) -> np.ndarray:
        x = _credibility_transform(np.atleast_2d(raw))
        return (x - self.mean) / self.scale

    def predict(self, raw) -> tuple[float, float]:
        x = self._x(raw)
        label = float(self.linear.decision(x)[0] > 0)
        return label, float(predict_proba(self.linear, x[0]))


def train_credibility_model(texts: Sequence[str], credible: Sequence[bool], config: TrainConfig = TrainConfig(),
                            lexicons: Lexicons | None = None) -> CredibilityModel:
    raw = np.array([credibility_inputs(t, lexicons) for t in texts]).reshape(len(texts), len(CREDIBILITY_INPUTS))
    x = _credibility_transform(raw)
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0] = 1.0
    y = np.where(np.asarray(credible, dtype=bool), 1.0, -1.0)
    return CredibilityModel(train_linear_sgd((x - mean) / scale, y, config), mean, scale)


def credibility_training_data(corpus: Corpus) -> tuple[list[str], list[bool]]:
    """Comment texts labelled credible when annotated Good."""
    texts, labels = [], []
    for thread in corpus.threads:
        for c in thread.comments:
            if c.label is not None:
                texts.append(c.body)
                labels.append(c.label is CommentLabel.GOOD)
    return texts, labels


# -- extraction context --------------------------------------------------------------


@dataclass
class FeatureModels:
    """Trained auxiliary models and frozen corpus statistics."""

    pmi: PmiDictionary | None = None
    embeddings: EmbeddingModel | None = None
    topics: TopicModel | None = None
    credibility: CredibilityModel | None = None
    lexicons: Lexicons = field(default_factory=default_lexicons)
    gazetteer: Gazetteer = field(default_factory=default_gazetteer)
    category_counts: Mapping[str, int] = field(default_factory=dict)
    reference_time: int = 0
    link_allowlist: tuple[str, ...] = ("qatarliving.com",)
    topic_iterations: int = 100
    topic_seed: int = 0
    topic_text: str = "subject_body"
    extra_similarities: bool = True
    spell_vocabulary: frozenset | None = None

    def __post_init__(self):
        vocab = self.spell_vocabulary
        if vocab is None and self.embeddings is not None:
            vocab = self.embeddings.words
        self.spell_index = SpellIndex(vocab or ())

    @property
    def dim(self) -> int:
        return self.embeddings.dim if self.embeddings is not None else 0

    @property
    def pmi_classes(self) -> tuple[str, ...]:
        return self.pmi.classes if self.pmi is not None else tuple(c.value for c in CommentLabel)

    def layout(self, groups: Iterable[str] = GROUPS) -> list[tuple[str, str]]:
        return feature_layout(groups, dim=self.dim, pmi_classes=self.pmi_classes,
                              extra_similarities=self.extra_similarities)

    def require(self, groups: Iterable[str]) -> None:
        needs = {
            "pmi": ("pmi",),
            "semantic_vectors": ("embeddings",),
            "distances": ("embeddings", "topics"),
            "credibility": ("credibility",),
        }
        for g in groups:
            for attr in needs.get(g, ()):
                if getattr(self, attr) is None:
                    raise ConfigurationError(f"feature group {g!r} needs a trained {attr} model")


@dataclass(frozen=True)
class PairContext:
    """One pair to score.

    Subtasks A and C pair the thread question with ``comment``; subtask B
    pairs the original question with the thread's (related) question.
    """

    thread: Thread
    comment: Comment | None = None
    models: FeatureModels | None = None
    profiles: Mapping[str, UserProfile] = field(default_factory=dict)
    subtask: str = "A"

    @property
    def query(self) -> Question:
        if self.subtask == "B":
            return self.thread.original_question
        return self.thread.question

    @property
    def candidate_text(self) -> str:
        if self.subtask == "B":
            return self.thread.question.text
        return self.comment.body

    @property
    def candidate_author(self) -> str:
        return self.thread.question.author_id if self.subtask == "B" else self.comment.author_id

    @property
    def candidate_id(self) -> str:
        return self.thread.question.id if self.subtask == "B" else self.comment.id

    @property
    def query_id(self) -> str:
        if self.subtask in ("B", "C"):
            return self.thread.original_question.id
        return self.thread.question.id

    def profile(self) -> UserProfile:
        return self.profiles.get(self.candidate_author) or missing_profile(self.candidate_author)


# -- per-text analysis ------------------------------------------------------------------


class TextAnalyzer:
    """Memoized per-text computations shared by many pairs."""

    def __init__(self, models: FeatureModels, max_entries: int = 100_000):
        self.models = models
        self.max_entries = max_entries
        self._cache: dict[tuple[str, str], object] = {}

    def _memo(self, kind, text, fn):
        key = (kind, text)
        if key not in self._cache:
            if len(self._cache) >= self.max_entries:
                self._cache.clear()
            self._cache[key] = fn(text)
        return self._cache[key]

    def tokens(self, text):
        return self._memo("tokens", text, lambda t: words(tokenize(t)))

    def special_tokens(self, text):
        return self._memo("special", text, lambda t: surfaces(words(tokenize(t, substitute_specials=True))))

    def patterns(self, text):
        m = self.models
        return self._memo("patterns", text, lambda t: detect_patterns(t, m.link_allowlist, m.lexicons))

    def readability(self, text):
        return self._memo("readability", text, compute_readability)

    def pos(self, text):
        return self._memo("pos", text, lambda t: count_pos(self.tokens(t), self.models.lexicons))

    def entities(self, text):
        return self._memo("entities", text, lambda t: self.models.gazetteer.match(self.tokens(t)))

    def fingerprint(self, text):
        return self._memo("simhash", text, lambda t: simhash(self.special_tokens(t)))

    def centroid(self, text):
        emb = self.models.embeddings
        return self._memo("centroid", text, lambda t: centroid(emb.tokens(t), emb))

    def theta(self, text):
        m = self.models
        return self._memo("theta", text,
                          lambda t: infer_topics(self.special_tokens(t), m.topics, m.topic_iterations, m.topic_seed))

    def credibility(self, text):
        def compute(t):
            raw = credibility_inputs(t, self.models.lexicons)
            label, prob = self.models.credibility.predict(raw)
            return raw + [label, prob]
        return self._memo("credibility", text, compute)


def _topic_text(q: Question, mode: str) -> str:
    return q.body if mode == "body" else q.text


# -- feature groups -------------------------------------------------------------------


def metadata_features(ctx: PairContext, analyzer: TextAnalyzer | None = None) -> FeatureVector:
    """Thread-structure features plus link counts of the candidate text."""
    analyzer = analyzer or TextAnalyzer(ctx.models)
    q = ctx.query
    author = ctx.candidate_author
    n_q = len(analyzer.tokens(q.text))
    n_c = len(analyzer.tokens(ctx.candidate_text))
    if ctx.subtask == "B":
        position = ctx.thread.question.search_rank or 0
        same_count = same_order = 0
        category = ctx.thread.question.category
    else:
        position = ctx.comment.position
        by_user = [c for c in ctx.thread.comments if c.author_id == author]
        same_count = len(by_user)
        same_order = 1 + sum(c.position < ctx.comment.position for c in by_user)
        category = ctx.thread.question.category
    flags = analyzer.patterns(ctx.candidate_text)
    meta = [
        ("is_author_comment", float(bool(author) and author == q.author_id)),
        ("comment_position", float(position)),
        ("author_id_hash_bucket", float(hash64(author) % AUTHOR_BUCKETS)),
        ("len_ratio", n_c / max(1, n_q)),
        ("same_user_comment_count", float(same_count)),
        ("same_user_comment_order", float(same_order)),
        ("category_question_count", float(ctx.models.category_counts.get(category, 0))),
    ]
    urls = [("n_inbound_links", float(flags.n_inbound_links)), ("n_outbound_links", float(flags.n_outbound_links))]
    return FeatureVector.from_items([(n, "metadata", v) for n, v in meta] + [(n, "urls", v) for n, v in urls])


def lexical_features(ctx: PairContext, analyzer: TextAnalyzer | None = None) -> FeatureVector:
    analyzer = analyzer or TextAnalyzer(ctx.models)
    q_text, c_text = ctx.query.text, ctx.candidate_text
    fq, fc = analyzer.patterns(q_text), analyzer.patterns(c_text)
    c_tokens = analyzer.tokens(c_text)
    entities = analyzer.entities(c_text)
    q_words = {t.surface for t in analyzer.tokens(q_text)}
    loc_or_addr = entities["location"] + entities["address"] > 0
    wh_match = ("where" in q_words and loc_or_addr) or ("who" in q_words and entities["person"] > 0)
    items = [(name, "lexical", float(getattr(fc, name))) for name in (
        "has_smiley", "has_currency", "has_email", "has_phone", "laughter_only", "has_thanks",
        "has_opinion_marker", "has_disagreement_marker", "has_user_mention")]
    items += [
        ("n_question_marks_q", "lexical", float(fq.n_question_marks)),
        ("n_question_marks_c", "lexical", float(fc.n_question_marks)),
        ("n_misspellings_c", "lexical", float(count_misspellings(c_tokens, ctx.models.spell_index))),
        ("n_offensive_c", "lexical", float(entities["offensive"])),
        ("n_wh_words_q", "wh_q", float(fq.n_wh_words)),
        ("n_wh_words_c", "wh_c", float(fc.n_wh_words)),
        ("wh_answer_match", "wh_c", float(wh_match)),
    ]
    for side, text in (("q", q_text), ("c", c_text)):
        pc = analyzer.pos(text)
        items += [(f"{f}_{side}", f"pos_{side}", float(getattr(pc, f))) for f in _POS_FIELDS]
    items += [
        ("n_locations_c", "locorg_c", float(entities["location"])),
        ("n_organisations_c", "locorg_c", float(entities["organisation"])),
        ("n_persons_c", "locorg_c", float(entities["person"])),
        ("n_addresses_c", "locorg_c", float(entities["address"])),
        ("has_location_or_address_c", "locorg_c", float(loc_or_addr)),
    ]
    return FeatureVector.from_items(items)


def readability_features(ctx: PairContext, analyzer: TextAnalyzer | None = None) -> FeatureVector:
    analyzer = analyzer or TextAnalyzer(ctx.models)
    items = []
    for side, text in (("q", ctx.query.text), ("c", ctx.candidate_text)):
        scores = analyzer.readability(text)
        items += [(f"{n}_{side}", "readability", v) for n, v in zip(ReadabilityScores.names(), scores.values())]
    return FeatureVector.from_items(items)


def pmi_group(ctx: PairContext, analyzer: TextAnalyzer | None = None) -> FeatureVector:
    analyzer = analyzer or TextAnalyzer(ctx.models)
    sums = pmi_features(analyzer.special_tokens(ctx.candidate_text), ctx.models.pmi)
    return FeatureVector.from_items([(class_feature_name(c), "pmi", v) for c, v in sums.items()])


def simhash_features(ctx: PairContext, analyzer: TextAnalyzer | None = None) -> FeatureVector:
    analyzer = analyzer or TextAnalyzer(ctx.models)
    sim = hamming_similarity(analyzer.fingerprint(ctx.query.text), analyzer.fingerprint(ctx.candidate_text))
    return FeatureVector.from_items([("simhash_similarity", "simhash", sim)])


def semantic_features(ctx: PairContext, analyzer: TextAnalyzer | None = None) -> FeatureVector:
    """Question and candidate centroids, their cosine, OOV flags and topic distance."""
    analyzer = analyzer or TextAnalyzer(ctx.models)
    ctx.models.require(["semantic_vectors", "distances"])
    q_vec, q_oov = analyzer.centroid(ctx.query.text)
    c_vec, c_oov = analyzer.centroid(ctx.candidate_text)
    items = [(f"q_vec_{i:03d}", "semantic_vectors", v) for i, v in enumerate(q_vec)]
    items += [(f"c_vec_{i:03d}", "semantic_vectors", v) for i, v in enumerate(c_vec)]
    items += [("oov_all_q", "semantic_vectors", float(q_oov)), ("oov_all_c", "semantic_vectors", float(c_oov))]
    mode = ctx.models.topic_text
    q_theta = analyzer.theta(_topic_text(ctx.query, mode))
    c_theta = analyzer.theta(ctx.candidate_text if ctx.subtask != "B" else _topic_text(ctx.thread.question, mode))
    items += [("cosine_qc", "distances", cosine(q_vec, c_vec)),
              ("topic_distance", "distances", topic_distance(q_theta, c_theta))]
    return FeatureVector.from_items(items)


def extra_similarity_features(ctx: PairContext, analyzer: TextAnalyzer | None = None) -> FeatureVector:
    """Cosine of the candidate centroid with the question subject and with its category name."""
    analyzer = analyzer or TextAnalyzer(ctx.models)
    c_vec, _ = analyzer.centroid(ctx.candidate_text)
    subject_vec, _ = analyzer.centroid(ctx.query.subject)
    category_vec, _ = analyzer.centroid(ctx.query.category)
    return FeatureVector.from_items([
        ("cosine_c_subject", "distances", cosine(c_vec, subject_vec)),
        ("cosine_c_category", "distances", cosine(c_vec, category_vec)),
    ])


def user_features(ctx: PairContext, analyzer: TextAnalyzer | None = None) -> FeatureVector:
    """Profile statistics of the candidate's author; zeros plus a flag when unknown."""
    p = ctx.profile()
    ref = ctx.models.reference_time
    if p.missing:
        stats = [0.0] * (len(group_names("user_stats")) - 1) + [1.0]
        troll = 0.0
    else:
        hours = np.asarray(p.active_hours, dtype=float)
        total = hours.sum()
        hist = (hours / total).tolist() if total > 0 else [0.0] * 24
        stats = [
            float(p.n_questions),
            float(p.n_comments),
            float(p.n_classifieds),
            (ref - p.registration_time) / SECONDS_PER_DAY,
            (ref - p.last_activity_time) / SECONDS_PER_DAY,
            *hist,
            float(p.n_good_comments),
            float(p.n_bad_comments),
            0.0,
        ]
        troll = float(p.troll_mentions)
    names = group_names("user_stats")
    return FeatureVector.from_items([(n, "user_stats", v) for n, v in zip(names, stats, strict=True)]
                                    + [("user_troll_mentions", "troll", troll)])


def credibility_features(comment_text: str, credibility_model: CredibilityModel,
                         lexicons: Lexicons | None = None) -> FeatureVector:
    raw = credibility_inputs(comment_text, lexicons)
    label, prob = credibility_model.predict(raw)
    names = group_names("credibility")
    return FeatureVector.from_items([(n, "credibility", v) for n, v in zip(names, raw + [label, prob], strict=True)])


def _credibility_group(ctx: PairContext, analyzer: TextAnalyzer) -> FeatureVector:
    names = group_names("credibility")
    values = analyzer.credibility(ctx.candidate_text)
    return FeatureVector.from_items([(n, "credibility", v) for n, v in zip(names, values, strict=True)])


# group -> function computing it (some functions feed several groups)
_PRODUCERS = {
    "metadata": metadata_features,
    "urls": metadata_features,
    "lexical": lexical_features,
    "wh_q": lexical_features,
    "wh_c": lexical_features,
    "pos_q": lexical_features,
    "pos_c": lexical_features,
    "locorg_c": lexical_features,
    "readability": readability_features,
    "pmi": pmi_group,
    "simhash": simhash_features,
    "semantic_vectors": semantic_features,
    "distances": semantic_features,
    "user_stats": user_features,
    "troll": user_features,
    "credibility": _credibility_group,
}


def extract_raw(ctx: PairContext, groups: Iterable[str] = GROUPS, analyzer: TextAnalyzer | None = None) -> FeatureVector:
    """Unscaled features of the enabled groups in canonical order."""
    groups = check_groups(groups)
    ctx.models.require(groups)
    analyzer = analyzer or TextAnalyzer(ctx.models)
    partial: dict[str, list[tuple[str, str, float]]] = {g: [] for g in groups}
    done = set()
    producers = [_PRODUCERS[g] for g in groups]
    if "distances" in groups and ctx.models.extra_similarities:
        producers.append(extra_similarity_features)
    for fn in producers:
        if fn in done:
            continue
        done.add(fn)
        fv = fn(ctx, analyzer)
        for i, name in enumerate(fv.names):
            g = fv.group_of(i)
            if g in partial:
                partial[g].append((name, g, float(fv.values[i])))
    return FeatureVector.from_items([item for g in groups for item in partial[g]])


# -- scaling -------------------------------------------------------------------------


@dataclass
class Scaler:
    """Per-feature standardization with statistics from training data only.

    Constant columns map to 0.
    """

    names: list[str]
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, names: Sequence[str], X) -> Scaler:
        X = np.asarray(X, dtype=float)
        mean = X.mean(axis=0) if len(X) else np.zeros(len(names))
        std = X.std(axis=0) if len(X) else np.zeros(len(names))
        return cls(list(names), mean, std)

    def _index(self, names: Sequence[str]) -> np.ndarray:
        pos = {n: i for i, n in enumerate(self.names)}
        try:
            return np.array([pos[n] for n in names], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"scaler was not fit on feature {exc.args[0]!r}") from None

    def transform(self, X, names: Sequence[str] | None = None) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        idx = self._index(names) if names is not None else np.arange(len(self.names))
        mean, scale = self.mean[idx], self.scale[idx]
        safe = np.where(scale > 0, scale, 1.0)
        return np.where(scale > 0, (X - mean) / safe, 0.0)

    def to_dict(self) -> dict:
        return {"names": self.names, "mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d) -> Scaler:
        return cls(d["names"], np.array(d["mean"], dtype=float), np.array(d["scale"], dtype=float))


def assemble(ctx: PairContext, enabled_groups: Iterable[str] = GROUPS, scaler: Scaler | None = None,
             analyzer: TextAnalyzer | None = None) -> FeatureVector:
    """Feature vector of the enabled groups, standardized when a scaler is given."""
    fv = extract_raw(ctx, enabled_groups, analyzer)
    if scaler is not None:
        fv.values = scaler.transform(fv.values[None, :], fv.names)[0]
    return fv


# -- matrices and export -------------------------------------------------------------


@dataclass
class FeatureMatrix:
    """Raw features of many pairs.

    ``keys`` are (query id, document id); ``labels`` are +1/-1 (0 when
    unlabelled); ``search_ranks`` are the related-question ranks used by
    subtask C fusion.
    """

    names: list[str]
    groups: dict[str, list[int]]
    X: np.ndarray
    keys: list[tuple[str, str]]
    labels: np.ndarray
    search_ranks: np.ndarray

    def columns(self, groups: Iterable[str]) -> np.ndarray:
        keep = set(groups)
        return np.array(sorted(i for g, idx in self.groups.items() if g in keep for i in idx), dtype=np.int64)

    def select(self, groups: Iterable[str]) -> FeatureMatrix:
        cols = self.columns(groups)
        names = [self.names[i] for i in cols]
        remap = {old: new for new, old in enumerate(cols)}
        new_groups = {g: [remap[i] for i in idx] for g, idx in self.groups.items() if idx and idx[0] in remap}
        return FeatureMatrix(names, new_groups, self.X[:, cols], self.keys, self.labels, self.search_ranks)


def write_csv(matrix: FeatureMatrix, path) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["qid", "docid", "label"] + matrix.names)
        for (qid, doc), label, row in zip(matrix.keys, matrix.labels, matrix.X):
            writer.writerow([qid, doc, int(label)] + [repr(float(v)) for v in row])


def write_svmlight(matrix: FeatureMatrix, path, X=None) -> None:
    """``label idx:value ...  # qid docid`` with 1-based indices, zeros omitted."""
    X = matrix.X if X is None else X
    with open(path, "w", encoding="utf-8") as fh:
        for (qid, doc), label, row in zip(matrix.keys, matrix.labels, X):
            feats = " ".join(f"{j + 1}:{float(v)!r}" for j, v in enumerate(row) if v != 0.0)
            fh.write(f"{int(label)} {feats} # {qid} {doc}\n".replace("  #", " #"))


def read_svmlight(path, n_features: int | None = None):
    """Parse svmlight lines. Returns (X, y, keys) where keys come from the
    trailing ``# qid docid`` comment when present."""
    rows, labels, keys = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            body, _, comment = line.partition("#")
            parts = body.split()
            if not parts:
                continue
            labels.append(float(parts[0]))
            feats = {}
            for tok in parts[1:]:
                if tok.startswith("qid:"):
                    continue
                idx, _, val = tok.partition(":")
                feats[int(idx) - 1] = float(val)
            rows.append(feats)
            c = comment.split()
            keys.append((c[0], c[1]) if len(c) >= 2 else (str(lineno), str(lineno)))
    width = n_features or (max((max(r) for r in rows if r), default=-1) + 1)
    X = np.zeros((len(rows), width))
    for i, feats in enumerate(rows):
        for j, v in feats.items():
            X[i, j] = v
    return X, np.array(labels), keys


__all__ = [
    "GROUPS",
    "FeatureVector",
    "FeatureModels",
    "FeatureMatrix",
    "PairContext",
    "Scaler",
    "TextAnalyzer",
    "assemble",
    "credibility_features",
    "extract_raw",
    "feature_layout",
    "feature_manifest",
    "lexical_features",
    "metadata_features",
    "semantic_features",
    "user_features",
]
