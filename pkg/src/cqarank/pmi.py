"""Class-association dictionary of unigrams and bigrams scored by smoothed PMI.

Unigrams and bigrams are counted in separate event spaces. Within one space,
with ``N`` n-gram occurrences, ``G`` distinct n-grams, ``C`` classes and
smoothing ``k``::

    pmi(g, c) = log((n(g,c) + k) * (N + k*G*C) / ((n(g) + k*C) * (n(c) + k*G)))

which is log P(g,c) / (P(g) P(c)) under add-k estimates of the joint table.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus import CommentLabel, Corpus
from .textproc import surfaces, tokenize, words

DEFAULT_CLASSES = tuple(label.value for label in CommentLabel)


def ngrams(tokens: Sequence[str], n: int):
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


@dataclass
class PmiDictionary:
    entries: dict[tuple[str, ...], dict[str, float]]
    class_priors: dict[str, float]
    total_tokens: int
    smoothing_k: float
    classes: tuple[str, ...] = field(default=DEFAULT_CLASSES)

    def get(self, gram: tuple[str, ...], cls: str, default: float = 0.0) -> float:
        scores = self.entries.get(gram)
        return default if scores is None else scores[cls]

    def to_json(self) -> str:
        payload = {
            "classes": list(self.classes),
            "class_priors": self.class_priors,
            "total_tokens": self.total_tokens,
            "smoothing_k": self.smoothing_k,
            "entries": [[list(g), self.entries[g]] for g in sorted(self.entries)],
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> PmiDictionary:
        payload = json.loads(text)
        return cls(
            entries={tuple(g): scores for g, scores in payload["entries"]},
            class_priors=payload["class_priors"],
            total_tokens=payload["total_tokens"],
            smoothing_k=payload["smoothing_k"],
            classes=tuple(payload["classes"]),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> PmiDictionary:
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def corpus_documents(corpus: Corpus) -> list[tuple[list[str], str]]:
    """Labelled comments as (token surfaces, class) pairs."""
    docs = []
    for thread in corpus.threads:
        for c in thread.comments:
            if c.label is not None:
                docs.append((surfaces(words(tokenize(c.body, substitute_specials=True))), c.label.value))
    return docs


def build_pmi_dictionary(
    corpus: Corpus | Iterable[tuple[Sequence[str], str]],
    classes: Sequence[str] = DEFAULT_CLASSES,
    smoothing_k: float = 0.5,
    min_count: int = 2,
) -> PmiDictionary:
    """Score every n-gram seen at least ``min_count`` times against each class.

    ``corpus`` is either a labelled :class:`Corpus` or an iterable of
    (tokens, class) documents. Bigrams never cross document boundaries.
    """
    if smoothing_k <= 0:
        raise ValueError("smoothing_k must be positive")
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    docs = corpus_documents(corpus) if isinstance(corpus, Corpus) else list(corpus)
    classes = tuple(classes)
    if not docs:
        raise ValueError("cannot build a PMI dictionary from an empty corpus")

    joint = {1: Counter(), 2: Counter()}
    per_class = {1: Counter(), 2: Counter()}
    for tokens, cls in docs:
        if cls not in classes:
            raise ValueError(f"document class {cls!r} not in {classes}")
        for n in (1, 2):
            grams = ngrams(list(tokens), n)
            joint[n].update((g, cls) for g in grams)
            per_class[n][cls] += len(grams)

    unigram_total = sum(per_class[1].values())
    if unigram_total == 0:
        raise ValueError("cannot build a PMI dictionary from an empty corpus")
    if sum(1 for c in classes if per_class[1][c] > 0) < 2:
        raise ValueError("PMI needs tokens from at least two classes")

    k = smoothing_k
    n_classes = len(classes)
    entries: dict[tuple[str, ...], dict[str, float]] = {}
    for n in (1, 2):
        gram_totals = Counter()
        for (g, _), count in joint[n].items():
            gram_totals[g] += count
        n_total = sum(gram_totals.values())
        n_grams = len(gram_totals)
        smoothed_total = n_total + k * n_grams * n_classes
        for g, total in gram_totals.items():
            if total < min_count:
                continue
            entries[g] = {
                c: math.log(
                    (joint[n][g, c] + k) * smoothed_total
                    / ((total + k * n_classes) * (per_class[n][c] + k * n_grams))
                )
                for c in classes
            }

    return PmiDictionary(
        entries=entries,
        class_priors={c: per_class[1][c] / unigram_total for c in classes},
        total_tokens=unigram_total,
        smoothing_k=k,
        classes=classes,
    )


def pmi_features(tokens: Sequence[str], dictionary: PmiDictionary) -> dict[str, float]:
    """Per-class sum of PMI over every unigram and bigram occurrence."""
    tokens = [t.surface if hasattr(t, "surface") else t for t in tokens]
    sums = {c: 0.0 for c in dictionary.classes}
    for n in (1, 2):
        for g in ngrams(tokens, n):
            scores = dictionary.entries.get(g)
            if scores is not None:
                for c in sums:
                    sums[c] += scores[c]
    return sums
