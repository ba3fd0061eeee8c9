"""LDA topic model trained by collapsed Gibbs sampling."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._jit import jit
from .similarity import cosine

FORMAT_VERSION = 1


@dataclass
class TopicModel:
    K: int
    alpha: float
    beta: float
    word_topic_counts: np.ndarray  # |V| x K
    topic_counts: np.ndarray  # K
    vocab: dict[str, int]
    seed: int
    doc_topic_counts: np.ndarray | None = None  # training documents only

    @property
    def words(self) -> list[str]:
        return sorted(self.vocab, key=self.vocab.__getitem__)

    def theta(self, doc_topic: np.ndarray) -> np.ndarray:
        return (doc_topic + self.alpha) / (doc_topic.sum() + self.K * self.alpha)

    def training_thetas(self) -> np.ndarray:
        ndk = self.doc_topic_counts
        return (ndk + self.alpha) / (ndk.sum(axis=1, keepdims=True) + self.K * self.alpha)

    def top_words(self, n: int = 10) -> list[list[str]]:
        words = self.words
        order = np.argsort(-self.word_topic_counts, axis=0, kind="stable")
        return [[words[i] for i in order[:n, k]] for k in range(self.K)]

    def save(self, path) -> None:
        meta = {"version": FORMAT_VERSION, "K": self.K, "alpha": self.alpha, "beta": self.beta,
                "seed": self.seed, "words": self.words}
        arrays = {"word_topic_counts": self.word_topic_counts, "topic_counts": self.topic_counts}
        if self.doc_topic_counts is not None:
            arrays["doc_topic_counts"] = self.doc_topic_counts
        with open(path, "wb") as fh:
            np.savez_compressed(fh, meta=np.array(json.dumps(meta)), **arrays)

    @classmethod
    def load(cls, path) -> TopicModel:
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            if meta["version"] != FORMAT_VERSION:
                raise ValueError(f"unsupported topic model version {meta['version']}")
            return cls(
                K=meta["K"],
                alpha=meta["alpha"],
                beta=meta["beta"],
                word_topic_counts=data["word_topic_counts"],
                topic_counts=data["topic_counts"],
                vocab={w: i for i, w in enumerate(meta["words"])},
                seed=meta["seed"],
                doc_topic_counts=data["doc_topic_counts"] if "doc_topic_counts" in data else None,
            )


@jit
def _gibbs_sweep(docs, words, z, ndk, nwk, nk, alpha, beta, vbeta, uniforms, frozen):
    K = nk.shape[0]
    cdf = np.empty(K)
    for i in range(z.shape[0]):
        d = docs[i]
        w = words[i]
        k = z[i]
        ndk[d, k] -= 1
        if not frozen:
            nwk[w, k] -= 1
            nk[k] -= 1
        total = 0.0
        for t in range(K):
            total += (ndk[d, t] + alpha) * (nwk[w, t] + beta) / (nk[t] + vbeta)
            cdf[t] = total
        u = uniforms[i] * total
        k = 0
        while k < K - 1 and cdf[k] <= u:
            k += 1
        z[i] = k
        ndk[d, k] += 1
        if not frozen:
            nwk[w, k] += 1
            nk[k] += 1


def train_lda(
    docs: Sequence[Sequence[str]],
    K: int = 100,
    alpha: float | None = None,
    beta: float = 0.01,
    iterations: int = 1000,
    seed: int = 0,
    on_sweep: Callable[[int, TopicModel], None] | None = None,
) -> TopicModel:
    """Fit LDA to tokenized documents.

    ``alpha`` defaults to 50/K. ``on_sweep`` is called after every sweep
    with the live model, whose count arrays are mutated by later sweeps.
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    if len(docs) < 2:
        raise ValueError("need at least two documents")
    alpha = 50.0 / K if alpha is None else alpha
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    vocab: dict[str, int] = {}
    for doc in docs:
        for w in doc:
            vocab.setdefault(w, len(vocab))
    if not vocab:
        raise ValueError("vocabulary is empty")

    doc_ids = np.concatenate([np.full(len(d), i, dtype=np.int64) for i, d in enumerate(docs)])
    word_ids = np.array([vocab[w] for d in docs for w in d], dtype=np.int64)
    rng = np.random.default_rng(seed)
    z = rng.integers(0, K, size=len(word_ids)).astype(np.int64)
    ndk = np.zeros((len(docs), K), dtype=np.int64)
    nwk = np.zeros((len(vocab), K), dtype=np.int64)
    np.add.at(ndk, (doc_ids, z), 1)
    np.add.at(nwk, (word_ids, z), 1)
    nk = nwk.sum(axis=0)

    model = TopicModel(K, alpha, beta, nwk, nk, vocab, seed, ndk)
    for it in range(iterations):
        _gibbs_sweep(doc_ids, word_ids, z, ndk, nwk, nk, alpha, beta, len(vocab) * beta,
                     rng.random(len(z)), False)
        if on_sweep is not None:
            on_sweep(it, model)
    return model


def infer_topics(tokens: Sequence, model: TopicModel, iterations: int = 100, seed: int = 0) -> np.ndarray:
    """Topic proportions of a new text with the trained word-topic counts held fixed.

    Out-of-vocabulary tokens are skipped; a text with no known tokens gets the
    uniform distribution.
    """
    ids = [model.vocab[w] for w in (t.surface if hasattr(t, "surface") else t for t in tokens) if w in model.vocab]
    if not ids:
        return np.full(model.K, 1.0 / model.K)
    rng = np.random.default_rng(seed)
    word_ids = np.array(ids, dtype=np.int64)
    z = rng.integers(0, model.K, size=len(word_ids)).astype(np.int64)
    ndk = np.zeros((1, model.K), dtype=np.int64)
    np.add.at(ndk, (np.zeros_like(z), z), 1)
    docs = np.zeros(len(word_ids), dtype=np.int64)
    vbeta = model.word_topic_counts.shape[0] * model.beta
    for _ in range(iterations):
        _gibbs_sweep(docs, word_ids, z, ndk, model.word_topic_counts, model.topic_counts,
                     model.alpha, model.beta, vbeta, rng.random(len(z)), True)
    return model.theta(ndk[0])


def topic_distance(q, c) -> float:
    """Cosine distance between two topic distributions, in [0, 2]."""
    q = np.asarray(q, dtype=float)
    c = np.asarray(c, dtype=float)
    if q.shape != c.shape:
        raise ValueError(f"topic count mismatch: {q.shape[0]} vs {c.shape[0]}")
    return 1.0 - cosine(q, c)
