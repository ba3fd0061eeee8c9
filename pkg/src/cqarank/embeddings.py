"""Skip-gram word vectors trained with negative sampling.

Training is single-threaded and fully determined by the seed: the initial
vectors and every negative sample come from one ``numpy`` generator, and the
update loop visits (center, context) pairs in corpus order.
"""
from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._jit import jit
from .errors import ParseError, TrainingError
from .textproc import surfaces, tokenize, words

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass(frozen=True)
class EmbeddingConfig:
    dim: int = 100
    min_count: int = 5
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    seed: int = 1
    substitute_specials: bool = True
    external: bool = False

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.min_count < 1:
            raise ValueError("min_count must be >= 1")
        for name in ("window", "negatives", "epochs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.initial_lr <= 0:
            raise ValueError("initial_lr must be positive")


@dataclass
class EmbeddingModel:
    words: list[str]
    counts: np.ndarray
    vectors: np.ndarray
    config: EmbeddingConfig
    context_vectors: np.ndarray | None = None
    epoch_losses: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ValueError("duplicate words in vocabulary")
        if self.vectors.shape[0] != len(self.words):
            raise ValueError("vector rows do not match vocabulary size")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __contains__(self, word):
        return word in self.index

    def __len__(self):
        return len(self.words)

    def __getitem__(self, word) -> np.ndarray:
        return self.vectors[self.index[word]]

    def tokens(self, text: str) -> list[str]:
        """Tokenize ``text`` the way the training corpus was tokenized."""
        return surfaces(words(tokenize(text, substitute_specials=self.config.substitute_specials)))

    def save(self, path) -> None:
        meta = {"version": FORMAT_VERSION, "config": asdict(self.config), "words": self.words,
                "epoch_losses": self.epoch_losses}
        arrays = {"vectors": self.vectors, "counts": self.counts}
        if self.context_vectors is not None:
            arrays["context_vectors"] = self.context_vectors
        with open(path, "wb") as fh:
            np.savez_compressed(fh, meta=np.array(json.dumps(meta)), **arrays)

    @classmethod
    def load(cls, path) -> EmbeddingModel:
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            if meta["version"] != FORMAT_VERSION:
                raise ValueError(f"unsupported embedding model version {meta['version']}")
            return cls(
                words=meta["words"],
                counts=data["counts"],
                vectors=data["vectors"],
                config=EmbeddingConfig(**meta["config"]),
                context_vectors=data["context_vectors"] if "context_vectors" in data else None,
                epoch_losses=meta["epoch_losses"],
            )


# -- objective -----------------------------------------------------------------


def log_sigmoid(x):
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, -np.log1p(np.exp(-np.abs(x))), x - np.log1p(np.exp(x)))


def sgns_loss(v_center, u_context, u_negatives) -> float:
    """Negative SGNS objective for one (center, context, negatives) triple."""
    pos = log_sigmoid(v_center @ u_context)
    neg = log_sigmoid(-(u_negatives @ v_center)).sum()
    return float(-(pos + neg))


def sgns_gradients(v_center, u_context, u_negatives):
    """Loss and its gradients with respect to the center vector, the context
    vector and each negative context vector."""
    sig = lambda x: 1.0 / (1.0 + np.exp(-x))  # noqa: E731
    s_pos = sig(v_center @ u_context)
    s_neg = sig(u_negatives @ v_center)
    grad_v = -(1.0 - s_pos) * u_context + s_neg @ u_negatives
    grad_u = -(1.0 - s_pos) * v_center
    grad_neg = s_neg[:, None] * v_center[None, :]
    return sgns_loss(v_center, u_context, u_negatives), grad_v, grad_u, grad_neg


@jit
def _log_sigmoid(x):
    if x >= 0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


@jit
def _sgd_pairs(W, Wc, centers, contexts, negatives, lrs):
    """In-place SGD over pairs; returns the summed pre-update loss."""
    dim = W.shape[1]
    grad = np.empty(dim)
    total = 0.0
    for p in range(centers.shape[0]):
        w = centers[p]
        lr = lrs[p]
        for d in range(dim):
            grad[d] = 0.0
        for k in range(negatives.shape[1] + 1):
            if k == 0:
                c = contexts[p]
                label = 1.0
            else:
                c = negatives[p, k - 1]
                label = 0.0
            s = 0.0
            for d in range(dim):
                s += W[w, d] * Wc[c, d]
            if label == 1.0:
                total -= _log_sigmoid(s)
            else:
                total -= _log_sigmoid(-s)
            g = label - 1.0 / (1.0 + math.exp(-s))
            for d in range(dim):
                grad[d] += g * Wc[c, d]
                Wc[c, d] += lr * g * W[w, d]
        for d in range(dim):
            W[w, d] += lr * grad[d]
    return total


# -- sampling ------------------------------------------------------------------


class NegativeSampler:
    """Draws word indices with probability proportional to count ** 0.75."""

    def __init__(self, counts, power: float = 0.75):
        weights = np.asarray(counts, dtype=float) ** power
        self.probabilities = weights / weights.sum()
        self._cumulative = np.cumsum(weights)

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        u = rng.random(size) * self._cumulative[-1]
        idx = np.searchsorted(self._cumulative, u, side="right")
        return np.minimum(idx, len(self._cumulative) - 1).astype(np.int64)


def build_vocabulary(sentences: Sequence[Sequence[str]], min_count: int) -> tuple[list[str], np.ndarray]:
    freq = Counter(w for s in sentences for w in s)
    kept = sorted((w for w, n in freq.items() if n >= min_count), key=lambda w: (-freq[w], w))
    return kept, np.array([freq[w] for w in kept], dtype=np.int64)


def skipgram_pairs(sentences: Sequence[np.ndarray], window: int) -> tuple[np.ndarray, np.ndarray]:
    """All (center, context) index pairs within ``window`` positions, ordered
    by center position then context position."""
    if not sentences:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    flat = np.concatenate(sentences)
    sent_id = np.repeat(np.arange(len(sentences)), [len(s) for s in sentences])
    pos = np.arange(len(flat))
    c_pos, x_pos = [], []
    for off in range(1, window + 1):
        same = sent_id[:-off] == sent_id[off:] if off < len(flat) else np.zeros(0, bool)
        left = pos[:-off][same]
        right = pos[off:][same]
        c_pos += [left, right]
        x_pos += [right, left]
    c_pos = np.concatenate(c_pos)
    x_pos = np.concatenate(x_pos)
    order = np.lexsort((x_pos, c_pos))
    return flat[c_pos[order]], flat[x_pos[order]]


def _as_token_lists(lines: Iterable, substitute_specials: bool) -> list[list[str]]:
    out = []
    for line in lines:
        if isinstance(line, str):
            out.append(surfaces(words(tokenize(line, substitute_specials=substitute_specials))))
        else:
            out.append([t.surface if hasattr(t, "surface") else t for t in line])
    return out


def train_sgns(lines: Iterable, config: EmbeddingConfig = EmbeddingConfig(), chunk_size: int = 65536) -> EmbeddingModel:
    """Train skip-gram negative-sampling vectors.

    ``lines`` are raw texts (tokenized here) or pre-tokenized lists.
    """
    sentences = _as_token_lists(lines, config.substitute_specials)
    vocab, counts = build_vocabulary(sentences, config.min_count)
    if not vocab:
        raise TrainingError("vocabulary is empty after min_count pruning")
    index = {w: i for i, w in enumerate(vocab)}
    encoded = [np.array([index[w] for w in s if w in index], dtype=np.int64) for s in sentences]
    encoded = [s for s in encoded if len(s) > 1]
    centers, contexts = skipgram_pairs(encoded, config.window)

    rng = np.random.default_rng(config.seed)
    W = (rng.random((len(vocab), config.dim)) - 0.5) / config.dim
    Wc = np.zeros((len(vocab), config.dim))
    sampler = NegativeSampler(counts)

    n_pairs = len(centers)
    total = max(1, n_pairs * config.epochs)
    losses = []
    done = 0
    for epoch in range(config.epochs):
        epoch_loss = 0.0
        for start in range(0, n_pairs, chunk_size):
            stop = min(start + chunk_size, n_pairs)
            negs = sampler.draw(rng, (stop - start, config.negatives))
            progress = (done + np.arange(stop - start)) / total
            lrs = config.initial_lr * np.maximum(1e-4, 1.0 - progress)
            epoch_loss += _sgd_pairs(W, Wc, centers[start:stop], contexts[start:stop], negs, lrs)
            done += stop - start
        losses.append(epoch_loss / max(1, n_pairs))
        logger.info("sgns epoch %d/%d: mean loss %.4f over %d pairs", epoch + 1, config.epochs, losses[-1], n_pairs)

    return EmbeddingModel(
        words=vocab, counts=counts, vectors=W, config=config, context_vectors=Wc, epoch_losses=losses
    )


def centroid(tokens: Iterable, model: EmbeddingModel) -> tuple[np.ndarray, bool]:
    """Mean vector of in-vocabulary tokens and whether every token was OOV."""
    idx = [model.index[w] for w in (t.surface if hasattr(t, "surface") else t for t in tokens) if w in model.index]
    if not idx:
        return np.zeros(model.dim), True
    return model.vectors[idx].mean(axis=0), False


# -- word2vec text format --------------------------------------------------------


def save_text_vectors(model: EmbeddingModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(model.words)} {model.dim}\n")
        for word, vec in zip(model.words, model.vectors):
            fh.write(word + " " + " ".join(format(float(x), ".9g") for x in vec) + "\n")


def load_text_vectors(path) -> EmbeddingModel:
    """Read vectors in word2vec text format (``|V| dim`` header line)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ParseError("header must be '<vocab size> <dim>'", 1)
        try:
            n_words, dim = int(header[0]), int(header[1])
        except ValueError:
            raise ParseError("header must contain two integers", 1) from None
        if dim < 2:
            raise ParseError(f"vector dimension must be >= 2, got {dim}", 1)
        vocab, rows, seen = [], [], set()
        for lineno, line in enumerate(fh, 2):
            parts = line.rstrip("\n").rstrip(" ").split(" ")
            if not parts or parts == [""]:
                continue
            word, values = parts[0], parts[1:]
            if len(values) != dim:
                raise ParseError(f"expected {dim} values for {word!r}, got {len(values)}", lineno)
            if word in seen:
                raise ParseError(f"duplicate word {word!r}", lineno)
            try:
                rows.append([float(v) for v in values])
            except ValueError:
                raise ParseError(f"non-numeric component for {word!r}", lineno) from None
            seen.add(word)
            vocab.append(word)
    if len(vocab) != n_words:
        logger.warning("header announces %d words, file has %d", n_words, len(vocab))
    vectors = np.array(rows, dtype=float).reshape(len(vocab), dim)
    return EmbeddingModel(
        words=vocab,
        counts=np.zeros(len(vocab), dtype=np.int64),
        vectors=vectors,
        config=EmbeddingConfig(dim=dim, min_count=1, external=True),
    )
