import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqarank.embeddings import (
    EmbeddingConfig,
    EmbeddingModel,
    NegativeSampler,
    _sgd_pairs,
    centroid,
    load_text_vectors,
    save_text_vectors,
    sgns_gradients,
    sgns_loss,
    skipgram_pairs,
    train_sgns,
)
from cqarank.errors import ParseError, TrainingError
from cqarank.similarity import cosine


def finite_difference(f, x, h=1e-6):
    grad = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        grad.flat[i] = (f(x + e) - f(x - e)) / (2 * h)
    return grad


def relative_error(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_gradient_check(seed):
    rng = np.random.default_rng(seed)
    v, u, negs = rng.normal(size=8), rng.normal(size=8), rng.normal(size=(5, 8))
    _, gv, gu, gn = sgns_gradients(v, u, negs)
    assert relative_error(gv, finite_difference(lambda x: sgns_loss(x, u, negs), v)) < 1e-4
    assert relative_error(gu, finite_difference(lambda x: sgns_loss(v, x, negs), u)) < 1e-4
    assert relative_error(gn, finite_difference(lambda x: sgns_loss(v, u, x), negs)) < 1e-4


def test_kernel_step_matches_numpy_gradient():
    rng = np.random.default_rng(3)
    W, Wc = rng.normal(size=(6, 4)), rng.normal(size=(6, 4))
    center, context, negs, lr = 0, 1, np.array([2, 3, 4]), 0.05
    _, gv, gu, gn = sgns_gradients(W[center], Wc[context], Wc[negs])
    want_w, want_c = W.copy(), Wc.copy()
    want_w[center] -= lr * gv
    want_c[context] -= lr * gu
    want_c[negs] -= lr * gn
    loss = _sgd_pairs(W, Wc, np.array([center]), np.array([context]), negs[None, :], np.array([lr]))
    assert loss == pytest.approx(sgns_loss(want_w[center] + lr * gv, want_c[context] + lr * gu,
                                           want_c[negs] + lr * gn))
    np.testing.assert_allclose(W, want_w, atol=1e-12)
    np.testing.assert_allclose(Wc, want_c, atol=1e-12)


def test_negative_sampling_distribution():
    counts = np.array([50, 30, 20, 10, 8, 5, 3, 2, 1, 1])
    sampler = NegativeSampler(counts)
    draws = sampler.draw(np.random.default_rng(0), 1_000_000)
    freq = np.bincount(draws, minlength=10) / draws.size
    expected = counts ** 0.75 / (counts ** 0.75).sum()
    assert np.max(np.abs(freq - expected)) < 0.01


def test_skipgram_pairs_stay_within_sentences():
    centers, contexts = skipgram_pairs([np.array([0, 1, 2]), np.array([3, 4])], window=1)
    pairs = set(zip(centers.tolist(), contexts.tolist()))
    assert pairs == {(0, 1), (1, 0), (1, 2), (2, 1), (3, 4), (4, 3)}


def toy_corpus(seed):
    """{a,b} always share a sentence, as do {x,y}, each with their own filler words."""
    rng = random.Random(seed)
    out = []
    for i in range(200):
        sent = ["a", "b"] + rng.choices("pqrs", k=3) if i % 2 == 0 else ["x", "y"] + rng.choices("tuvw", k=3)
        rng.shuffle(sent)
        out.append(sent)
    return out


def test_co_occurring_words_end_up_closer():
    wins = 0
    for seed in range(5):
        m = train_sgns(toy_corpus(seed), EmbeddingConfig(dim=10, min_count=1, epochs=10, seed=seed))
        wins += cosine(m["a"], m["b"]) > cosine(m["a"], m["x"])
    assert wins >= 4


@pytest.mark.parametrize("seed", range(3))
def test_loss_non_increasing_with_one_epoch_tolerance(seed):
    losses = train_sgns(toy_corpus(seed), EmbeddingConfig(min_count=1, seed=seed)).epoch_losses
    increases = sum(b > a for a, b in zip(losses, losses[1:]))
    assert increases <= 1
    assert losses[-1] < losses[0]


def test_deterministic():
    cfg = EmbeddingConfig(dim=8, min_count=1, seed=11)
    a, b = train_sgns(toy_corpus(0), cfg), train_sgns(toy_corpus(0), cfg)
    assert a.words == b.words
    assert np.array_equal(a.vectors, b.vectors)


def test_vocabulary_respects_min_count():
    m = train_sgns(toy_corpus(0), EmbeddingConfig(dim=4, min_count=100, epochs=1))
    assert set(m.words) == {"a", "b", "x", "y"}
    assert all(c >= 100 for c in m.counts)
    assert m.vectors.shape == (4, 4)


def test_empty_vocabulary_is_error():
    with pytest.raises(TrainingError):
        train_sgns(toy_corpus(0), EmbeddingConfig(dim=4, min_count=10_000))


def test_raw_text_is_tokenized_with_specials():
    m = train_sgns(["I paid 50 QAR", "I paid 70 QAR"], EmbeddingConfig(dim=4, min_count=2, epochs=1))
    assert "__num__" in m and "qar" in m
    plain = train_sgns(["I paid 50 QAR", "I paid 70 QAR"],
                       EmbeddingConfig(dim=4, min_count=1, epochs=1, substitute_specials=False))
    assert "50" in plain and "__num__" not in plain


def hand_model():
    return EmbeddingModel(words=["u", "v"], counts=np.array([1, 1]),
                          vectors=np.array([[1.0, 2.0, 3.0], [3.0, 0.0, -1.0]]),
                          config=EmbeddingConfig(dim=3, min_count=1))


def test_centroid_examples():
    m = hand_model()
    assert np.array_equal(centroid(["u"], m)[0], [1.0, 2.0, 3.0])
    assert np.array_equal(centroid(["u", "u"], m)[0], centroid(["u"], m)[0])
    vec, oov = centroid(["u", "v", "zzz"], m)
    assert np.array_equal(vec, [2.0, 1.0, 1.0]) and not oov
    vec, oov = centroid(["zzz"], m)
    assert oov and not vec.any()
    assert centroid([], m)[1]


@given(st.lists(st.sampled_from(["u", "v", "w"]), max_size=10))
def test_centroid_norm_bounded(tokens):
    m = hand_model()
    vec, _ = centroid(tokens, m)
    assert np.linalg.norm(vec) <= np.linalg.norm(m.vectors, axis=1).max() + 1e-12


def test_text_vectors_round_trip(tmp_path):
    m = train_sgns(toy_corpus(0), EmbeddingConfig(dim=5, min_count=1, epochs=1))
    path = tmp_path / "vec.txt"
    save_text_vectors(m, path)
    back = load_text_vectors(path)
    assert back.words == m.words and back.config.external
    np.testing.assert_allclose(back.vectors, m.vectors, rtol=1e-6)


def test_binary_round_trip(tmp_path):
    m = train_sgns(toy_corpus(0), EmbeddingConfig(dim=5, min_count=1, epochs=1))
    m.save(tmp_path / "m.npz")
    back = EmbeddingModel.load(tmp_path / "m.npz")
    assert back.words == m.words and np.array_equal(back.vectors, m.vectors)
    assert back.config == m.config


def test_load_small_file(tmp_path):
    path = tmp_path / "v.txt"
    path.write_text("2 3\nfoo 1 2 3\nbar 4 5 6\n")
    m = load_text_vectors(path)
    assert len(m) == 2 and m.dim == 3 and list(m["bar"]) == [4.0, 5.0, 6.0]


@pytest.mark.parametrize("body,line", [
    ("2 3\nfoo 1 2 3\nbar 4 5\n", 3),
    ("2 3\nfoo 1 2 x\n", 2),
    ("2 3\nfoo 1 2 3\nfoo 1 2 3\n", 3),
    ("nonsense\n", 1),
])
def test_load_errors_carry_line_numbers(tmp_path, body, line):
    path = tmp_path / "v.txt"
    path.write_text(body)
    with pytest.raises(ParseError) as err:
        load_text_vectors(path)
    assert err.value.line == line
