import random
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqarank.topics import TopicModel, infer_topics, topic_distance, train_lda


def separated_corpus(seed, n=50, length=10):
    rng = random.Random(seed)
    return [rng.choices("abc", k=length) for _ in range(n)] + [rng.choices("xyz", k=length) for _ in range(n)]


def purity(dominant, groups):
    return sum(np.bincount(groups[dominant == k]).max() for k in set(dominant.tolist())) / len(groups)


def test_separates_disjoint_vocabularies():
    groups = np.repeat([0, 1], 50)
    passed = 0
    for seed in range(5):
        model = train_lda(separated_corpus(seed), K=2, iterations=200, seed=seed)
        passed += purity(model.doc_topic_counts.argmax(axis=1), groups) >= 0.9
    assert passed >= 4


def test_counts_consistent_after_every_sweep():
    checked = []

    def check(it, model):
        assert np.array_equal(model.word_topic_counts.sum(axis=0), model.topic_counts)
        assert np.array_equal(model.doc_topic_counts.sum(axis=0), model.topic_counts)
        assert (model.word_topic_counts >= 0).all() and (model.doc_topic_counts >= 0).all()
        checked.append(it)

    docs = separated_corpus(0)
    train_lda(docs, K=3, iterations=50, seed=1, on_sweep=check)
    assert checked == list(range(50))


def test_deterministic():
    a = train_lda(separated_corpus(1), K=2, iterations=30, seed=9)
    b = train_lda(separated_corpus(1), K=2, iterations=30, seed=9)
    assert np.array_equal(a.word_topic_counts, b.word_topic_counts)
    assert np.array_equal(a.doc_topic_counts, b.doc_topic_counts)


def test_default_alpha():
    assert train_lda(separated_corpus(0), K=4, iterations=1).alpha == pytest.approx(12.5)


def test_single_word_vocabulary_normalized():
    model = train_lda([["w"] * 5, ["w"] * 3], K=3, iterations=20)
    for theta in model.training_thetas():
        assert theta.sum() == pytest.approx(1.0, abs=1e-9)
    assert infer_topics(["w", "w"], model).sum() == pytest.approx(1.0, abs=1e-9)


def test_errors():
    with pytest.raises(ValueError):
        train_lda(separated_corpus(0), K=1)
    with pytest.raises(ValueError):
        train_lda([["a"]], K=2)
    with pytest.raises(ValueError):
        train_lda([[], []], K=2)


@pytest.fixture(scope="module")
def separated_model():
    return train_lda(separated_corpus(0), K=2, iterations=200, seed=0)


def test_inference_empty_or_oov_is_uniform(separated_model):
    assert np.array_equal(infer_topics([], separated_model), [0.5, 0.5])
    assert np.array_equal(infer_topics(["unknown"], separated_model), [0.5, 0.5])


def test_inference_recovers_training_topic(separated_model):
    docs = separated_corpus(0)
    for i in (0, 7, 60, 99):
        want = separated_model.doc_topic_counts[i].argmax()
        assert infer_topics(docs[i], separated_model, seed=i).argmax() == want


@lru_cache(maxsize=None)
def _shared_model():
    return train_lda(separated_corpus(0), K=3, iterations=50, seed=0)


@given(st.lists(st.sampled_from(list("abcxyzq")), max_size=30), st.integers(0, 100))
def test_inferred_theta_is_distribution(tokens, seed):
    model = _shared_model()
    theta = infer_topics(tokens, model, iterations=10, seed=seed)
    assert (theta >= 0).all() and theta.sum() == pytest.approx(1.0, abs=1e-9)


def test_inference_leaves_model_untouched(separated_model):
    before = separated_model.word_topic_counts.copy()
    infer_topics(["a", "x", "b"], separated_model)
    assert np.array_equal(before, separated_model.word_topic_counts)


def test_topic_distance_examples():
    assert topic_distance([0.3, 0.7], [0.3, 0.7]) == pytest.approx(0.0, abs=1e-12)
    assert topic_distance([1, 0], [0, 1]) == 1.0
    assert topic_distance([0.5, 0.5], [1, 0]) == pytest.approx(1 - 0.5 / np.sqrt(0.5), abs=1e-12)
    with pytest.raises(ValueError):
        topic_distance([1, 0], [1, 0, 0])


simplex = st.lists(st.floats(0.01, 1), min_size=3, max_size=3).map(lambda v: np.array(v) / sum(v))


@given(simplex, simplex, st.floats(0.1, 10))
def test_topic_distance_symmetric_and_zero_iff_parallel(p, q, scale):
    assert topic_distance(p, q) == pytest.approx(topic_distance(q, p), abs=1e-12)
    assert 0.0 <= topic_distance(p, q) <= 2.0
    assert topic_distance(p, scale * p) == pytest.approx(0.0, abs=1e-12)
    if np.abs(p - q).max() > 1e-3:
        assert topic_distance(p, q) > 0


def test_save_load(tmp_path, separated_model):
    separated_model.save(tmp_path / "t.npz")
    back = TopicModel.load(tmp_path / "t.npz")
    assert back.vocab == separated_model.vocab
    assert np.array_equal(back.word_topic_counts, separated_model.word_topic_counts)
    assert back.top_words(2) == separated_model.top_words(2)
