import random
import string

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqarank.similarity import SIMHASH_SEED, cosine, hamming_distance, hamming_similarity, hash64, simhash
from oracles import reference_hash64, reference_simhash

@pytest.mark.parametrize("token", ["doha", "", "qatar", "visa", "ü"])
def test_hash_matches_reference(token):
    assert hash64(token) == reference_hash64(token, SIMHASH_SEED)


def test_hash_is_frozen():
    # frozen once from the reference implementation
    assert hash64("doha") == 0xD9CE726A0880C26B
    assert hash64("") == 0x386D4A1D724706C8


@given(st.lists(st.text("abcdef", min_size=1, max_size=4), max_size=20))
def test_simhash_matches_reference(tokens):
    assert simhash(tokens) == reference_simhash(tokens, SIMHASH_SEED)


def test_empty_is_zero():
    assert simhash([]) == 0


@given(st.lists(st.text(max_size=5), max_size=20), st.randoms())
def test_permutation_invariant(tokens, rnd):
    shuffled = list(tokens)
    rnd.shuffle(shuffled)
    assert simhash(shuffled) == simhash(tokens)
    assert hamming_distance(simhash(tokens), simhash(list(tokens))) == 0


def test_disjoint_vocabularies_are_half_apart():
    distances = []
    for seed in range(1000):
        rng = random.Random(seed)
        words = set()
        while len(words) < 100:
            words.add("".join(rng.choices(string.ascii_lowercase, k=rng.randint(3, 9))))
        words = sorted(words)
        rng.shuffle(words)
        distances.append(hamming_distance(simhash(words[:50]), simhash(words[50:])))
    assert 29 <= np.mean(distances) <= 35


def test_hamming_examples():
    a = 0x0123456789ABCDEF
    assert hamming_similarity(a, a) == 1.0
    assert hamming_similarity(a, ~a & ((1 << 64) - 1)) == 0.0
    b = a ^ sum(1 << i for i in range(0, 64, 4))
    assert bin(a ^ b).count("1") == 16
    assert hamming_similarity(a, b) == 0.75


@given(st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1))
def test_hamming_symmetric(a, b):
    assert hamming_similarity(a, b) == hamming_similarity(b, a)
    assert 0.0 <= hamming_similarity(a, b) <= 1.0


def test_cosine_examples():
    assert cosine([1, 2, 2], [2, 1, 2]) == pytest.approx(8 / 9, abs=1e-12)
    assert cosine([3, 4], [3, 4]) == pytest.approx(1.0)
    assert cosine([1, 0], [0, 1]) == 0.0
    assert cosine([0, 0], [1, 2]) == 0.0


def test_cosine_dimension_mismatch():
    with pytest.raises(ValueError):
        cosine([1, 2], [1, 2, 3])


vec = st.lists(st.floats(-100, 100, allow_nan=False), min_size=3, max_size=3)


@given(vec, vec, st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_cosine_scale_invariant(u, v, a, b):
    u, v = np.array(u), np.array(v)
    if np.linalg.norm(u) < 1e-6 or np.linalg.norm(v) < 1e-6:
        return
    assert cosine(a * u, b * v) == pytest.approx(cosine(u, v), abs=1e-9)
    assert -1.0 <= cosine(u, v) <= 1.0
