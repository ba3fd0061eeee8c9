"""Standard readability indices over forum text."""
from __future__ import annotations

import math
import re
from dataclasses import astuple, dataclass, fields

from .textproc import TokenKind, split_sentences, tokenize

_VOWEL_RUN = re.compile(r"[aeiouy]+")
_VOWELS = set("aeiouy")


@dataclass(frozen=True)
class ReadabilityScores:
    ari: float = 0.0
    coleman_liau: float = 0.0
    flesch_reading_ease: float = 0.0
    gunning_fog: float = 0.0
    flesch_kincaid_grade: float = 0.0
    lix: float = 0.0
    smog: float = 0.0
    avg_words_per_sentence: float = 0.0
    type_token_ratio: float = 0.0

    @classmethod
    def names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def values(self) -> tuple[float, ...]:
        return astuple(self)


def count_syllables(word: str) -> int:
    """Vowel-group estimate of the syllable count, at least 1.

    A final lone ``e`` is silent unless the word ends in consonant + ``le``.
    """
    w = "".join(ch for ch in word.lower() if ch.isalpha())
    n = len(_VOWEL_RUN.findall(w))
    if w.endswith("e") and (len(w) < 2 or w[-2] not in _VOWELS):
        consonant_le = len(w) >= 3 and w.endswith("le") and w[-3] not in _VOWELS
        if not consonant_le:
            n -= 1
    return max(n, 1)


@dataclass(frozen=True)
class TextCounts:
    words: int
    sentences: int
    syllables: int
    characters: int  # alphanumeric only
    letters: int
    complex_words: int  # three or more syllables
    long_words: int  # more than six letters
    types: int


def text_counts(text: str) -> TextCounts:
    word_list = [t.surface for t in tokenize(text) if t.kind is TokenKind.WORD]
    sentences = sum(
        1 for s in split_sentences(text) if any(t.kind is TokenKind.WORD for t in tokenize(s))
    )
    if word_list and not sentences:
        sentences = 1
    syllables = [count_syllables(w) for w in word_list]
    return TextCounts(
        words=len(word_list),
        sentences=sentences,
        syllables=sum(syllables),
        characters=sum(ch.isalnum() for w in word_list for ch in w),
        letters=sum(ch.isalpha() for w in word_list for ch in w),
        complex_words=sum(s >= 3 for s in syllables),
        long_words=sum(sum(ch.isalpha() for ch in w) > 6 for w in word_list),
        types=len(set(word_list)),
    )


def scores_from_counts(c: TextCounts) -> ReadabilityScores:
    if c.words == 0:
        return ReadabilityScores()
    wps = c.words / c.sentences
    spw = c.syllables / c.words
    return ReadabilityScores(
        ari=4.71 * (c.characters / c.words) + 0.5 * wps - 21.43,
        coleman_liau=0.0588 * (100.0 * c.letters / c.words) - 0.296 * (100.0 * c.sentences / c.words) - 15.8,
        flesch_reading_ease=206.835 - 1.015 * wps - 84.6 * spw,
        gunning_fog=0.4 * (wps + 100.0 * c.complex_words / c.words),
        flesch_kincaid_grade=0.39 * wps + 11.8 * spw - 15.59,
        lix=wps + 100.0 * c.long_words / c.words,
        smog=1.0430 * math.sqrt(c.complex_words * 30.0 / c.sentences) + 3.1291,
        avg_words_per_sentence=wps,
        type_token_ratio=c.types / c.words,
    )


def compute_readability(text: str) -> ReadabilityScores:
    """All readability indices for ``text``; empty text scores all zeros."""
    return scores_from_counts(text_counts(text))
