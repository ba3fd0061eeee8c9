"""Tokenization and surface-level text analysis for forum posts.

The tokenizer is a single alternation of regular expressions tried left to
right at every position. The exact patterns are module constants so they can
be quoted in documentation and reused by other modules.
"""
from __future__ import annotations

import enum
import functools
import re
from collections import Counter
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence
from urllib.parse import urlsplit

from .errors import ConfigurationError

# A trailing character may not be sentence punctuation, so "site.com." keeps
# its final period outside the link.
_URL_TAIL = r"[^\s<>\"'.,;:!?)\]}]"
URL_PATTERN = (
    r"(?:https?://|www\.)[^\s<>\"']*" + _URL_TAIL
    + r"|(?<![@\w.])(?:[a-z0-9](?:[a-z0-9-]*[a-z0-9])?\.)+"
    r"(?:com|org|net|edu|gov|info|biz|qa|uk|in|io|co|me|tv|ly)"
    r"(?:/(?:[^\s<>\"']*" + _URL_TAIL + r")?)?(?![\w@])"
)
IMAGE_TAG_PATTERN = r"\[img\][^\[]*\[/img\]|<img\b[^>]*>"
IMAGE_EXTENSIONS = (".jpg", ".jpeg", ".png", ".gif", ".bmp", ".webp")
EMAIL_PATTERN = r"[\w.+-]+@[\w-]+(?:\.[\w-]+)+"
PHONE_PATTERN = (
    r"(?<![\w+])(?:(?:\+|00)\d{1,3}[\s-]?)?(?:\(\d{2,4}\)[\s-]?)?"
    r"\d{3,4}[\s-]?\d{4}(?:[\s-]?\d{3,4})?(?![\w])"
)
SMILEY_PATTERN = (
    r"[<>]?[:;=][\-o*']?(?:[)\](\[/\\|}{@3*]|[dDpPoO](?!\w))"
    r"|[(\[]-?[:;=](?!\w)"
    r"|<3|\^_*\^|-_-|o_o|O_O"
    r"|[\U0001F300-\U0001FAFF☀-➿]"
)
MENTION_PATTERN = r"@\w+"
CURRENCY_PATTERN = r"[$€£¥₹]"
NUMBER_PATTERN = r"\d+(?:[.,:]\d+)*"
PLACEHOLDER_PATTERN = r"__(?:num|url|img|smiley)__"
WORD_PATTERN = r"\w+(?:['’-]\w+)*"
PUNCT_PATTERN = r"[^\w\s]"


class TokenKind(enum.Enum):
    WORD = "Word"
    NUMBER = "Number"
    URL = "Url"
    IMAGE = "Image"
    SMILEY = "Smiley"
    EMAIL = "Email"
    PHONE = "Phone"
    CURRENCY = "Currency"
    MENTION = "Mention"
    PUNCT = "Punct"


_PLACEHOLDERS = {
    TokenKind.NUMBER: "__num__",
    TokenKind.URL: "__url__",
    TokenKind.IMAGE: "__img__",
    TokenKind.SMILEY: "__smiley__",
}
_PLACEHOLDER_KIND = {v: k for k, v in _PLACEHOLDERS.items()}

_TOKEN_RE = re.compile(
    "|".join(
        f"(?P<{name}>{pattern})"
        for name, pattern in (
            ("placeholder", PLACEHOLDER_PATTERN),
            ("imgtag", IMAGE_TAG_PATTERN),
            ("url", URL_PATTERN),
            ("email", EMAIL_PATTERN),
            ("phone", PHONE_PATTERN),
            ("smiley", SMILEY_PATTERN),
            ("mention", MENTION_PATTERN),
            ("currency", CURRENCY_PATTERN),
            ("number", NUMBER_PATTERN),
            ("word", WORD_PATTERN),
            ("punct", PUNCT_PATTERN),
        )
    ),
    re.IGNORECASE,
)
_URL_RE = re.compile(URL_PATTERN, re.IGNORECASE)
_LAUGHTER_RE = re.compile(r"^(?:(?:h[aeio]){2,}h?|a?(?:ha){2,}h?|l+o+l+[ol]*|lm+f*a+o+|ro+fl+|x+d+)$")


@dataclass(frozen=True)
class Token:
    surface: str
    kind: TokenKind

    def __str__(self):
        return self.surface


def _url_kind(surface: str) -> TokenKind:
    path = surface.lower().split("?", 1)[0]
    return TokenKind.IMAGE if path.endswith(IMAGE_EXTENSIONS) else TokenKind.URL


def tokenize(text: str, substitute_specials: bool = False) -> list[Token]:
    """Split ``text`` into lowercased tokens.

    With ``substitute_specials`` the surfaces of numbers, links, images and
    smileys become ``__num__``, ``__url__``, ``__img__`` and ``__smiley__``.
    """
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        group = m.lastgroup
        surface = m.group().lower()
        if group == "placeholder":
            kind = _PLACEHOLDER_KIND[surface]
        elif group == "imgtag":
            kind = TokenKind.IMAGE
        elif group == "url":
            kind = _url_kind(surface)
        else:
            kind = TokenKind[group.upper()]
        if substitute_specials and kind in _PLACEHOLDERS:
            surface = _PLACEHOLDERS[kind]
        tokens.append(Token(surface, kind))
    return tokens


def words(tokens: Iterable[Token]) -> list[Token]:
    """Tokens that count toward text length: everything except punctuation."""
    return [t for t in tokens if t.kind is not TokenKind.PUNCT]


def surfaces(tokens: Iterable[Token]) -> list[str]:
    return [t.surface for t in tokens]


_TERMINATOR_RE = re.compile(r"[.!?]+")


def split_sentences(text: str) -> list[str]:
    """Split on runs of ``.``/``!``/``?`` followed by whitespace and a capital
    letter, or by the end of the text. Terminators inside links never split."""
    protected = [m.span() for m in _URL_RE.finditer(text)]

    def in_link(pos):
        return any(start <= pos < end for start, end in protected)

    spans = []
    start = 0
    for m in _TERMINATOR_RE.finditer(text):
        if in_link(m.start()):
            continue
        rest = text[m.end():]
        stripped = rest.lstrip()
        if stripped and not (len(stripped) < len(rest) and stripped[0].isupper()):
            continue
        spans.append(text[start:m.end()].strip())
        start = m.end()
    spans.append(text[start:].strip())
    return [s for s in spans if s]


# -- lexicons ------------------------------------------------------------------

LEXICON_NAMES = (
    "thanks",
    "laughter",
    "opinion",
    "disagreement",
    "wh_words",
    "currency",
    "pronouns",
    "verbs",
    "adjectives",
    "function_words",
    "first_person",
    "third_person",
)
GAZETTEER_CATEGORIES = ("location", "organisation", "person", "address", "offensive")


def read_phrase_file(path) -> list[tuple[str, ...]]:
    """Read a UTF-8 phrase list: one phrase per line, ``#`` starts a comment."""
    phrases = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                phrase = tuple(surfaces(words(tokenize(line))))
                if phrase:
                    phrases.append(phrase)
    return phrases


def _data_dir(name: str) -> Path:
    return Path(str(resources.files("cqarank") / "data" / name))


@dataclass(frozen=True)
class Lexicons:
    thanks: frozenset
    laughter: frozenset
    opinion: frozenset
    disagreement: frozenset
    wh_words: frozenset
    currency: frozenset
    pronouns: frozenset
    verbs: frozenset
    adjectives: frozenset
    function_words: frozenset
    first_person: frozenset
    third_person: frozenset

    @classmethod
    def load(cls, directory=None, **overrides) -> Lexicons:
        """Load every lexicon from ``directory`` (bundled defaults when None).

        ``overrides`` maps a lexicon name to an alternative file path.
        """
        directory = Path(directory) if directory is not None else _data_dir("lexicons")
        loaded = {}
        for name in LEXICON_NAMES:
            path = Path(overrides.get(name) or directory / f"{name}.txt")
            if not path.is_file():
                raise ConfigurationError(f"lexicon file not found: {path}")
            phrases = read_phrase_file(path)
            # single-word lexicons are stored as plain strings
            if all(len(p) == 1 for p in phrases):
                loaded[name] = frozenset(p[0] for p in phrases)
            else:
                loaded[name] = frozenset(phrases)
        return cls(**loaded)


@functools.lru_cache(maxsize=1)
def default_lexicons() -> Lexicons:
    return Lexicons.load()


def _phrase_set(entries) -> set[tuple[str, ...]]:
    return {e if isinstance(e, tuple) else (e,) for e in entries}


def contains_phrase(tokens: Sequence[str], phrases) -> bool:
    phrases = _phrase_set(phrases)
    lengths = {len(p) for p in phrases}
    for i in range(len(tokens)):
        for n in lengths:
            if tuple(tokens[i:i + n]) in phrases:
                return True
    return False


class Gazetteer:
    """Category-labelled phrase lists matched by longest match, left to right."""

    def __init__(self, entries: dict[str, Iterable[tuple[str, ...]]] | None = None):
        self.phrases: dict[tuple[str, ...], str] = {}
        for category, phrases in (entries or {}).items():
            for phrase in phrases:
                if not isinstance(phrase, tuple):
                    phrase = tuple(surfaces(words(tokenize(phrase))))
                self.phrases.setdefault(phrase, category)
        self.max_len = max((len(p) for p in self.phrases), default=0)

    @classmethod
    def load(cls, directory=None) -> Gazetteer:
        directory = Path(directory) if directory is not None else _data_dir("gazetteers")
        if not directory.is_dir():
            raise ConfigurationError(f"gazetteer directory not found: {directory}")
        entries = {}
        for path in sorted(directory.glob("*.txt")):
            entries[path.stem] = read_phrase_file(path)
        return cls(entries)

    def match(self, tokens: Sequence[Token | str]) -> Counter:
        words_ = [
            t.surface if isinstance(t, Token) else t
            for t in tokens
            if not (isinstance(t, Token) and t.kind is TokenKind.PUNCT)
        ]
        counts: Counter = Counter()
        i = 0
        while i < len(words_):
            for n in range(min(self.max_len, len(words_) - i), 0, -1):
                category = self.phrases.get(tuple(words_[i:i + n]))
                if category is not None:
                    counts[category] += 1
                    i += n
                    break
            else:
                i += 1
        return counts


@functools.lru_cache(maxsize=1)
def default_gazetteer() -> Gazetteer:
    return Gazetteer.load()


# -- pattern flags -------------------------------------------------------------


@dataclass(frozen=True)
class PatternFlags:
    has_smiley: bool = False
    has_currency: bool = False
    has_email: bool = False
    has_phone: bool = False
    laughter_only: bool = False
    has_thanks: bool = False
    has_opinion_marker: bool = False
    has_disagreement_marker: bool = False
    n_question_marks: int = 0
    n_wh_words: int = 0
    n_inbound_links: int = 0
    n_outbound_links: int = 0
    has_user_mention: bool = False

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def is_laughter(word: str, lexicons: Lexicons) -> bool:
    return word in lexicons.laughter or bool(_LAUGHTER_RE.match(word))


def link_host(url: str) -> str:
    if "://" not in url:
        url = "http://" + url
    return (urlsplit(url).hostname or "").lower()


def is_inbound(url: str, allowlist: Iterable[str]) -> bool:
    host = link_host(url)
    return any(host == entry or host.endswith("." + entry) for entry in allowlist)


def detect_patterns(
    text: str,
    link_host_allowlist: Iterable[str] = ("qatarliving.com",),
    lexicons: Lexicons | None = None,
) -> PatternFlags:
    lexicons = lexicons or default_lexicons()
    allowlist = tuple(h.lower() for h in link_host_allowlist)
    tokens = tokenize(text)
    kinds = Counter(t.kind for t in tokens)
    word_surfaces = [t.surface for t in tokens if t.kind is TokenKind.WORD]
    seq = [t.surface for t in tokens if t.kind is not TokenKind.PUNCT]
    links = [
        m.group()
        for t in tokens
        if t.kind in (TokenKind.URL, TokenKind.IMAGE)
        for m in [_URL_RE.search(t.surface)]
        if m is not None
    ]
    inbound = sum(is_inbound(u, allowlist) for u in links)
    return PatternFlags(
        has_smiley=kinds[TokenKind.SMILEY] > 0,
        has_currency=kinds[TokenKind.CURRENCY] > 0 or any(w in lexicons.currency for w in word_surfaces),
        has_email=kinds[TokenKind.EMAIL] > 0,
        has_phone=kinds[TokenKind.PHONE] > 0,
        laughter_only=bool(word_surfaces) and all(is_laughter(w, lexicons) for w in word_surfaces),
        has_thanks=contains_phrase(seq, lexicons.thanks),
        has_opinion_marker=contains_phrase(seq, lexicons.opinion),
        has_disagreement_marker=contains_phrase(seq, lexicons.disagreement),
        n_question_marks=text.count("?"),
        n_wh_words=sum(w in lexicons.wh_words for w in word_surfaces),
        n_inbound_links=inbound,
        n_outbound_links=len(links) - inbound,
        has_user_mention=kinds[TokenKind.MENTION] > 0,
    )


# -- part-of-speech counts -------------------------------------------------------


@dataclass(frozen=True)
class PosCounts:
    n_nouns: int = 0
    n_verbs: int = 0
    n_pronouns: int = 0
    n_adjectives: int = 0
    n_tokens: int = 0


_ADJ_SUFFIXES = ("ful", "ous", "ive", "able", "ible")


def _verb_stem_candidates(word: str):
    for suffix in ("ing", "ed"):
        if word.endswith(suffix) and len(word) > len(suffix) + 1:
            stem = word[: -len(suffix)]
            yield stem
            yield stem + "e"
            if len(stem) > 2 and stem[-1] == stem[-2]:
                yield stem[:-1]
            if suffix == "ed" and stem.endswith("i"):
                yield stem[:-1] + "y"


def pos_class(word: str, lexicons: Lexicons) -> str | None:
    """Coarse class of a lowercased word: noun, verb, pronoun, adjective, or
    None for function words and adverbs."""
    if word in lexicons.pronouns:
        return "pronoun"
    if word in lexicons.function_words:
        return None
    if word in lexicons.verbs:
        return "verb"
    if word in lexicons.adjectives:
        return "adjective"
    if word.endswith("ly") and len(word) > 4:
        return None
    if word.endswith(_ADJ_SUFFIXES) and len(word) > 5:
        return "adjective"
    if any(stem in lexicons.verbs for stem in _verb_stem_candidates(word)):
        return "verb"
    return "noun"


def count_pos(tokens: Sequence[Token], lexicons: Lexicons | None = None) -> PosCounts:
    lexicons = lexicons or default_lexicons()
    counts = Counter(pos_class(t.surface, lexicons) for t in tokens if t.kind is TokenKind.WORD)
    return PosCounts(
        n_nouns=counts["noun"],
        n_verbs=counts["verb"],
        n_pronouns=counts["pronoun"],
        n_adjectives=counts["adjective"],
        n_tokens=len(tokens),
    )


# -- misspellings --------------------------------------------------------------


class SpellIndex:
    """Vocabulary with precomputed single-deletion keys.

    Two distinct words are at Levenshtein distance 1 iff one is a single
    deletion of the other, or both reduce to the same string by deleting the
    character at the same index.
    """

    def __init__(self, vocabulary: Iterable[str]):
        self.words = frozenset(vocabulary)
        self._deletions = set()
        self._substitutions = set()
        for w in self.words:
            for i in range(len(w)):
                d = w[:i] + w[i + 1:]
                self._deletions.add(d)
                self._substitutions.add((i, d))

    def __contains__(self, word):
        return word in self.words

    def has_neighbour(self, word: str) -> bool:
        if word in self._deletions:  # insertion into word gives a vocabulary entry
            return True
        for i in range(len(word)):
            d = word[:i] + word[i + 1:]
            if d in self.words or (i, d) in self._substitutions:
                return True
        return False


def count_misspellings(tokens: Sequence[Token], vocabulary) -> int:
    """Out-of-vocabulary words within edit distance 1 of a vocabulary word."""
    index = vocabulary if isinstance(vocabulary, SpellIndex) else SpellIndex(vocabulary)
    return sum(
        1
        for t in tokens
        if t.kind is TokenKind.WORD and t.surface not in index and index.has_neighbour(t.surface)
    )


# -- named-entity stand-in -----------------------------------------------------


@dataclass(frozen=True)
class GazetteerHits:
    n_locations: int = 0
    n_organisations: int = 0
    n_persons: int = 0
    n_addresses: int = 0


def gazetteer_hits(tokens: Sequence[Token | str], gazetteer: Gazetteer | None = None) -> GazetteerHits:
    counts = (gazetteer if gazetteer is not None else default_gazetteer()).match(tokens)
    return GazetteerHits(
        n_locations=counts["location"],
        n_organisations=counts["organisation"],
        n_persons=counts["person"],
        n_addresses=counts["address"],
    )
