"""Data model for forum threads, user profiles and ranking runs.

Corpora are stored as JSON lines, one thread per line::

    {"question": {...}, "original_question": {...} | null, "comments": [{...}, ...]}

Question keys: ``id, subject, body, category, author_id, timestamp,
search_rank, relevance``. Comment keys: ``id, author_id, body, position,
label``. Absent optionals are ``null``.
"""
from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ParseError, ValidationError

logger = logging.getLogger(__name__)


class CommentLabel(str, enum.Enum):
    GOOD = "Good"
    POTENTIALLY_USEFUL = "PotentiallyUseful"
    BAD = "Bad"

    @property
    def relevant(self) -> bool:
        return self is CommentLabel.GOOD


class QuestionLabel(str, enum.Enum):
    PERFECT_MATCH = "PerfectMatch"
    RELEVANT = "Relevant"
    IRRELEVANT = "Irrelevant"

    @property
    def relevant(self) -> bool:
        return self is not QuestionLabel.IRRELEVANT


@dataclass(frozen=True)
class Question:
    id: str
    subject: str = ""
    body: str = ""
    category: str = ""
    author_id: str = ""
    timestamp: int | None = None
    # position returned by the search engine for a related question
    search_rank: int | None = None
    # relevance of a related question to its original question
    relevance: QuestionLabel | None = None

    @property
    def text(self) -> str:
        if self.subject and self.body:
            return f"{self.subject} {self.body}"
        return self.subject or self.body


@dataclass(frozen=True)
class Comment:
    id: str
    author_id: str = ""
    body: str = ""
    position: int = 1
    label: CommentLabel | None = None


@dataclass(frozen=True)
class Thread:
    question: Question
    comments: tuple[Comment, ...] = ()
    original_question: Question | None = None


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    n_questions: int = 0
    n_comments: int = 0
    n_classifieds: int = 0
    registration_time: int = 0
    last_activity_time: int = 0
    active_hours: tuple[int, ...] = (0,) * 24
    troll_mentions: int = 0
    n_good_comments: int = 0
    n_bad_comments: int = 0
    # set only on the placeholder returned for unknown users
    missing: bool = False


_COUNT_FIELDS = (
    "n_questions",
    "n_comments",
    "n_classifieds",
    "troll_mentions",
    "n_good_comments",
    "n_bad_comments",
)


def missing_profile(user_id: str) -> UserProfile:
    return UserProfile(user_id=user_id, missing=True)


@dataclass(frozen=True)
class Corpus:
    threads: tuple[Thread, ...] = ()
    profiles: Mapping[str, UserProfile] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.threads)

    def __iter__(self):
        return iter(self.threads)

    def profile(self, user_id: str) -> UserProfile:
        return self.profiles.get(user_id) or missing_profile(user_id)

    def with_profiles(self, profiles: Mapping[str, UserProfile]) -> Corpus:
        return replace(self, profiles=dict(profiles))

    def __add__(self, other: Corpus) -> Corpus:
        merged = dict(self.profiles)
        merged.update(other.profiles)
        return validate_corpus(Corpus(self.threads + other.threads, merged))


# -- parsing -----------------------------------------------------------------


def _expect(obj, key, kind, line, required=True):
    if key not in obj or obj[key] is None:
        if required:
            raise ParseError(f"missing field {key!r}", line)
        return None
    value = obj[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ParseError(f"field {key!r} must be an integer, got {value!r}", line)
    if kind is str and not isinstance(value, str):
        raise ParseError(f"field {key!r} must be a string, got {value!r}", line)
    return value


def _enum(cls, value, line):
    if value is None:
        return None
    try:
        return cls(value)
    except ValueError:
        raise ParseError(f"unknown {cls.__name__} {value!r}", line) from None


def _question(obj, line) -> Question:
    if not isinstance(obj, dict):
        raise ParseError("question must be an object", line)
    return Question(
        id=_expect(obj, "id", str, line),
        subject=_expect(obj, "subject", str, line, required=False) or "",
        body=_expect(obj, "body", str, line, required=False) or "",
        category=_expect(obj, "category", str, line, required=False) or "",
        author_id=_expect(obj, "author_id", str, line, required=False) or "",
        timestamp=_expect(obj, "timestamp", int, line, required=False),
        search_rank=_expect(obj, "search_rank", int, line, required=False),
        relevance=_enum(QuestionLabel, obj.get("relevance"), line),
    )


def _comment(obj, line) -> Comment:
    if not isinstance(obj, dict):
        raise ParseError("comment must be an object", line)
    return Comment(
        id=_expect(obj, "id", str, line),
        author_id=_expect(obj, "author_id", str, line, required=False) or "",
        body=_expect(obj, "body", str, line, required=False) or "",
        position=_expect(obj, "position", int, line),
        label=_enum(CommentLabel, obj.get("label"), line),
    )


def parse_thread(obj, line=None) -> Thread:
    if not isinstance(obj, dict):
        raise ParseError("thread record must be a JSON object", line)
    question = _question(obj.get("question"), line)
    original = obj.get("original_question")
    comments = obj.get("comments") or []
    if not isinstance(comments, list):
        raise ParseError("comments must be a list", line)
    thread = Thread(
        question=question,
        comments=tuple(sorted((_comment(c, line) for c in comments), key=lambda c: c.position)),
        original_question=_question(original, line) if original is not None else None,
    )
    validate_thread(thread, line)
    return thread


def validate_thread(thread: Thread, line=None) -> None:
    qid = thread.question.id
    if not qid:
        raise ValidationError(f"line {line}: empty question id" if line else "empty question id")
    for q in (thread.question, thread.original_question):
        if q is not None and q.search_rank is not None and q.search_rank < 1:
            raise ValidationError(f"thread {qid}: search_rank must be >= 1, got {q.search_rank}")
    positions = [c.position for c in thread.comments]
    if positions != list(range(1, len(positions) + 1)):
        raise ValidationError(
            f"thread {qid}: comment positions must be 1..{len(positions)} without gaps, got {positions}"
        )
    ids = [c.id for c in thread.comments]
    if len(set(ids)) != len(ids):
        raise ValidationError(f"thread {qid}: duplicate comment ids")


def validate_corpus(corpus: Corpus) -> Corpus:
    seen = set()
    for thread in corpus.threads:
        qid = thread.question.id
        if qid in seen:
            raise ValidationError(f"duplicate question id {qid!r}")
        seen.add(qid)
    return corpus


def load_corpus(path, format: str = "jsonl") -> Corpus:
    """Read a JSONL corpus, preserving thread order."""
    if format != "jsonl":
        raise ValueError(f"unsupported corpus format {format!r}")
    threads = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", lineno) from exc
            threads.append(parse_thread(obj, lineno))
    return validate_corpus(Corpus(tuple(threads)))


def _question_record(q: Question | None):
    if q is None:
        return None
    rec = {f.name: getattr(q, f.name) for f in fields(q)}
    rec["relevance"] = q.relevance.value if q.relevance else None
    return rec


def thread_to_record(thread: Thread) -> dict:
    return {
        "question": _question_record(thread.question),
        "original_question": _question_record(thread.original_question),
        "comments": [
            {
                "id": c.id,
                "author_id": c.author_id,
                "body": c.body,
                "position": c.position,
                "label": c.label.value if c.label else None,
            }
            for c in thread.comments
        ],
    }


def dump_corpus(corpus: Corpus | Iterable[Thread], path) -> None:
    threads = corpus.threads if isinstance(corpus, Corpus) else corpus
    with open(path, "w", encoding="utf-8") as fh:
        for thread in threads:
            fh.write(json.dumps(thread_to_record(thread), ensure_ascii=False))
            fh.write("\n")


# -- user profiles -----------------------------------------------------------


def parse_profile(obj, line=None) -> UserProfile:
    if not isinstance(obj, dict):
        raise ParseError("profile record must be a JSON object", line)
    counts = {}
    for name in _COUNT_FIELDS:
        value = _expect(obj, name, int, line, required=False) or 0
        if value < 0:
            raise ValidationError(f"line {line}: {name} must be >= 0, got {value}")
        counts[name] = value
    hours = obj.get("active_hours") or [0] * 24
    if len(hours) != 24 or any(not isinstance(h, int) or h < 0 for h in hours):
        raise ValidationError(f"line {line}: active_hours must be 24 non-negative integers")
    registration = _expect(obj, "registration_time", int, line, required=False) or 0
    last_activity = _expect(obj, "last_activity_time", int, line, required=False)
    if last_activity is None:
        last_activity = registration
    if last_activity < registration:
        raise ValidationError(f"line {line}: last_activity_time precedes registration_time")
    return UserProfile(
        user_id=_expect(obj, "user_id", str, line),
        registration_time=registration,
        last_activity_time=last_activity,
        active_hours=tuple(hours),
        **counts,
    )


def load_profiles(path) -> tuple[dict[str, UserProfile], int]:
    """Read user profiles from JSONL.

    Returns the profile map and the number of duplicate user ids that
    overwrote an earlier record.
    """
    profiles: dict[str, UserProfile] = {}
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", lineno) from exc
            profile = parse_profile(obj, lineno)
            if profile.user_id in profiles:
                duplicates += 1
            profiles[profile.user_id] = profile
    if duplicates:
        logger.warning("%d duplicate profile(s) in %s; later records kept", duplicates, path)
    return profiles, duplicates


def dump_profiles(profiles: Mapping[str, UserProfile], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in profiles.values():
            rec = {f.name: getattr(p, f.name) for f in fields(p) if f.name != "missing"}
            rec["active_hours"] = list(p.active_hours)
            fh.write(json.dumps(rec) + "\n")


# -- relevance judgements ----------------------------------------------------


def relevance_judgements(corpus: Corpus, subtask: str = "A") -> dict[tuple[str, str], bool]:
    """Binary gold relevance keyed by (query id, document id).

    A: thread question vs. its comments. B: original question vs. related
    question. C: original question vs. comments of its related threads.
    """
    gold: dict[tuple[str, str], bool] = {}
    for thread in corpus.threads:
        if subtask == "A":
            for c in thread.comments:
                if c.label is not None:
                    gold[thread.question.id, c.id] = c.label.relevant
        elif subtask == "B":
            q = thread.question
            if thread.original_question is None:
                raise ValidationError(f"thread {q.id}: subtask B needs original_question")
            if q.relevance is not None:
                gold[thread.original_question.id, q.id] = q.relevance.relevant
        elif subtask == "C":
            if thread.original_question is None:
                raise ValidationError(f"thread {thread.question.id}: subtask C needs original_question")
            for c in thread.comments:
                if c.label is not None:
                    gold[thread.original_question.id, c.id] = c.label.relevant
        else:
            raise ValueError(f"unknown subtask {subtask!r}")
    return gold


# -- run files ---------------------------------------------------------------


@dataclass
class RankedRun:
    """Per-query ranked documents.

    Items added through :meth:`add` are sorted by descending score; ties keep
    insertion order.
    """

    queries: dict[str, list[tuple[str, float]]] = field(default_factory=dict)
    tag: str = "cqarank"

    def add(self, qid: str, items: Iterable[tuple[str, float]]) -> None:
        ranked = sorted(items, key=lambda item: -item[1])
        ids = [doc for doc, _ in ranked]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"query {qid}: duplicate document ids")
        self.queries[qid] = ranked

    def ranking(self, qid: str) -> list[str]:
        return [doc for doc, _ in self.queries[qid]]


def write_run_file(run: RankedRun, path) -> None:
    """Write ``qid Q0 docid rank score tag`` lines, ranks starting at 1."""
    lines = []
    for qid, items in run.queries.items():
        if not items:
            raise ValidationError(f"query {qid} has no ranked items")
        ordered = sorted(items, key=lambda item: -item[1])
        for rank, (doc, score) in enumerate(ordered, 1):
            lines.append(f"{qid} Q0 {doc} {rank} {score:.6f} {run.tag}\n")
    Path(path).write_text("".join(lines), encoding="ascii")


def read_run_file(path) -> RankedRun:
    rows: dict[str, list[tuple[int, str, float]]] = {}
    tag = "cqarank"
    with open(path, encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, 1):
            parts = raw.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise ParseError(f"expected 6 columns, got {len(parts)}", lineno)
            qid, _, doc, rank, score, tag = parts
            try:
                rows.setdefault(qid, []).append((int(rank), doc, float(score)))
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from exc
    run = RankedRun(tag=tag)
    for qid, items in rows.items():
        items.sort()
        run.queries[qid] = [(doc, score) for _, doc, score in items]
    return run
