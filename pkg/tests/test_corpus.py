import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqarank.corpus import (
    Comment,
    CommentLabel,
    Corpus,
    Question,
    QuestionLabel,
    RankedRun,
    Thread,
    dump_corpus,
    load_corpus,
    load_profiles,
    read_run_file,
    relevance_judgements,
    write_run_file,
)
from cqarank.errors import ParseError, ValidationError


def thread_record(qid, positions=(1, 2), **question):
    q = {"id": qid, "subject": "s", "body": "b", "category": "c", "author_id": "u1", "timestamp": 10,
         "search_rank": None, "relevance": None}
    q.update(question)
    return {
        "question": q,
        "original_question": None,
        "comments": [{"id": f"{qid}_{i}_{p}", "author_id": "u2", "body": "hi", "position": p, "label": "Good"}
                     for i, p in enumerate(positions)],
    }


def write_lines(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


def test_load_two_threads(tmp_path):
    corpus = load_corpus(write_lines(tmp_path / "c.jsonl", [thread_record("Q1"), thread_record("Q2")]))
    assert [t.question.id for t in corpus.threads] == ["Q1", "Q2"]


def test_empty_file(tmp_path):
    p = tmp_path / "empty.jsonl"
    p.write_text("")
    assert len(load_corpus(p)) == 0


def test_duplicate_positions_name_the_thread(tmp_path):
    p = write_lines(tmp_path / "c.jsonl", [thread_record("Q7", positions=(1, 1, 2))])
    with pytest.raises(ValidationError, match="Q7"):
        load_corpus(p)


def test_position_gap_rejected(tmp_path):
    with pytest.raises(ValidationError):
        load_corpus(write_lines(tmp_path / "c.jsonl", [thread_record("Q1", positions=(1, 3))]))


def test_comments_sorted_by_position(tmp_path):
    corpus = load_corpus(write_lines(tmp_path / "c.jsonl", [thread_record("Q1", positions=(2, 1, 3))]))
    assert [c.position for c in corpus.threads[0].comments] == [1, 2, 3]


def test_malformed_line_reports_line_number(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text(json.dumps(thread_record("Q1")) + "\n{not json\n")
    with pytest.raises(ParseError) as info:
        load_corpus(p)
    assert info.value.line == 2


def test_duplicate_question_id(tmp_path):
    with pytest.raises(ValidationError, match="Q1"):
        load_corpus(write_lines(tmp_path / "c.jsonl", [thread_record("Q1"), thread_record("Q1")]))


def test_search_rank_must_be_positive(tmp_path):
    with pytest.raises(ValidationError):
        load_corpus(write_lines(tmp_path / "c.jsonl", [thread_record("Q1", search_rank=0)]))


def test_unknown_label(tmp_path):
    rec = thread_record("Q1")
    rec["comments"][0]["label"] = "Great"
    with pytest.raises(ParseError):
        load_corpus(write_lines(tmp_path / "c.jsonl", [rec]))


def test_label_relevance_mapping():
    assert CommentLabel.GOOD.relevant
    assert not CommentLabel.POTENTIALLY_USEFUL.relevant
    assert not CommentLabel.BAD.relevant
    assert QuestionLabel.PERFECT_MATCH.relevant and QuestionLabel.RELEVANT.relevant
    assert not QuestionLabel.IRRELEVANT.relevant


def test_round_trip_sample(sample_dir, tmp_path):
    corpus = load_corpus(sample_dir / "threads.jsonl")
    dump_corpus(corpus, tmp_path / "out.jsonl")
    assert load_corpus(tmp_path / "out.jsonl") == corpus
    related = load_corpus(sample_dir / "related.jsonl")
    dump_corpus(related, tmp_path / "rel.jsonl")
    assert load_corpus(tmp_path / "rel.jsonl") == related


def test_positions_equal_index(sample_corpus):
    for thread in sample_corpus.threads:
        assert [c.position for c in thread.comments] == list(range(1, len(thread.comments) + 1))


text = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=40)


@given(st.lists(st.tuples(text, text, st.sampled_from([None, "Good", "Bad", "PotentiallyUseful"])),
                min_size=0, max_size=5),
       text, st.none() | st.integers(0, 2**40), st.none() | st.integers(1, 100))
def test_round_trip_property(tmp_path_factory, comments, body, ts, rank):
    thread = Thread(
        Question("Q", "subj", body, "cat", "u", ts, rank, None),
        tuple(Comment(f"c{i}", a, b, i + 1, CommentLabel(l) if l else None) for i, (a, b, l) in enumerate(comments)),
        Question("O", "orig", "x", "cat", "v", None, None, None),
    )
    path = tmp_path_factory.mktemp("rt") / "c.jsonl"
    dump_corpus(Corpus((thread,)), path)
    assert load_corpus(path).threads == (thread,)


# -- profiles --------------------------------------------------------------------


def profile(uid, **kw):
    rec = {"user_id": uid, "n_questions": 1, "n_comments": 2, "n_classifieds": 0, "registration_time": 100,
           "last_activity_time": 200, "active_hours": [0] * 24, "troll_mentions": 0, "n_good_comments": 0,
           "n_bad_comments": 0}
    rec.update(kw)
    return rec


def test_profiles_distinct(tmp_path):
    profiles, dup = load_profiles(write_lines(tmp_path / "p.jsonl", [profile("a"), profile("b"), profile("c")]))
    assert len(profiles) == 3 and dup == 0


def test_profiles_duplicate_overwrites(tmp_path):
    p = write_lines(tmp_path / "p.jsonl", [profile("a"), profile("b"), profile("a", n_questions=9)])
    profiles, dup = load_profiles(p)
    assert len(profiles) == 2 and dup == 1
    assert profiles["a"].n_questions == 9


def test_profile_activity_before_registration(tmp_path):
    with pytest.raises(ValidationError):
        load_profiles(write_lines(tmp_path / "p.jsonl", [profile("a", last_activity_time=50)]))


def test_profile_negative_count(tmp_path):
    with pytest.raises(ValidationError):
        load_profiles(write_lines(tmp_path / "p.jsonl", [profile("a", n_comments=-1)]))


def test_missing_profile_placeholder(sample_corpus):
    p = sample_corpus.profile("nobody")
    assert p.missing and p.n_comments == 0


# -- judgements and runs -----------------------------------------------------------


def test_relevance_judgements(related_corpus, sample_corpus):
    gold_a = relevance_judgements(sample_corpus, "A")
    assert all(q.startswith("Q") for q, _ in gold_a)
    gold_b = relevance_judgements(related_corpus, "B")
    assert len(gold_b) == len(related_corpus.threads)
    gold_c = relevance_judgements(related_corpus, "C")
    assert {q for q, _ in gold_c} == {t.original_question.id for t in related_corpus.threads}
    with pytest.raises(ValidationError):
        relevance_judgements(sample_corpus, "B")


def test_run_file_lines(tmp_path):
    run = RankedRun()
    run.add("q1", [("d1", 0.4), ("d2", 0.9)])
    write_run_file(run, tmp_path / "r.txt")
    lines = (tmp_path / "r.txt").read_text().splitlines()
    assert lines == ["q1 Q0 d2 1 0.900000 cqarank", "q1 Q0 d1 2 0.400000 cqarank"]


def test_run_file_ties_keep_input_order(tmp_path):
    run = RankedRun()
    run.add("q1", [("b", 0.5), ("a", 0.5), ("c", 0.5)])
    write_run_file(run, tmp_path / "r.txt")
    assert read_run_file(tmp_path / "r.txt").ranking("q1") == ["b", "a", "c"]


def test_run_file_rejects_empty_query(tmp_path):
    run = RankedRun(queries={"q": []})
    with pytest.raises(ValidationError):
        write_run_file(run, tmp_path / "r.txt")


def test_run_rejects_duplicate_docs():
    with pytest.raises(ValidationError):
        RankedRun().add("q", [("d", 0.1), ("d", 0.2)])


@given(st.dictionaries(st.text("abcdef", min_size=1, max_size=3),
                       st.lists(st.floats(0, 1), min_size=1, max_size=8), min_size=1, max_size=4))
def test_run_round_trip_and_sorted(tmp_path_factory, queries):
    run = RankedRun()
    for qid, scores in queries.items():
        run.add(qid, [(f"d{i}", round(s, 6)) for i, s in enumerate(scores)])
    path = tmp_path_factory.mktemp("run") / "r.txt"
    write_run_file(run, path)
    back = read_run_file(path)
    for qid in queries:
        assert back.ranking(qid) == run.ranking(qid)
        scores = [s for _, s in back.queries[qid]]
        assert scores == sorted(scores, reverse=True)
