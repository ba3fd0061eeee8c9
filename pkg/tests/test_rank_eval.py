import dataclasses
import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqarank.corpus import Comment, CommentLabel, Question, RankedRun, Thread
from cqarank.errors import ValidationError
from cqarank.rank_eval import (
    AblationReport,
    AblationRow,
    ablate,
    ablation_configurations,
    accuracy,
    average_precision,
    fuse_subtask_c,
    map_score,
    rank_subtask_a,
    threshold,
)
from oracles import brute_average_precision


def run_of(rankings):
    run = RankedRun()
    for qid, docs in rankings.items():
        run.add(qid, [(d, float(len(docs) - i)) for i, d in enumerate(docs)])
    return run


def gold_of(labels):
    return {(q, d): rel for q, docs in labels.items() for d, rel in docs.items()}


# -- MAP ---------------------------------------------------------------------------


def test_map_examples():
    assert map_score(run_of({"q": ["r", "i"]}), gold_of({"q": {"r": True, "i": False}})) == 100.0
    got = map_score(run_of({"q": ["i", "r1", "r2"]}), gold_of({"q": {"i": False, "r1": True, "r2": True}}))
    assert got == pytest.approx(100 * (1 / 2 + 2 / 3) / 2, abs=1e-9)
    assert round(got, 2) == 58.33
    two = run_of({"a": ["r"], "b": ["i", "r"]})
    assert map_score(two, gold_of({"a": {"r": True}, "b": {"i": False, "r": True}})) == pytest.approx(75.0)


def test_zero_relevant_queries_excluded_by_default():
    run = run_of({"a": ["r"], "b": ["i"]})
    gold = gold_of({"a": {"r": True}, "b": {"i": False}})
    assert map_score(run, gold) == 100.0
    assert map_score(run, gold, exclude_zero_relevant=False) == 50.0


def test_depth_truncation():
    docs = [f"d{i}" for i in range(12)]
    gold = gold_of({"q": {d: d == "d11" for d in docs}})
    assert map_score(run_of({"q": docs}), gold) == 0.0
    assert map_score(run_of({"q": docs}), gold, depth=12) == pytest.approx(100 / 12)


def test_unlabelled_document_is_error():
    with pytest.raises(ValidationError):
        map_score(run_of({"q": ["x", "y"]}), gold_of({"q": {"x": True}}))


def test_map_brute_force_all_permutations():
    for n in range(1, 7):
        docs = [f"d{i}" for i in range(n)]
        for mask in range(1, 2 ** n):
            rel = {d: bool(mask >> i & 1) for i, d in enumerate(docs)}
            gold = gold_of({"q": rel})
            for perm in itertools.permutations(docs):
                want = 100 * brute_average_precision(list(perm), rel, 10)
                got = map_score(run_of({"q": list(perm)}), gold)
                assert abs(got - want) < 1e-9


labels = st.lists(st.booleans(), min_size=1, max_size=8)


@given(labels, st.randoms())
def test_map_invariant_under_monotone_transform(rels, rnd):
    docs = [f"d{i}" for i in range(len(rels))]
    # integer scores keep the transform exactly order-preserving, with no rounding ties
    scores = [rnd.randint(-50, 50) for _ in docs]
    gold = gold_of({"q": dict(zip(docs, rels))})
    a, b = RankedRun(), RankedRun()
    a.add("q", list(zip(docs, scores)))
    b.add("q", [(d, s ** 3 + 5 * s - 7) for d, s in zip(docs, scores)])
    assert map_score(a, gold) == map_score(b, gold)


@given(labels, st.randoms())
def test_map_is_100_iff_relevant_first(rels, rnd):
    if not any(rels):
        return
    docs = [f"d{i}" for i in range(len(rels))]
    order = list(docs)
    rnd.shuffle(order)
    rel = dict(zip(docs, rels))
    perfect = all(rel[x] or not rel[y] for x, y in zip(order, order[1:]))
    got = map_score(run_of({"q": order}), gold_of({"q": rel}))
    assert (got == pytest.approx(100.0)) == perfect


def test_average_precision_empty():
    assert average_precision([], {}) == 0.0


# -- subtask A ranking ---------------------------------------------------------


def thread_of(n):
    q = Question(id="Q1", subject="s", body="b", category="c", author_id="u", timestamp=0)
    comments = tuple(Comment(id=f"Q1_C{i}", author_id="u", body="x", position=i, label=CommentLabel.GOOD)
                     for i in range(1, n + 1))
    return Thread(question=q, comments=comments)


def test_rank_subtask_a_examples():
    t = thread_of(2)
    assert [c for c, _ in rank_subtask_a(t, {"Q1_C1": 0.2, "Q1_C2": 0.9})] == ["Q1_C2", "Q1_C1"]
    assert [c for c, _ in rank_subtask_a(t, {"Q1_C1": 0.5, "Q1_C2": 0.5})] == ["Q1_C1", "Q1_C2"]
    with pytest.raises(ValidationError):
        rank_subtask_a(t, {"Q1_C1": 0.5})


@given(st.lists(st.floats(0, 1), min_size=10, max_size=10))
def test_rank_subtask_a_is_permutation(probs):
    t = thread_of(10)
    ranked = rank_subtask_a(t, {c.id: p for c, p in zip(t.comments, probs)})
    assert sorted(c for c, _ in ranked) == sorted(c.id for c in t.comments)
    scores = [s for _, s in ranked]
    assert scores == sorted(scores, reverse=True)


# -- subtask C fusion ------------------------------------------------------------------


def test_fusion_examples():
    assert fuse_subtask_c(0.8, 1) == 0.8
    assert fuse_subtask_c(0.8, 4) == 0.2
    assert fuse_subtask_c(0.0, 7) == 0.0
    for bad in [(0.5, 0), (0.5, -1), (1.5, 1), (-0.1, 2)]:
        with pytest.raises(ValueError):
            fuse_subtask_c(*bad)


def test_fusion_preserves_within_question_order():
    rng = random.Random(0)
    for _ in range(1000):
        rank = rng.randint(1, 10)
        probs = [rng.random() for _ in range(rng.randint(2, 10))]
        before = sorted(range(len(probs)), key=lambda i: -probs[i])
        fused = [fuse_subtask_c(p, rank) for p in probs]
        assert sorted(range(len(probs)), key=lambda i: -fused[i]) == before


# -- accuracy ------------------------------------------------------------------------


def test_accuracy_examples():
    gold = {("q", str(i)): i % 2 == 0 for i in range(4)}
    assert accuracy(dict(gold), gold) == 100.0
    flipped = {k: (not v if k[1] in "01" else v) for k, v in gold.items()}
    assert accuracy(flipped, gold) == 50.0
    one_wrong = {k: (not v if k[1] == "3" else v) for k, v in gold.items()}
    assert accuracy(one_wrong, gold) == 75.0
    with pytest.raises(ValidationError):
        accuracy({("q", "0"): True}, gold)


def test_threshold():
    assert threshold({("q", "a"): 0.5, ("q", "b"): 0.49}) == {("q", "a"): True, ("q", "b"): False}


# -- ablation -------------------------------------------------------------------------


def test_ablation_configurations():
    groups = ["a", "b", "c"]
    assert ablation_configurations(groups, []) == [("All", groups)]
    configs = ablation_configurations(groups, ["b"])
    assert configs[1] == ("All - b", ["a", "c"])
    with pytest.raises(ValueError):
        ablation_configurations(groups, ["z"])


def test_report_rendering():
    report = AblationReport([AblationRow("All", 70.0, 75.5, 71.25, 76.0), AblationRow("All - pmi", 65.0, 70.0)])
    text = report.to_text()
    assert "MAP test" in text and "71.25" in text and "All - pmi" in text
    csv = report.to_csv().splitlines()
    assert csv[0] == "Features,MAP dev,Acc dev,MAP test,Acc test"
    assert csv[2] == "All - pmi,65.00,70.00,-,-"
    with pytest.raises(ValueError):
        AblationRow("x", 101.0, 50.0)


def zero_group(matrix, group):
    X = matrix.X.copy()
    X[:, matrix.groups[group]] = 0.0
    return dataclasses.replace(matrix, X=X)


def test_constant_zero_group_does_not_change_map(split_matrices, sample_config):
    from cqarank.pipeline import ablate_matrices

    train_m, dev_m = (zero_group(m, "troll") for m in split_matrices)
    report = ablate_matrices(train_m, dev_m, None, ["troll"], sample_config)
    assert len(report.rows) == 2
    assert abs(report.rows[0].map_dev - report.rows[1].map_dev) < 1e-6


def test_ablate_row_count(sample_split, split_models, sample_config):
    train, dev = sample_split
    groups = ["pmi", "simhash", "readability"]
    report = ablate(train, (dev, dev), groups, sample_config, split_models)
    assert [r.name for r in report.rows] == ["All"] + [f"All - {g}" for g in groups]
    assert all(r.map_test == r.map_dev for r in report.rows)
    assert len(ablate(train, dev, [], sample_config, split_models).rows) == 1
