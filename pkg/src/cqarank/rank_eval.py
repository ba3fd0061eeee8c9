"""Rankings, MAP and accuracy, and feature-group ablation reports.

MAP follows the conventions of the SemEval CQA scorer: average precision is
truncated at ``depth`` and normalized by the number of relevant documents
found within that depth, and queries without any relevant document are left
out of the mean.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .corpus import RankedRun, Thread
from .errors import ValidationError

DEFAULT_DEPTH = 10


def rank_subtask_a(thread: Thread, probs: Mapping[str, float]) -> list[tuple[str, float]]:
    """Comments by descending probability; ties keep thread order."""
    missing = [c.id for c in thread.comments if c.id not in probs]
    if missing:
        raise ValidationError(f"thread {thread.question.id}: no probability for {', '.join(missing)}")
    ordered = sorted(thread.comments, key=lambda c: (-probs[c.id], c.position))
    return [(c.id, float(probs[c.id])) for c in ordered]


def fuse_subtask_c(prob_good: float, google_rank: int) -> float:
    """Probability of Good scaled by the reciprocal search rank of the related question."""
    if google_rank is None or google_rank < 1:
        raise ValueError(f"search rank must be >= 1, got {google_rank}")
    if not 0.0 <= prob_good <= 1.0:
        raise ValueError(f"probability out of range: {prob_good}")
    return prob_good / google_rank


def average_precision(ranking: Sequence[str], relevant: Mapping[str, bool], depth: int = DEFAULT_DEPTH) -> float:
    """AP in [0, 1] of one ranked list truncated at ``depth``."""
    hits = 0
    total = 0.0
    for i, doc in enumerate(ranking[:depth], 1):
        if relevant[doc]:
            hits += 1
            total += hits / i
    return total / hits if hits else 0.0


def map_score(run: RankedRun, gold: Mapping[tuple[str, str], bool], depth: int = DEFAULT_DEPTH,
              exclude_zero_relevant: bool = True) -> float:
    """Mean average precision in percent."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    aps = []
    for qid in run.queries:
        ranking = run.ranking(qid)
        rel = {}
        for doc in ranking:
            if (qid, doc) not in gold:
                raise ValidationError(f"no gold label for query {qid}, document {doc}")
            rel[doc] = bool(gold[qid, doc])
        if exclude_zero_relevant and not any(rel.values()):
            continue
        aps.append(average_precision(ranking, rel, depth))
    return 100.0 * sum(aps) / len(aps) if aps else 0.0


def accuracy(predictions: Mapping[tuple[str, str], bool], gold: Mapping[tuple[str, str], bool]) -> float:
    """Percent of binary decisions that agree with gold. Keys must match exactly."""
    if set(predictions) != set(gold):
        extra = len(set(predictions) - set(gold))
        missing = len(set(gold) - set(predictions))
        raise ValidationError(f"key mismatch: {extra} predictions without gold, {missing} gold without prediction")
    if not gold:
        raise ValidationError("nothing to score")
    correct = sum(bool(predictions[k]) == bool(gold[k]) for k in gold)
    return 100.0 * correct / len(gold)


def threshold(probabilities: Mapping[tuple[str, str], float], cut: float = 0.5) -> dict[tuple[str, str], bool]:
    return {k: p >= cut for k, p in probabilities.items()}


# -- ablation -------------------------------------------------------------------


@dataclass
class AblationRow:
    name: str
    map_dev: float
    acc_dev: float
    map_test: float | None = None
    acc_test: float | None = None

    def __post_init__(self):
        for v in (self.map_dev, self.acc_dev, self.map_test, self.acc_test):
            if v is not None and not (0.0 <= v <= 100.0):
                raise ValueError(f"score out of range: {v}")


@dataclass
class AblationReport:
    rows: list[AblationRow] = field(default_factory=list)
    note: str = "Accuracy is binary Good vs. rest at probability 0.5."

    def _cells(self):
        has_test = any(r.map_test is not None for r in self.rows)
        header = ["Features", "MAP dev", "Acc dev"] + (["MAP test", "Acc test"] if has_test else [])

        def fmt(v):
            return "-" if v is None else f"{v:.2f}"

        body = []
        for r in self.rows:
            cells = [r.name, fmt(r.map_dev), fmt(r.acc_dev)]
            if has_test:
                cells += [fmt(r.map_test), fmt(r.acc_test)]
            body.append(cells)
        return header, body

    def to_text(self) -> str:
        header, body = self._cells()
        widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]
        lines = []
        for row in [header] + body:
            first = row[0].ljust(widths[0])
            rest = [cell.rjust(w) for cell, w in zip(row[1:], widths[1:])]
            lines.append("  ".join([first] + rest))
        lines.insert(1, "-" * len(lines[0]))
        return "\n".join(lines) + "\n" + self.note + "\n"

    def to_csv(self) -> str:
        header, body = self._cells()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        return buf.getvalue()


def ablation_configurations(all_groups: Sequence[str], group_list: Iterable[str]) -> list[tuple[str, list[str]]]:
    """("All", every group) followed by ("All - g", every group but g) for each g."""
    configs = [("All", list(all_groups))]
    for g in group_list:
        if g not in all_groups:
            raise ValueError(f"group {g!r} is not enabled")
        configs.append((f"All - {g}", [x for x in all_groups if x != g]))
    return configs


def ablate(corpus_train, corpus_eval, group_list: Iterable[str], base_config=None, models=None) -> AblationReport:
    """Retrain the classifier once per configuration and score it.

    ``corpus_eval`` is a dev corpus or a (dev, test) pair. Auxiliary models
    are trained once on ``corpus_train`` unless ``models`` are supplied.
    """
    from .pipeline import PipelineConfig, ablate_matrices, build_models, extract_matrix

    config = base_config or PipelineConfig()
    if isinstance(corpus_eval, tuple):
        dev, test = corpus_eval
    else:
        dev, test = corpus_eval, None
    models = models or build_models(corpus_train, config)
    train_m = extract_matrix(corpus_train, models, config)
    dev_m = extract_matrix(dev, models, config)
    test_m = extract_matrix(test, models, config) if test is not None else None
    return ablate_matrices(train_m, dev_m, test_m, list(group_list), config)

