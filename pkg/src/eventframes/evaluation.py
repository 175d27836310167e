"""External clustering quality metrics (ARI, NMI, BCubed) and the
top-k-type mention clustering harness."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .louvain import ClusterAssignment


class PartitionInputError(ValueError):
    pass


@dataclass(frozen=True)
class ClusteringMetrics:
    ari: float
    nmi: float
    bcubed_p: float
    bcubed_r: float
    bcubed_f1: float

    def as_dict(self) -> dict:
        return {
            "ari": self.ari,
            "nmi": self.nmi,
            "bcubed_p": self.bcubed_p,
            "bcubed_r": self.bcubed_r,
            "bcubed_f1": self.bcubed_f1,
        }


def _check_lengths(gold: Sequence, pred: Sequence) -> int:
    if len(gold) != len(pred):
        raise PartitionInputError(
            f"partitions must have equal length, got {len(gold)} and {len(pred)}"
        )
    if not gold:
        raise PartitionInputError("partitions must be non-empty")
    return len(gold)


def _contingency(gold: Sequence, pred: Sequence) -> np.ndarray:
    gold_index = {label: i for i, label in enumerate(dict.fromkeys(gold))}
    pred_index = {label: i for i, label in enumerate(dict.fromkeys(pred))}
    table = np.zeros((len(gold_index), len(pred_index)), dtype=np.int64)
    for g, p in zip(gold, pred):
        table[gold_index[g], pred_index[p]] += 1
    return table


def _same_partition(gold: Sequence, pred: Sequence) -> bool:
    groups_gold: dict = {}
    groups_pred: dict = {}
    for index, (g, p) in enumerate(zip(gold, pred)):
        groups_gold.setdefault(g, set()).add(index)
        groups_pred.setdefault(p, set()).add(index)
    return {frozenset(s) for s in groups_gold.values()} == {
        frozenset(s) for s in groups_pred.values()
    }


def ari(gold: Sequence, pred: Sequence) -> float:
    """Adjusted Rand index via the contingency-table closed form.

    When the adjustment is degenerate (max index equals its expectation, e.g.
    both partitions a single cluster), returns 1 for identical partitions and
    0 otherwise.
    """
    n = _check_lengths(gold, pred)
    table = _contingency(gold, pred)
    sum_cells = sum(math.comb(int(v), 2) for v in table.flat)
    sum_gold = sum(math.comb(int(v), 2) for v in table.sum(axis=1))
    sum_pred = sum(math.comb(int(v), 2) for v in table.sum(axis=0))
    pairs = math.comb(n, 2)
    expected = sum_gold * sum_pred / pairs if pairs else 0.0
    maximum = (sum_gold + sum_pred) / 2.0
    if maximum == expected:
        return 1.0 if _same_partition(gold, pred) else 0.0
    return (sum_cells - expected) / (maximum - expected)


def nmi(gold: Sequence, pred: Sequence) -> float:
    """Normalized mutual information, 2 * MI / (H(gold) + H(pred)), natural log.

    Both partitions being single-cluster gives 1.
    """
    n = _check_lengths(gold, pred)
    table = _contingency(gold, pred)
    joint = table / n
    p_gold = joint.sum(axis=1)
    p_pred = joint.sum(axis=0)
    entropy_gold = -float(sum(p * math.log(p) for p in p_gold if p > 0))
    entropy_pred = -float(sum(p * math.log(p) for p in p_pred if p > 0))
    if entropy_gold + entropy_pred == 0.0:
        return 1.0
    mutual = 0.0
    for i in range(joint.shape[0]):
        for j in range(joint.shape[1]):
            p = joint[i, j]
            if p > 0:
                mutual += p * math.log(p / (p_gold[i] * p_pred[j]))
    return float(2.0 * mutual / (entropy_gold + entropy_pred))


def bcubed(gold: Sequence, pred: Sequence) -> tuple[float, float, float]:
    """Per-element precision and recall averaged over elements, plus their
    harmonic-mean F1."""
    n = _check_lengths(gold, pred)
    table = _contingency(gold, pred)
    gold_sizes = table.sum(axis=1)
    pred_sizes = table.sum(axis=0)
    precision = 0.0
    recall = 0.0
    for i in range(table.shape[0]):
        for j in range(table.shape[1]):
            overlap = int(table[i, j])
            if overlap:
                # every element in this cell shares the same |C(e) n C*(e)|
                precision += overlap * overlap / pred_sizes[j]
                recall += overlap * overlap / gold_sizes[i]
    precision /= n
    recall /= n
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return float(precision), float(recall), float(f1)


def score_partition(gold: Sequence, pred: Sequence) -> ClusteringMetrics:
    p, r, f1 = bcubed(gold, pred)
    return ClusteringMetrics(
        ari=ari(gold, pred), nmi=nmi(gold, pred), bcubed_p=p, bcubed_r=r, bcubed_f1=f1
    )


def top_k_types(gold_mentions: Sequence[tuple[str, str]], k: int) -> list[str]:
    """The k gold types with the most mentions; ties prefer the
    lexicographically smaller name."""
    counts = Counter(gold_type for _, gold_type in gold_mentions)
    ordered = sorted(counts, key=lambda t: (-counts[t], t))
    return ordered[:k]


def mention_harness(
    gold_mentions: Sequence[tuple[str, str]],
    assignment: ClusterAssignment | Mapping[str, int],
    k: int = 15,
) -> ClusteringMetrics:
    """Restrict to mentions of the k most frequent gold types, then score the
    predicted assignment against the gold types.

    Mentions align to predictions by expression id, one mention per
    expression.
    """
    predicted = assignment.by_id() if isinstance(assignment, ClusterAssignment) else dict(assignment)
    retained_types = set(top_k_types(gold_mentions, k))
    gold: list[str] = []
    pred: list[int] = []
    for mention_id, gold_type in gold_mentions:
        if gold_type not in retained_types:
            continue
        if mention_id not in predicted:
            raise PartitionInputError(f"assignment does not cover mention {mention_id!r}")
        gold.append(gold_type)
        pred.append(predicted[mention_id])
    if not gold:
        raise PartitionInputError("no mentions retained; is the gold file empty?")
    return score_partition(gold, pred)


def average_metrics(runs: Sequence[ClusteringMetrics]) -> ClusteringMetrics:
    """Mean of each metric over repeated runs."""
    if not runs:
        raise PartitionInputError("no runs to average")
    n = len(runs)
    return ClusteringMetrics(
        ari=sum(m.ari for m in runs) / n,
        nmi=sum(m.nmi for m in runs) / n,
        bcubed_p=sum(m.bcubed_p for m in runs) / n,
        bcubed_r=sum(m.bcubed_r for m in runs) / n,
        bcubed_f1=sum(m.bcubed_f1 for m in runs) / n,
    )


def load_gold_mentions(path: str | Path) -> list[tuple[str, str]]:
    """Read a gold file: one {"id", "type"} object per line."""
    mentions: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                mentions.append((str(record["id"]), str(record["type"])))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad gold record: {exc}") from exc
    return mentions


def metrics_table(metrics: ClusteringMetrics) -> str:
    """Aligned plain-text rendering of a metrics report."""
    rows = [
        ("ARI", metrics.ari),
        ("NMI", metrics.nmi),
        ("BCubed-P", metrics.bcubed_p),
        ("BCubed-R", metrics.bcubed_r),
        ("BCubed-F1", metrics.bcubed_f1),
    ]
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {value:.4f}" for name, value in rows)
