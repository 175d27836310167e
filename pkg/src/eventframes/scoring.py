"""Slot confidence scoring and per-instance schema structuring.

Each generated slot is scored by salience (TF-IDF over the conceptualizer
output), reliability (PageRank centrality in the instance's slot
co-occurrence graph), and consistency (similarity of the slot's candidate
types to the source text).  Slots below the confidence threshold are dropped
and the top-1 consistent event type is kept per instance.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .conceptualize import ConceptualizedInstance
from .corpus import EventExpression
from .similarity import SimilarityEnsemble, default_ensemble

SQUARED_LOG = "squared-log"  # 1 + (log f)^2
LOG_OF_SQUARE = "log-of-square"  # 1 + log(f^2)


@dataclass(frozen=True)
class ScoringConfig:
    lambda1: float = 1.0
    lambda2: float = 1.0
    beta: float = 0.8
    max_iterations: int = 300
    tolerance: float = 1e-6
    threshold: float = 1.0 / 3.0
    weighted_cooccurrence: bool = False
    tf_variant: str = SQUARED_LOG
    log_base: float = math.e

    def __post_init__(self) -> None:
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must be in (0, 1), got {self.beta}")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("lambda1 and lambda2 must be non-negative")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tf_variant not in (SQUARED_LOG, LOG_OF_SQUARE):
            raise ValueError(f"unknown tf_variant: {self.tf_variant!r}")
        if self.log_base <= 1.0:
            raise ValueError("log_base must be > 1")


@dataclass(frozen=True)
class SlotRecord:
    slot: str
    freq: int
    salience: float
    reliability: float
    consistency: float
    score: float


@dataclass(frozen=True)
class StructuredInstance:
    expression: EventExpression
    event_type: str
    slots: tuple[SlotRecord, ...]
    type_consistency: float

    @property
    def slot_names(self) -> tuple[str, ...]:
        return tuple(record.slot for record in self.slots)


@dataclass(frozen=True)
class SlotSet:
    """The union of one instance's candidate slots with per-candidate membership."""

    freq: Counter
    members: tuple[frozenset[str], ...]  # slots of each candidate, in order

    def __len__(self) -> int:
        return len(self.freq)


def collect_slot_set(instance: ConceptualizedInstance) -> SlotSet:
    """Union the candidates' slots; freq(s) counts candidates containing s."""
    if not instance.candidates:
        raise ValueError("instance has no parsed candidates")
    freq: Counter = Counter()
    members: list[frozenset[str]] = []
    for candidate in instance.candidates:
        slots = frozenset(candidate.slots)
        members.append(slots)
        freq.update(slots)
    return SlotSet(freq=freq, members=tuple(members))


def global_slot_frequencies(
    instances: Sequence[ConceptualizedInstance],
) -> tuple[dict[str, int], int]:
    """Total slot frequency across all instances, plus the instance count."""
    totals: Counter = Counter()
    for instance in instances:
        totals.update(collect_slot_set(instance).freq)
    return dict(totals), len(instances)


def salience(
    instance_freq: int,
    total_freq: int,
    corpus_size: int,
    cfg: ScoringConfig = ScoringConfig(),
) -> float:
    """TF-IDF-style slot weight; may be zero or negative.

    Default reading: (1 + (ln freq)^2) * ln(corpus_size / total_freq).  The
    TF variant and the log base are config-visible since both conventions
    appear in TF-IDF variants.
    """
    if not total_freq >= instance_freq >= 1:
        raise ValueError(f"need total_freq >= instance_freq >= 1, got {total_freq}, {instance_freq}")
    if corpus_size < 1:
        raise ValueError("corpus_size must be >= 1")
    log_f = math.log(instance_freq, cfg.log_base)
    tf = 1.0 + (log_f**2 if cfg.tf_variant == SQUARED_LOG else 2.0 * log_f)
    idf = math.log(corpus_size / total_freq, cfg.log_base)
    return tf * idf


def cooccurrence_graph(slot_set: SlotSet, weighted: bool = False) -> dict[str, dict[str, float]]:
    """Slot adjacency: s ~ s' when they appear together in at least one
    candidate; weighted mode counts shared candidates as the edge weight."""
    adjacency: dict[str, dict[str, float]] = {slot: {} for slot in slot_set.freq}
    for members in slot_set.members:
        ordered = sorted(members)
        for i, a in enumerate(ordered):
            for b in ordered[i + 1 :]:
                if weighted:
                    adjacency[a][b] = adjacency[a].get(b, 0.0) + 1.0
                    adjacency[b][a] = adjacency[b].get(a, 0.0) + 1.0
                else:
                    adjacency[a][b] = 1.0
                    adjacency[b][a] = 1.0
    return adjacency


@dataclass(frozen=True)
class PageRankTrace:
    """Per-iteration score movement; the L1 change contracts by beta per step."""

    max_changes: tuple[float, ...]
    l1_changes: tuple[float, ...]

    @property
    def iterations(self) -> int:
        return len(self.max_changes)


def pagerank(
    adjacency: Mapping[str, Mapping[str, float]],
    beta: float,
    max_iterations: int,
    tolerance: float,
) -> tuple[dict[str, float], PageRankTrace]:
    """Degree-normalized power iteration with uniform teleport.

    Scores start at 1/N.  Each step distributes beta * R(s') / d(s') along
    edges, where d(s') is the (weighted) degree; nodes without partners keep
    only the teleport term.  Stops after max_iterations or once the max
    per-slot change drops below tolerance.
    """
    nodes = sorted(adjacency)
    n = len(nodes)
    if n == 0:
        return {}, PageRankTrace((), ())
    degree = {s: sum(adjacency[s].values()) for s in nodes}
    teleport = (1.0 - beta) / n
    scores = {s: 1.0 / n for s in nodes}
    max_changes: list[float] = []
    l1_changes: list[float] = []
    for _ in range(max_iterations):
        updated: dict[str, float] = {}
        for s in nodes:
            inflow = sum(scores[o] * w / degree[o] for o, w in sorted(adjacency[s].items()))
            updated[s] = beta * inflow + teleport
        deltas = [abs(updated[s] - scores[s]) for s in nodes]
        max_changes.append(max(deltas))
        l1_changes.append(sum(deltas))
        scores = updated
        if max_changes[-1] < tolerance:
            break
    return scores, PageRankTrace(tuple(max_changes), tuple(l1_changes))


def reliability(slot_set: SlotSet, cfg: ScoringConfig = ScoringConfig()) -> dict[str, float]:
    """PageRank centrality of each slot in the instance's co-occurrence graph."""
    if len(slot_set) == 0:
        return {}
    adjacency = cooccurrence_graph(slot_set, weighted=cfg.weighted_cooccurrence)
    scores, _ = pagerank(adjacency, cfg.beta, cfg.max_iterations, cfg.tolerance)
    return scores


def consistency(slot: str, instance: ConceptualizedInstance, ensemble: SimilarityEnsemble) -> float:
    """Faithfulness of a slot to its source text: the max, over candidates
    containing the slot, of sim(candidate type, text)."""
    sims = [
        ensemble.sim(candidate.event_type, instance.expression.text)
        for candidate in instance.candidates
        if slot in candidate.slots
    ]
    if not sims:
        raise ValueError(f"slot {slot!r} does not appear in any candidate")
    return max(sims)


def score(record: SlotRecord, cfg: ScoringConfig = ScoringConfig()) -> float:
    """Combined confidence: (lambda1 * salience + lambda2 * reliability) * consistency."""
    return (cfg.lambda1 * record.salience + cfg.lambda2 * record.reliability) * record.consistency


def select_event_type(
    instance: ConceptualizedInstance, ensemble: SimilarityEnsemble
) -> tuple[str, float]:
    """Top-1 consistent event type among the instance's candidate types.

    Ties break toward the type proposed by more candidates, then
    lexicographically.
    """
    if not instance.candidates:
        raise ValueError("instance has no parsed candidates")
    type_freq = Counter(candidate.event_type for candidate in instance.candidates)
    text = instance.expression.text
    sims = {t: ensemble.sim(t, text) for t in type_freq}
    best = min(sims, key=lambda t: (-sims[t], -type_freq[t], t))
    return best, sims[best]


def structuralize_instance(
    instance: ConceptualizedInstance,
    totals: Mapping[str, int],
    corpus_size: int,
    cfg: ScoringConfig,
    ensemble: SimilarityEnsemble,
) -> StructuredInstance:
    """Score one instance against the frozen global frequency table."""
    slot_set = collect_slot_set(instance)
    reliabilities = reliability(slot_set, cfg)
    records: list[SlotRecord] = []
    for slot in sorted(slot_set.freq):
        partial = SlotRecord(
            slot=slot,
            freq=slot_set.freq[slot],
            salience=salience(slot_set.freq[slot], totals[slot], corpus_size, cfg),
            reliability=reliabilities[slot],
            consistency=consistency(slot, instance, ensemble),
            score=0.0,
        )
        records.append(replace(partial, score=score(partial, cfg)))
    surviving = tuple(r for r in records if r.score >= cfg.threshold)
    event_type, type_consistency = select_event_type(instance, ensemble)
    return StructuredInstance(
        expression=instance.expression,
        event_type=event_type,
        slots=surviving,
        type_consistency=type_consistency,
    )


def structuralize(
    instances: Sequence[ConceptualizedInstance],
    cfg: ScoringConfig = ScoringConfig(),
    ensemble: SimilarityEnsemble | None = None,
) -> list[StructuredInstance]:
    """Two passes: global slot frequencies first, then per-instance scoring.

    Instances are retained even when every slot is filtered out (type-only
    schema).
    """
    ensemble = ensemble or default_ensemble()
    totals, corpus_size = global_slot_frequencies(instances)
    return [
        structuralize_instance(instance, totals, corpus_size, cfg, ensemble)
        for instance in instances
    ]


def structured_to_dict(instance: StructuredInstance) -> dict:
    return {
        "id": instance.expression.id,
        "text": instance.expression.text,
        "type": instance.event_type,
        "type_consistency": instance.type_consistency,
        "slots": [
            {
                "name": r.slot,
                "freq": r.freq,
                "salience": r.salience,
                "reliability": r.reliability,
                "consistency": r.consistency,
                "score": r.score,
            }
            for r in instance.slots
        ],
    }


def structured_from_dict(record: Mapping) -> StructuredInstance:
    expression = EventExpression.from_text(
        id=str(record["id"]), text=record["text"], source=str(record["id"])
    )
    slots = tuple(
        SlotRecord(
            slot=s["name"],
            freq=int(s["freq"]),
            salience=float(s["salience"]),
            reliability=float(s["reliability"]),
            consistency=float(s["consistency"]),
            score=float(s["score"]),
        )
        for s in record["slots"]
    )
    return StructuredInstance(
        expression=expression,
        event_type=record["type"],
        slots=slots,
        type_consistency=float(record["type_consistency"]),
    )
