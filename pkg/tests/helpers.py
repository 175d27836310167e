"""Shared builders for tests: tiny instances and a table-backed similarity."""

from __future__ import annotations

from eventframes.conceptualize import ConceptualizedInstance
from eventframes.corpus import EventExpression
from eventframes.schemas import SchemaCandidate
from eventframes.similarity import SimilarityEnsemble


class TableBackend:
    """Similarity backend with engineered pair scores (identity is always 1)."""

    kind = "table"

    def __init__(self, table: dict[tuple[str, str], float], default: float = 0.0):
        self.table = {frozenset(pair): value for pair, value in table.items()}
        self.default = default

    def score(self, a: str, b: str) -> float:
        if a == b:
            return 1.0
        return self.table.get(frozenset((a, b)), self.default)


def table_ensemble(table: dict[tuple[str, str], float], default: float = 0.0) -> SimilarityEnsemble:
    return SimilarityEnsemble(backends=[TableBackend(table, default)])


def expression(expr_id: str, text: str) -> EventExpression:
    return EventExpression.from_text(expr_id, text, source=expr_id)


def instance(expr_id: str, text: str, candidates) -> ConceptualizedInstance:
    return ConceptualizedInstance(
        expression(expr_id, text),
        tuple(SchemaCandidate.create(t, list(slots)) for t, slots in candidates),
    )
