"""Semantic similarity in [0, 1] as an ensemble of pluggable backends.

Three backend kinds: token/bigram overlap (lexical), synonym-set lookup
(lexicon), and vector cosine (embedding).  Every backend is symmetric, maps
any string pair into [0, 1], and scores identical non-empty strings as 1.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence

import numpy as np

log = logging.getLogger(__name__)

LEXICAL = "lexical"
LEXICON = "lexicon"
EMBEDDING = "embedding"


class SimilarityBackend(Protocol):
    kind: str

    def score(self, a: str, b: str) -> float: ...


def _tokens(text: str) -> list[str]:
    return text.lower().split()


def _bigrams(token: str) -> Counter:
    if len(token) < 2:
        return Counter([token]) if token else Counter()
    return Counter(token[i : i + 2] for i in range(len(token) - 1))


def _dice(a: Counter, b: Counter) -> float:
    total = sum(a.values()) + sum(b.values())
    if total == 0:
        return 0.0
    shared = sum((a & b).values())
    return 2.0 * shared / total


class LexicalBackend:
    """Dice coefficient over token multisets; character bigrams when both
    sides are single tokens.  The dependency-free floor every deployment has."""

    kind = LEXICAL

    def score(self, a: str, b: str) -> float:
        tokens_a, tokens_b = _tokens(a), _tokens(b)
        if not tokens_a or not tokens_b:
            return 0.0
        if len(tokens_a) == 1 and len(tokens_b) == 1:
            return _dice(_bigrams(tokens_a[0]), _bigrams(tokens_b[0]))
        return _dice(Counter(tokens_a), Counter(tokens_b))


class LexiconBackend:
    """Score 1 when the two strings share a synonym set, else fall through to
    the lexical score."""

    kind = LEXICON

    def __init__(self, synonym_sets: Iterable[Iterable[str]]):
        self._set_ids: dict[str, set[int]] = {}
        for set_id, group in enumerate(synonym_sets):
            for member in group:
                key = member.strip().lower()
                if key:
                    self._set_ids.setdefault(key, set()).add(set_id)
        self._fallback = LexicalBackend()

    @classmethod
    def from_file(cls, path: str | Path) -> "LexiconBackend":
        """Load a synonym-set file: one group per line, members tab-separated."""
        groups: list[list[str]] = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                members = [m for m in line.rstrip("\n").split("\t") if m.strip()]
                if members:
                    groups.append(members)
        return cls(groups)

    def score(self, a: str, b: str) -> float:
        key_a, key_b = a.strip().lower(), b.strip().lower()
        if key_a and key_a == key_b:
            return 1.0
        if self._set_ids.get(key_a, set()) & self._set_ids.get(key_b, set()):
            return 1.0
        return self._fallback.score(a, b)


class EmbeddingBackend:
    """Cosine similarity of mean-pooled token vectors, mapped to [0, 1] via
    (1 + cos) / 2.  Pairs with no vector coverage on either side fall back to
    the lexical score and are flagged in diagnostics."""

    kind = EMBEDDING

    def __init__(self, vectors: dict[str, np.ndarray]):
        self._vectors = {k.lower(): np.asarray(v, dtype=float) for k, v in vectors.items()}
        self._fallback = LexicalBackend()
        self.fallback_count = 0

    @classmethod
    def from_file(cls, path: str | Path) -> "EmbeddingBackend":
        """Load a vector table: one "token v1 v2 ... vd" line per token."""
        vectors: dict[str, np.ndarray] = {}
        dim: int | None = None
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, 1):
                parts = line.split()
                if not parts:
                    continue
                token, values = parts[0], parts[1:]
                if dim is None:
                    dim = len(values)
                elif len(values) != dim:
                    raise ValueError(
                        f"{path}:{lineno}: expected {dim} components, got {len(values)}"
                    )
                vectors[token] = np.array([float(v) for v in values])
        return cls(vectors)

    def _pool(self, text: str) -> np.ndarray | None:
        found = [self._vectors[t] for t in _tokens(text) if t in self._vectors]
        if not found:
            return None
        pooled = np.mean(found, axis=0)
        norm = np.linalg.norm(pooled)
        if norm == 0.0:
            return None
        return pooled / norm

    def score(self, a: str, b: str) -> float:
        vec_a, vec_b = self._pool(a), self._pool(b)
        if vec_a is None or vec_b is None:
            self.fallback_count += 1
            log.debug("embedding miss for (%r, %r); lexical fallback", a[:40], b[:40])
            return self._fallback.score(a, b)
        cosine = float(np.clip(np.dot(vec_a, vec_b), -1.0, 1.0))
        return (1.0 + cosine) / 2.0


class EmbeddingServiceBackend(EmbeddingBackend):
    """Embedding backend that fetches vectors from an HTTP service on demand.

    POSTs {"texts": [...]} and expects {"vectors": [[...], ...]}.  Fetched
    vectors are cached for the lifetime of the backend.
    """

    def __init__(self, url: str, fetch: Callable[[list[str]], list[list[float]]] | None = None):
        super().__init__({})
        self.url = url
        self._fetch = fetch or self._http_fetch

    def _http_fetch(self, texts: list[str]) -> list[list[float]]:
        import requests

        response = requests.post(self.url, json={"texts": texts}, timeout=60)
        response.raise_for_status()
        return response.json()["vectors"]

    def _pool(self, text: str) -> np.ndarray | None:
        missing = [t for t in _tokens(text) if t not in self._vectors]
        if missing:
            try:
                for token, vector in zip(missing, self._fetch(missing)):
                    self._vectors[token] = np.asarray(vector, dtype=float)
            except Exception as exc:
                log.warning("embedding service fetch failed: %s", exc)
        return super()._pool(text)


@dataclass
class SimilarityEnsemble:
    """Convex combination of backend scores; the result stays in [0, 1].

    Scores are cached under an order-independent key, which also makes
    sim(a, b) == sim(b, a) bitwise.
    """

    backends: Sequence[SimilarityBackend]
    weights: Sequence[float] | None = None
    _cache: dict[tuple[str, str], float] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self.backends:
            raise ValueError("ensemble needs at least one backend")
        if self.weights is None:
            self.weights = [1.0 / len(self.backends)] * len(self.backends)
        if len(self.weights) != len(self.backends):
            raise ValueError("weights and backends must align")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        total = sum(self.weights)
        if abs(total - 1.0) > 1e-9:
            if total == 0:
                raise ValueError("weights must not all be zero")
            self.weights = [w / total for w in self.weights]

    def sim(self, a: str, b: str) -> float:
        key = (a, b) if a <= b else (b, a)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        value = sum(w * backend.score(*key) for w, backend in zip(self.weights, self.backends))
        value = min(max(value, 0.0), 1.0)
        self._cache[key] = value
        return value

    def sim_slotsets(self, a: Iterable[str], b: Iterable[str]) -> float:
        """Soft best-match average between two slot sets.

        (sum over A of best match in B + sum over B of best match in A)
        divided by |A| + |B|; both sets empty scores 1, exactly one empty 0.
        """
        set_a, set_b = sorted(set(a)), sorted(set(b))
        if not set_a and not set_b:
            return 1.0
        if not set_a or not set_b:
            return 0.0
        forward = sum(max(self.sim(x, y) for y in set_b) for x in set_a)
        backward = sum(max(self.sim(x, y) for x in set_a) for y in set_b)
        return (forward + backward) / (len(set_a) + len(set_b))


def default_ensemble() -> SimilarityEnsemble:
    return SimilarityEnsemble(backends=[LexicalBackend()])
