"""Turn expressions into schema candidates via in-context generation.

The prompt is a block of "<text> SEP <schema>" demonstration lines followed by
the target text and a trailing separator the endpoint must complete.
"""

from __future__ import annotations

import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .corpus import EventExpression
from .endpoint import GenerationClient, GenerationRequest, TransportError
from .schemas import Demonstration, SchemaCandidate, SchemaParseError, parse_schema, render_schema

log = logging.getLogger(__name__)

SEPARATOR = "→"  # →


@dataclass(frozen=True)
class ConceptualizedInstance:
    """An expression with its parsed schema candidates."""

    expression: EventExpression
    candidates: tuple[SchemaCandidate, ...]
    parse_failures: int = 0


@dataclass
class ConceptualizeReport:
    instances: int = 0
    dropped: int = 0
    transport_failures: int = 0
    parse_failures: int = 0

    def as_dict(self) -> dict:
        return {
            "instances": self.instances,
            "dropped": self.dropped,
            "transport_failures": self.transport_failures,
            "parse_failures": self.parse_failures,
        }


class ConfigurationError(ValueError):
    pass


def sample_demonstrations(
    pool: Sequence[Demonstration], m: int, seed: int
) -> list[Demonstration]:
    """Draw m distinct demonstrations uniformly without replacement.

    Deterministic for a fixed (pool order, m, seed).
    """
    if m < 1:
        raise ConfigurationError(f"m must be >= 1, got {m}")
    if len(pool) < m:
        raise ConfigurationError(
            f"demonstration pool has {len(pool)} entries but m={m} were requested"
        )
    return random.Random(seed).sample(list(pool), m)


def _clean(text: str) -> str:
    # The separator must appear exactly once per prompt line, so any literal
    # occurrence inside a text is rewritten.
    return text.replace(SEPARATOR, "->").replace("\n", " ").strip()


def build_prompt(demos: Sequence[Demonstration], text: str) -> str:
    """One "<text> SEP <rendered schema>" line per demonstration, then the
    target text followed by the separator and a single space."""
    if not demos:
        raise ValueError("at least one demonstration is required")
    lines = [f"{_clean(d.text)} {SEPARATOR} {render_schema(d.schema)}" for d in demos]
    lines.append(f"{_clean(text)} {SEPARATOR} ")
    return "\n".join(lines)


def conceptualize_expression(
    client: GenerationClient,
    demos: Sequence[Demonstration],
    expression: EventExpression,
    n: int,
    max_new_tokens: int = 64,
    temperature: float | None = None,
) -> ConceptualizedInstance | None:
    """Generate and parse n candidates for one expression.

    Completions that fail to parse are dropped individually; the instance is
    dropped (None) only when every completion fails or transport gives out.
    """
    if temperature is None:
        temperature = 0.7 if n > 1 else 0.0
    request = GenerationRequest(
        prompt=build_prompt(demos, expression.text),
        n=n,
        max_new_tokens=max_new_tokens,
        temperature=temperature,
    )
    try:
        response = client.generate(request)
    except TransportError as exc:
        log.warning("expression %s dropped: %s", expression.id, exc)
        return None

    candidates: list[SchemaCandidate] = []
    failures = 0
    for completion in response.completions[:n]:
        try:
            candidates.append(parse_schema(completion))
        except SchemaParseError:
            failures += 1
    if not candidates:
        return ConceptualizedInstance(expression, (), parse_failures=failures)
    return ConceptualizedInstance(expression, tuple(candidates), parse_failures=failures)


def conceptualize_corpus(
    client: GenerationClient,
    demos: Sequence[Demonstration],
    corpus: Sequence[EventExpression],
    n: int = 3,
    max_new_tokens: int = 64,
    temperature: float | None = None,
    workers: int = 1,
) -> tuple[list[ConceptualizedInstance], ConceptualizeReport]:
    """Conceptualize every expression, preserving corpus order.

    Up to `workers` generation requests are in flight at once; instances whose
    every completion fails (or whose request ultimately fails) are dropped and
    counted in the report.
    """
    report = ConceptualizeReport()

    def run(expression: EventExpression) -> ConceptualizedInstance | None:
        return conceptualize_expression(
            client, demos, expression, n, max_new_tokens=max_new_tokens, temperature=temperature
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, corpus))
    else:
        results = [run(e) for e in corpus]

    instances: list[ConceptualizedInstance] = []
    for result in results:
        if result is None:
            report.dropped += 1
            report.transport_failures += 1
            continue
        report.parse_failures += result.parse_failures
        if not result.candidates:
            report.dropped += 1
            log.warning("expression %s dropped: all completions malformed", result.expression.id)
            continue
        instances.append(result)
        report.instances += 1
    return instances, report
