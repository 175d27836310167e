"""Stage orchestration: configuration, line-oriented intermediates, manifests.

Every stage reads its predecessor's JSONL file and writes its own, so each is
independently re-runnable and diffable.  Stage files are self-describing via
a header line carrying the producing stage, config hash, and format version.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .aggregate import (
    GraphConfig,
    aggregate,
    aggregated_from_dict,
    aggregated_to_dict,
    build_schema_graph,
    cluster_instances,
)
from .conceptualize import ConceptualizedInstance, conceptualize_corpus, sample_demonstrations
from .corpus import CorpusFilterConfig, EventExpression, PLAIN_LINES, load_corpus
from .endpoint import (
    GenerationClient,
    HttpGenerationClient,
    OpenAICompletionsClient,
    RecordingClient,
    ReplayClient,
)
from .evaluation import (
    ClusteringMetrics,
    average_metrics,
    load_gold_mentions,
    mention_harness,
)
from .louvain import louvain
from .schemas import SchemaCandidate, load_demonstrations
from .scoring import ScoringConfig, structured_from_dict, structured_to_dict, structuralize
from .similarity import (
    EmbeddingBackend,
    EmbeddingServiceBackend,
    LexicalBackend,
    LexiconBackend,
    SimilarityEnsemble,
)

log = logging.getLogger(__name__)

FORMAT_VERSION = 1

STAGES = ("ingest", "conceptualize", "structuralize", "aggregate", "evaluate")

STAGE_FILES = {
    "ingest": "expressions.jsonl",
    "conceptualize": "conceptualized.jsonl",
    "structuralize": "structured.jsonl",
    "aggregate": "schemas.jsonl",
    "evaluate": "metrics.json",
}

# stage -> predecessor whose output it consumes
STAGE_INPUTS = {
    "conceptualize": "ingest",
    "structuralize": "conceptualize",
    "aggregate": "structuralize",
    "evaluate": "aggregate",
}


class ConfigError(ValueError):
    pass


class StageInputError(RuntimeError):
    pass


def _from_mapping(cls, data: Mapping, section: str):
    allowed = {f.name for f in fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in config section {section!r}: {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config section {section!r}: {exc}") from exc


@dataclass(frozen=True)
class CorpusSettings:
    format: str = PLAIN_LINES
    max_tokens: int = 256
    max_numeric_ratio: float = 0.25
    language_mode: str = "space-delimited"

    def filter_config(self) -> CorpusFilterConfig:
        return CorpusFilterConfig(
            max_tokens=self.max_tokens,
            max_numeric_ratio=self.max_numeric_ratio,
            language_mode=self.language_mode,
        )


@dataclass(frozen=True)
class DemonstrationSettings:
    path: str | None = None
    m: int = 8


@dataclass(frozen=True)
class GenerationSettings:
    n: int = 3
    max_new_tokens: int = 64
    temperature: float | None = None
    endpoint: str | None = None
    endpoint_style: str = "native"
    replay: str | None = None
    record: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        if self.endpoint_style not in ("native", "openai"):
            raise ValueError(f"unknown endpoint_style: {self.endpoint_style!r}")


@dataclass(frozen=True)
class SimilaritySettings:
    backends: tuple[Mapping, ...] = ({"kind": "lexical"},)
    weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "backends", tuple(dict(b) for b in self.backends))
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))


@dataclass(frozen=True)
class EvaluationSettings:
    gold: str | None = None
    top_k: int = 15
    repeats: int = 1


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 1234
    corpus: CorpusSettings = CorpusSettings()
    demonstrations: DemonstrationSettings = DemonstrationSettings()
    generation: GenerationSettings = GenerationSettings()
    scoring: ScoringConfig = ScoringConfig()
    graph: GraphConfig = GraphConfig()
    similarity: SimilaritySettings = SimilaritySettings()
    evaluation: EvaluationSettings = EvaluationSettings()

    def to_dict(self) -> dict:
        data = asdict(self)
        data["similarity"]["backends"] = [dict(b) for b in self.similarity.backends]
        if self.similarity.weights is not None:
            data["similarity"]["weights"] = list(self.similarity.weights)
        return data

    @classmethod
    def from_dict(cls, data: Mapping) -> "PipelineConfig":
        sections = {
            "corpus": CorpusSettings,
            "demonstrations": DemonstrationSettings,
            "generation": GenerationSettings,
            "scoring": ScoringConfig,
            "graph": GraphConfig,
            "similarity": SimilaritySettings,
            "evaluation": EvaluationSettings,
        }
        unknown = set(data) - set(sections) - {"seed"}
        if unknown:
            raise ConfigError(f"unknown top-level config keys: {sorted(unknown)}")
        kwargs: dict[str, Any] = {"seed": int(data.get("seed", 1234))}
        for name, section_cls in sections.items():
            if name in data:
                kwargs[name] = _from_mapping(section_cls, data[name], name)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_ensemble(settings: SimilaritySettings) -> SimilarityEnsemble:
    backends = []
    for entry in settings.backends:
        kind = entry.get("kind")
        if kind == "lexical":
            backends.append(LexicalBackend())
        elif kind == "lexicon":
            if "path" not in entry:
                raise ConfigError("lexicon backend requires a 'path'")
            backends.append(LexiconBackend.from_file(entry["path"]))
        elif kind == "embedding":
            if entry.get("url"):
                backends.append(EmbeddingServiceBackend(entry["url"]))
            elif entry.get("path"):
                backends.append(EmbeddingBackend.from_file(entry["path"]))
            else:
                raise ConfigError("embedding backend requires a 'path' or 'url'")
        else:
            raise ConfigError(f"unknown similarity backend kind: {kind!r}")
    weights = list(settings.weights) if settings.weights is not None else None
    return SimilarityEnsemble(backends=backends, weights=weights)


def build_client(cfg: PipelineConfig) -> GenerationClient:
    gen = cfg.generation
    if gen.replay and not gen.record:
        if not Path(gen.replay).exists():
            raise StageInputError(f"replay store not found: {gen.replay}")
        return ReplayClient.from_file(gen.replay)
    if gen.endpoint:
        client_cls = OpenAICompletionsClient if gen.endpoint_style == "openai" else HttpGenerationClient
        live: GenerationClient = client_cls(gen.endpoint)
        if gen.record:
            if not gen.replay:
                raise ConfigError("record mode requires a replay store path")
            return RecordingClient.at(live, gen.replay)
        return live
    raise ConfigError("conceptualize needs an endpoint or a replay store")


# --------------------------------------------------------------------------
# Stage file IO
# --------------------------------------------------------------------------


def _dumps(record: Mapping) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False)


def write_stage_file(
    path: Path, stage: str, config_hash: str, records: Iterable[Mapping]
) -> int:
    header = {"stage": stage, "config_hash": config_hash, "format_version": FORMAT_VERSION}
    count = 0
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(_dumps(header) + "\n")
        for record in records:
            handle.write(_dumps(record) + "\n")
            count += 1
    return count


def read_stage_file(path: Path, expected_stage: str) -> list[dict]:
    if not path.exists():
        raise StageInputError(
            f"missing {path.name}; run the {expected_stage!r} stage first"
        )
    with open(path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise StageInputError(f"{path} is empty; rerun the {expected_stage!r} stage")
    header = json.loads(lines[0])
    if header.get("stage") != expected_stage:
        raise StageInputError(
            f"{path} was written by stage {header.get('stage')!r}, expected {expected_stage!r}"
        )
    if header.get("format_version") != FORMAT_VERSION:
        raise StageInputError(f"{path} has format_version {header.get('format_version')}")
    return [json.loads(line) for line in lines[1:] if line.strip()]


def _file_hash(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _manifest_path(out_dir: Path, stage: str) -> Path:
    return out_dir / f"{stage}.manifest.json"


def _write_manifest(
    out_dir: Path,
    stage: str,
    config_hash: str,
    inputs: Sequence[Path],
    outputs: Sequence[Path],
    counts: Mapping,
    wall_time: float,
) -> dict:
    manifest = {
        "stage": stage,
        "config_hash": config_hash,
        "inputs": {str(p): _file_hash(p) for p in inputs},
        "outputs": {str(p): _file_hash(p) for p in outputs},
        "counts": dict(counts),
        "wall_time_s": round(wall_time, 6),
    }
    with open(_manifest_path(out_dir, stage), "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return manifest


def _up_to_date(out_dir: Path, stage: str, config_hash: str, inputs: Sequence[Path]) -> bool:
    manifest_path = _manifest_path(out_dir, stage)
    if not manifest_path.exists():
        return False
    try:
        with open(manifest_path, encoding="utf-8") as handle:
            manifest = json.load(handle)
    except json.JSONDecodeError:
        return False
    if manifest.get("config_hash") != config_hash:
        return False
    recorded_inputs = manifest.get("inputs", {})
    if set(recorded_inputs) != {str(p) for p in inputs}:
        return False
    for path_str, digest in recorded_inputs.items():
        path = Path(path_str)
        if not path.exists() or _file_hash(path) != digest:
            return False
    for path_str, digest in manifest.get("outputs", {}).items():
        path = Path(path_str)
        if not path.exists() or _file_hash(path) != digest:
            return False
    return True


# --------------------------------------------------------------------------
# Stages
# --------------------------------------------------------------------------


def _load_expressions(out_dir: Path, cfg: PipelineConfig) -> list[EventExpression]:
    records = read_stage_file(out_dir / STAGE_FILES["ingest"], "ingest")
    return [
        EventExpression.from_text(
            r["id"], r["text"], r["source"], language_mode=cfg.corpus.language_mode
        )
        for r in records
    ]


def _load_conceptualized(out_dir: Path, cfg: PipelineConfig) -> list[ConceptualizedInstance]:
    records = read_stage_file(out_dir / STAGE_FILES["conceptualize"], "conceptualize")
    instances = []
    for r in records:
        expression = EventExpression.from_text(
            r["id"], r["text"], r["source"], language_mode=cfg.corpus.language_mode
        )
        candidates = tuple(
            SchemaCandidate(event_type=c["type"], slots=tuple(c["slots"]))
            for c in r["candidates"]
        )
        instances.append(
            ConceptualizedInstance(expression, candidates, parse_failures=r["parse_failures"])
        )
    return instances


def _stage_ingest(cfg: PipelineConfig, input_path: Path | None, out_dir: Path) -> dict:
    if input_path is None:
        raise StageInputError("ingest needs an --input corpus file")
    if not input_path.exists():
        raise StageInputError(f"corpus file not found: {input_path}")
    expressions, report = load_corpus(input_path, cfg.corpus.format, cfg.corpus.filter_config())
    write_stage_file(
        out_dir / STAGE_FILES["ingest"],
        "ingest",
        cfg.config_hash(),
        ({"id": e.id, "text": e.text, "source": e.source} for e in expressions),
    )
    return report.as_dict()


def _stage_conceptualize(cfg: PipelineConfig, out_dir: Path) -> dict:
    if not cfg.demonstrations.path:
        raise ConfigError("conceptualize needs a demonstrations path in the config")
    pool = load_demonstrations(cfg.demonstrations.path)
    demos = sample_demonstrations(pool, cfg.demonstrations.m, cfg.seed)
    expressions = _load_expressions(out_dir, cfg)
    client = build_client(cfg)
    instances, report = conceptualize_corpus(
        client,
        demos,
        expressions,
        n=cfg.generation.n,
        max_new_tokens=cfg.generation.max_new_tokens,
        temperature=cfg.generation.temperature,
        workers=cfg.generation.workers,
    )
    if isinstance(client, RecordingClient):
        client.save()
    write_stage_file(
        out_dir / STAGE_FILES["conceptualize"],
        "conceptualize",
        cfg.config_hash(),
        (
            {
                "id": inst.expression.id,
                "text": inst.expression.text,
                "source": inst.expression.source,
                "candidates": [
                    {"type": c.event_type, "slots": list(c.slots)} for c in inst.candidates
                ],
                "parse_failures": inst.parse_failures,
            }
            for inst in instances
        ),
    )
    return report.as_dict()


def _stage_structuralize(cfg: PipelineConfig, out_dir: Path) -> dict:
    instances = _load_conceptualized(out_dir, cfg)
    ensemble = build_ensemble(cfg.similarity)
    structured = structuralize(instances, cfg.scoring, ensemble)
    write_stage_file(
        out_dir / STAGE_FILES["structuralize"],
        "structuralize",
        cfg.config_hash(),
        (structured_to_dict(s) for s in structured),
    )
    return {
        "instances": len(structured),
        "slots_kept": sum(len(s.slots) for s in structured),
        "type_only_instances": sum(1 for s in structured if not s.slots),
    }


def _stage_aggregate(cfg: PipelineConfig, out_dir: Path) -> dict:
    records = read_stage_file(out_dir / STAGE_FILES["structuralize"], "structuralize")
    structured = [structured_from_dict(r) for r in records]
    if not structured:
        raise StageInputError("no structured instances to aggregate")
    ensemble = build_ensemble(cfg.similarity)
    assignment = cluster_instances(structured, ensemble, cfg.graph, cfg.seed)
    schemas = aggregate(structured, assignment, ensemble, cfg.graph, cfg.seed)
    write_stage_file(
        out_dir / STAGE_FILES["aggregate"],
        "aggregate",
        cfg.config_hash(),
        (aggregated_to_dict(s) for s in schemas),
    )
    return {
        "instances": len(structured),
        "clusters": len(schemas),
        "modularity_levels": list(assignment.modularity_levels),
    }


def _evaluate_metrics(cfg: PipelineConfig, out_dir: Path) -> dict:
    if not cfg.evaluation.gold:
        raise ConfigError("evaluate needs a gold mentions path in the config")
    gold = load_gold_mentions(cfg.evaluation.gold)
    schema_records = read_stage_file(out_dir / STAGE_FILES["aggregate"], "aggregate")
    schemas = [aggregated_from_dict(r) for r in schema_records]
    predicted = {
        member: label for label, schema in enumerate(schemas) for member in schema.member_ids
    }

    if cfg.evaluation.repeats <= 1:
        metrics = mention_harness(gold, predicted, cfg.evaluation.top_k)
        return {"repeats": 1, "metrics": metrics.as_dict()}

    # Re-cluster with varied seeds and report the averaged result.
    structured = [
        structured_from_dict(r)
        for r in read_stage_file(out_dir / STAGE_FILES["structuralize"], "structuralize")
    ]
    ensemble = build_ensemble(cfg.similarity)
    graph = build_schema_graph(structured, ensemble, cfg.graph)
    ids = [s.expression.id for s in structured]
    runs: list[ClusteringMetrics] = []
    for repeat in range(cfg.evaluation.repeats):
        assignment = louvain(graph.weights, seed=cfg.seed + repeat, keys=ids)
        assignment = replace(assignment, ids=tuple(ids))
        runs.append(mention_harness(gold, assignment, cfg.evaluation.top_k))
    return {
        "repeats": cfg.evaluation.repeats,
        "metrics": average_metrics(runs).as_dict(),
        "runs": [m.as_dict() for m in runs],
    }


def _stage_evaluate(cfg: PipelineConfig, out_dir: Path) -> dict:
    report = _evaluate_metrics(cfg, out_dir)
    payload = dict(report)
    payload["stage"] = "evaluate"
    payload["config_hash"] = cfg.config_hash()
    payload["format_version"] = FORMAT_VERSION
    path = out_dir / STAGE_FILES["evaluate"]
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(_dumps(payload) + "\n")
    return report


def _stage_io(
    stage: str, cfg: PipelineConfig, input_path: Path | None, out_dir: Path
) -> tuple[list[Path], list[Path]]:
    """Input and output files of one stage, for manifests and staleness checks."""
    inputs: list[Path] = []
    if stage == "ingest":
        if input_path is not None:
            inputs.append(input_path)
    else:
        predecessor = STAGE_INPUTS[stage]
        inputs.append(out_dir / STAGE_FILES[predecessor])
    if stage == "conceptualize":
        if cfg.demonstrations.path:
            inputs.append(Path(cfg.demonstrations.path))
        if cfg.generation.replay and Path(cfg.generation.replay).exists():
            inputs.append(Path(cfg.generation.replay))
    if stage == "evaluate":
        if cfg.evaluation.gold:
            inputs.append(Path(cfg.evaluation.gold))
        if cfg.evaluation.repeats > 1:
            inputs.append(out_dir / STAGE_FILES["structuralize"])
    outputs = [out_dir / STAGE_FILES[stage]]
    return inputs, outputs


_STAGE_RUNNERS = {
    "ingest": lambda cfg, input_path, out_dir: _stage_ingest(cfg, input_path, out_dir),
    "conceptualize": lambda cfg, input_path, out_dir: _stage_conceptualize(cfg, out_dir),
    "structuralize": lambda cfg, input_path, out_dir: _stage_structuralize(cfg, out_dir),
    "aggregate": lambda cfg, input_path, out_dir: _stage_aggregate(cfg, out_dir),
    "evaluate": lambda cfg, input_path, out_dir: _stage_evaluate(cfg, out_dir),
}


def run_stage(
    stage: str,
    cfg: PipelineConfig,
    out_dir: str | Path,
    input_path: str | Path | None = None,
    force: bool = False,
) -> dict:
    """Run one stage (or "all"), skipping work whose inputs are unchanged.

    Returns a report dict; for "all" the reports are keyed by stage name.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    input_path = Path(input_path) if input_path is not None else None

    if stage == "all":
        stages = list(STAGES)
        if not cfg.evaluation.gold:
            stages.remove("evaluate")
        return {s: run_stage(s, cfg, out_dir, input_path, force=force) for s in stages}

    if stage not in STAGES:
        raise ConfigError(f"unknown stage: {stage!r}")

    config_hash = cfg.config_hash()
    inputs, outputs = _stage_io(stage, cfg, input_path, out_dir)
    for path in inputs:
        if path.exists():
            continue
        for producing_stage, filename in STAGE_FILES.items():
            if path == out_dir / filename:
                raise StageInputError(
                    f"missing {path.name}; run the {producing_stage!r} stage first"
                )
        raise StageInputError(f"missing input file for stage {stage!r}: {path}")

    if not force and _up_to_date(out_dir, stage, config_hash, inputs):
        log.info("stage %s is up-to-date; skipping", stage)
        return {"status": "up-to-date", "stage": stage}

    started = time.monotonic()
    report = _STAGE_RUNNERS[stage](cfg, input_path, out_dir)
    elapsed = time.monotonic() - started
    # record mode may have created the replay store; refresh input list
    inputs, outputs = _stage_io(stage, cfg, input_path, out_dir)
    _write_manifest(out_dir, stage, config_hash, inputs, outputs, report, elapsed)
    return report
