"""The whole pipeline on a synthetic corpus with a hand-written replay store.

Builds a workspace (corpus, demonstrations, replay store, gold labels, and a
config), runs every stage, and prints the induced schemas and metrics.  No
endpoint is contacted: the replay store answers every prompt.

Run from the repo root:  python3 demos/07_full_pipeline.py
"""

import json
import tempfile
from pathlib import Path

from eventframes.aggregate import aggregated_from_dict, render_aggregated
from eventframes.conceptualize import build_prompt, sample_demonstrations
from eventframes.endpoint import ReplayStore
from eventframes.pipeline import PipelineConfig, read_stage_file, run_stage
from eventframes.schemas import SchemaCandidate, load_demonstrations, render_schema

PLANTED = {
    "attack": ("rebels", ["village", "convoy", "outpost"], ["attacker", "victim", "weapon", "site"]),
    "election": ("voters", ["mayor", "senator", "governor"], ["winner", "rival", "ballot", "margin"]),
    "marriage": ("couples", ["chapel", "garden", "ballroom"], ["bride", "groom", "venue", "officiant"]),
}

DEMOS = [
    {"text": "guards protect museum", "type": "protect", "slots": ["guard", "asset"]},
    {"text": "firms hire engineers", "type": "hire", "slots": ["employer", "employee"]},
    {"text": "students solve puzzles", "type": "solve", "slots": ["solver", "problem"]},
    {"text": "chefs cook dinner", "type": "cook", "slots": ["chef", "dish"]},
]


def build_workspace(root: Path) -> tuple[PipelineConfig, Path]:
    root.mkdir(parents=True)
    demos_path = root / "demos.jsonl"
    demos_path.write_text(
        "".join(json.dumps(d) + "\n" for d in DEMOS), encoding="utf-8"
    )

    rows = []
    index = 0
    for event_type, (agent, objects, slot_pool) in PLANTED.items():
        for i, obj in enumerate(objects):
            slots = [s for j, s in enumerate(slot_pool) if j != i % len(slot_pool)]
            rows.append((f"m{index}", f"{agent} {event_type} {obj}", event_type, slots))
            index += 1

    corpus_path = root / "corpus.jsonl"
    corpus_path.write_text(
        "".join(json.dumps({"id": r[0], "text": r[1]}) + "\n" for r in rows), encoding="utf-8"
    )
    gold_path = root / "gold.jsonl"
    gold_path.write_text(
        "".join(json.dumps({"id": r[0], "type": r[2]}) + "\n" for r in rows), encoding="utf-8"
    )

    # hand-write the replay store: every prompt the run will issue gets a
    # canned completion in the schema surface form
    seed, m, n = 1234, 4, 3
    demos = sample_demonstrations(load_demonstrations(demos_path), m=m, seed=seed)
    store = ReplayStore()
    for _, text, event_type, slots in rows:
        completion = render_schema(SchemaCandidate.create(event_type, slots))
        store.put(build_prompt(demos, text), tuple([completion] * n))
    store_path = root / "replay.jsonl"
    store.save(store_path)

    cfg = PipelineConfig.from_dict(
        {
            "seed": seed,
            "corpus": {"format": "structured-records"},
            "demonstrations": {"path": str(demos_path), "m": m},
            "generation": {"n": n, "replay": str(store_path)},
            "evaluation": {"gold": str(gold_path), "top_k": 15},
        }
    )
    return cfg, corpus_path


with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    cfg, corpus_path = build_workspace(root / "workspace")
    out_dir = root / "out"

    report = run_stage("all", cfg, out_dir, input_path=corpus_path)
    for stage in ("ingest", "conceptualize", "structuralize", "aggregate"):
        print(f"{stage}: {report[stage]}")
    print()

    print("induced schemas:")
    for record in read_stage_file(out_dir / "schemas.jsonl", "aggregate"):
        schema = aggregated_from_dict(record)
        print(" ", render_aggregated(schema))
        print(f"    members: {list(schema.member_ids)}")
    print()

    print("event mention clustering metrics:")
    print(json.dumps(report["evaluate"]["metrics"], indent=2))
