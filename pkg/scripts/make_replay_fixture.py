#!/usr/bin/env python3
"""Build the miniature replay corpus used by the end-to-end tests.

Writes, under tests/data/corpus/: ten canonical receipt documents, the KIE
task definition, the ground truth, a run config, and a replay store with
one canned response per (document x verbalizer x noise model) prompt.

The canned responses are crafted by hand so the corpus scores exactly
20/30 with the type-aware measure: they exercise case-insensitive company
names, cross-format dates, currency sanitization, rejected values,
hallucinated keys, nested objects, multi-object outputs and no-JSON
refusals. Everything is deterministic, so re-running this script is
idempotent.
"""

import json
import sys
from pathlib import Path

from layoutprompt.cli import PipelineConfig
from layoutprompt.ingest import load_canonical
from layoutprompt.llm import LlmRequest, record_run
from layoutprompt.noise import NoiseConfig, NoiseModelId, apply_noise
from layoutprompt.prompts import PromptPattern, TaskKind, TaskRequest, render_prompt
from layoutprompt.verbalize import VerbalizerId, verbalize

CORPUS_DIR = Path(__file__).parent.parent / "tests" / "data" / "corpus"

SEED = 7
MODEL_ID = "fixture-model"
VERBALIZERS = ["PlainText", "SpatialFormat"]
NOISE_MODELS = ["NONE", "SHUFFLE"]

# (doc_id, company line, date line or None, items line, total value)
RECEIPTS = [
    ("doc01", "ACME Markt GmbH", "15/03/2018", "2 x Green Tea 3.00", "12.50"),
    ("doc02", "Beans & Brews", "01/01/2020", "1 x Espresso 3.00", "3.00"),
    ("doc03", "Mega Mart", "07/07/2019", "5 x Widget 19.99", "99.99"),
    ("doc04", "Corner Shop", "31/12/2021", "1 x Newspaper 5.00", "5.00"),
    ("doc05", "Null & Void Ltd", None, "1 x Mystery Item 42.00", "42.00"),
    ("doc06", "Tea House", "05/05/2022", "1 x Oolong 7.77", "7.77"),
    ("doc07", "Paper Trail", "20/06/2018", "3 x Notebook 5.00", "15.00"),
    ("doc08", "Quick Stop", "09/09/2019", "1 x Soda 1.99", "1.99"),
    ("doc09", "Wrong Co", "10/10/2020", "2 x Gadget 10.00", "20.00"),
    ("doc10", "Last Stand", "15/03/2018", "2 x Sandwich 3.00", "6.00"),
]

# Hand-scored against the ground truth below (20 of 30 correct):
#   doc01 3/3  doc02 2/3  doc03 2/3  doc04 2/3  doc05 3/3
#   doc06 0/3  doc07 3/3  doc08 3/3  doc09 0/3  doc10 2/3
RESPONSES = {
    "doc01": '{"company": "acme markt gmbh", "date": "2018-03-15", "total": "RM 12,50"}',
    "doc02": '{"company": "Beans & Brews", "date": "01/01/2020", "total": "3.10"}',
    "doc03": '{"company_name": "Mega Mart", "date": "07/07/2019", "total": "99.99"}',
    "doc04": '{"company": "Corner Shop", "date": "31/12/2021", "total": {"amount": "5.00"}}',
    "doc05": '{"company": "Null & Void Ltd", "date": null, "total": "42.00"}',
    "doc06": "I am sorry, I cannot find these values in the document.",
    "doc07": '{"note": "draft"} {"company": "Paper Trail", "date": "20.06.2018", "total": "15.00"}',
    "doc08": '{"company": "QUICK STOP", "date": "September 9, 2019", "total": "$1.99"}',
    "doc09": '{"company": "Other Co", "date": "10/11/2020", "total": "20"}',
    "doc10": '{"company": "Last Stand", "date": "03/15/2018", "total": "6.00"}',
}

CHAR_W = 10
LINE_H = 20


def words_to_boxes(line: str, top: int) -> list[dict]:
    boxes = []
    x = 20
    for word in line.split(" "):
        width = CHAR_W * len(word)
        boxes.append({"text": word, "box": [x, top, x + width, top + LINE_H]})
        x += width + CHAR_W
    return boxes


def build_document(doc_id, company, date, items, total) -> dict:
    words = []
    y = 20
    for line in filter(None, [company, f"Date: {date}" if date else None, items,
                              f"TOTAL {total}"]):
        words.extend(words_to_boxes(line, y))
        y += 2 * LINE_H
    return {"doc_id": doc_id, "pages": [{"width": 420, "height": y, "words": words}]}


def build_ground_truth() -> dict:
    gt = {}
    for doc_id, company, date, _, total in RECEIPTS:
        gt[doc_id] = {
            "company": {"value": company, "type": "string"},
            "date": {"value": date, "type": "date"},
            "total": {"value": total, "type": "currency"},
        }
    return gt


def main() -> int:
    docs_dir = CORPUS_DIR / "docs"
    docs_dir.mkdir(parents=True, exist_ok=True)

    for receipt in RECEIPTS:
        payload = build_document(*receipt)
        (docs_dir / f"{receipt[0]}.json").write_text(
            json.dumps(payload, indent=1) + "\n", encoding="utf-8")

    (CORPUS_DIR / "tasks.json").write_text(json.dumps({
        "kind": TaskKind.KIE.value,
        "items": ["company", "date", "total"],
        "answer_types": ["string", "date", "currency"],
    }, indent=2) + "\n", encoding="utf-8")

    (CORPUS_DIR / "ground_truth.json").write_text(
        json.dumps(build_ground_truth(), indent=1) + "\n", encoding="utf-8")

    task = TaskRequest(kind=TaskKind.KIE, items=("company", "date", "total"),
                       answer_types=("string", "date", "currency"))

    requests, responses = [], []
    for path in sorted(docs_dir.glob("*.json")):
        doc = load_canonical(path)
        for noise_name in NOISE_MODELS:
            noised = apply_noise(doc, NoiseConfig(
                model=NoiseModelId(noise_name), seed=SEED))
            for verbalizer_name in VERBALIZERS:
                verbalization = verbalize(noised, VerbalizerId(verbalizer_name))
                prompt = render_prompt(verbalization, task, PromptPattern.A)
                requests.append(LlmRequest(
                    prompt=prompt, model_id=MODEL_ID, json_mode=True))
                responses.append(RESPONSES[doc.doc_id])

    store_path = record_run(requests, responses, CORPUS_DIR / "replay_store.jsonl")
    # the run log timestamps would churn the checked-in fixture on every
    # regeneration; strip them so the file is byte-stable
    lines = []
    for line in store_path.read_text(encoding="utf-8").splitlines():
        record = json.loads(line)
        record.pop("timestamp", None)
        lines.append(json.dumps(record, ensure_ascii=False))
    store_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    config = PipelineConfig(
        documents=["tests/data/corpus/docs"],
        dataset="fixture",
        verbalizers=VERBALIZERS,
        noise_models=NOISE_MODELS,
        seed=SEED,
        tasks="tests/data/corpus/tasks.json",
        replay_store="tests/data/corpus/replay_store.jsonl",
        model_id=MODEL_ID,
        output_dir="runs/fixture",
    )
    (CORPUS_DIR / "config.json").write_text(
        json.dumps(config.__dict__, indent=2) + "\n", encoding="utf-8")

    print(f"{len(requests)} prompts -> {store_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
