"""Command-line pipeline runner.

Subcommands mirror the pipeline stages: ``verbalize`` (inspect document
representations), ``noise`` (apply a noise model and dump the result),
``run`` (documents -> prompts -> model -> extractions, resumable),
``evaluate`` (extractions + ground truth -> report) and ``tokens``
(per-strategy token overhead). Exit codes: 0 success, 1 run finished with
per-document failures, 2 usage or input error.

Configuration for ``run`` is a single JSON file; command-line flags
override file values. Every artifact records the toolkit version, a hash
of the effective config and the seed. Timestamps only ever appear in the
response log, so re-running against a replay store is byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from . import __version__
from .errors import EmptyEvaluation, LayoutPromptError, ParseError
from .extraction import ExtractionResult, extract_answers
from .ingest import canonical_payload, load_canonical, load_due, save_canonical
from .llm import (
    API_BASE_ENV,
    API_KEY_ENV,
    HttpBackend,
    LlmRequest,
    ReplayBackend,
    ReplayStore,
    RunLog,
    request_fingerprint,
)
from .metrics import AnswerType, EvalRecord, aggregate, make_record
from .model import OcrDocument
from .noise import NoiseConfig, NoiseModelId, apply_noise
from .prompts import PromptPattern, TaskKind, TaskRequest, expected_answer_schema, render_prompt
from .tokens import ApproximateCounter, SubprocessCounter, corpus_overhead
from .verbalize import VerbalizerId, verbalize

EXIT_OK = 0
EXIT_RUN_FAILURES = 1
EXIT_USAGE = 2


# ---------------------------------------------------------------------------
# configuration


@dataclass
class PipelineConfig:
    """Everything one ``run`` needs; serializable to/from a JSON file."""

    documents: list[str] = field(default_factory=list)
    input_format: str = "auto"
    dataset: str = "default"
    verbalizers: list[str] = field(
        default_factory=lambda: [v.value for v in VerbalizerId if v is not VerbalizerId.PlainHTML]
    )
    noise_models: list[str] = field(default_factory=lambda: ["NONE"])
    seed: int = 0
    translate_max: int = 20
    min_char_width: float | None = None
    min_char_height: float | None = None
    tasks: str = ""
    pattern: str = "A"
    backend_mode: str = "replay"
    replay_store: str = ""
    model_id: str = "offline"
    json_mode: bool = True
    wrapper: str = "none"
    requests_per_minute: float = 0.0
    timeout: float = 60.0
    max_attempts: int = 3
    workers: int = 1
    output_dir: str = "runs/out"

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"config {path}: {exc}") from exc
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ParseError(f"config {path}: unknown fields {sorted(unknown)}")
        return cls(**raw)

    def hash(self) -> str:
        canonical = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def provenance(config_hash: str, seed: int) -> dict:
    return {"toolkit": "layoutprompt", "version": __version__, "config_hash": config_hash, "seed": seed}


# ---------------------------------------------------------------------------
# input loading


def detect_format(path: Path) -> str:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if isinstance(data, dict) and "pages" in data:
        return "canonical"
    if isinstance(data, dict) and "words" in data:
        return "due"
    raise ParseError(f"{path}: neither canonical ('pages') nor DUE ('words') layout")


def load_document(path: str | Path, input_format: str = "auto") -> OcrDocument:
    path = Path(path)
    fmt = detect_format(path) if input_format == "auto" else input_format
    if fmt == "canonical":
        return load_canonical(path)
    if fmt == "due":
        return load_due(path)
    raise ParseError(f"unknown input format {input_format!r}")


def collect_document_paths(specs: list[str]) -> list[Path]:
    paths: list[Path] = []
    for spec in specs:
        p = Path(spec)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.json")))
        elif p.exists():
            paths.append(p)
        else:
            raise ParseError(f"input path does not exist: {p}")
    return paths


def load_tasks(path: str | Path) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"tasks {path}: {exc}") from exc
    if "kind" not in data:
        raise ParseError(f"tasks {path}: missing 'kind'")
    return data


def task_for_doc(tasks: dict, doc_id: str) -> TaskRequest:
    kind = TaskKind(tasks["kind"])
    per_doc = tasks.get("per_doc", {})
    entry = per_doc.get(doc_id)
    if entry is None:
        items = tasks.get("items")
        answer_types = tasks.get("answer_types")
    else:
        items = entry.get("items")
        answer_types = entry.get("answer_types")
    if not items:
        raise ParseError(f"no task items for document {doc_id!r}")
    return TaskRequest(
        kind=kind,
        items=tuple(items),
        answer_types=tuple(answer_types) if answer_types else None,
    )


# ---------------------------------------------------------------------------
# verbalize / noise commands


def _noise_config(args) -> NoiseConfig:
    # the verbalize command calls the model --noise, the noise command --model
    model_name = getattr(args, "noise", None) or args.model
    return NoiseConfig(
        model=NoiseModelId(model_name),
        seed=args.seed,
        translate_max=args.translate_max,
        min_char_width=args.min_char_width,
        min_char_height=args.min_char_height,
    )


def cmd_verbalize(args) -> int:
    doc = load_document(args.input, args.format)
    if args.noise != "NONE":
        doc = apply_noise(doc, _noise_config(args))
    names = [v.value for v in VerbalizerId] if args.all else [args.verbalizer]
    chunks = []
    for name in names:
        verbalizer = VerbalizerId(name)
        if verbalizer is VerbalizerId.PlainHTML and doc.html is None:
            if args.all:
                continue
            raise ParseError(f"document {doc.doc_id!r} has no attached HTML")
        text = verbalize(doc, verbalizer).text
        chunks.append(f"### {name}\n{text}" if args.all else text)
    output = "\n\n".join(chunks)
    if args.output:
        Path(args.output).write_text(output + "\n", encoding="utf-8")
    else:
        print(output)
    return EXIT_OK


def cmd_noise(args) -> int:
    doc = load_document(args.input, args.format)
    noised = apply_noise(doc, _noise_config(args))
    if args.output:
        save_canonical(noised, args.output)
    else:
        print(json.dumps(canonical_payload(noised), ensure_ascii=False, indent=1))
    return EXIT_OK


# ---------------------------------------------------------------------------
# run command


def _build_backend(cfg: PipelineConfig):
    if cfg.backend_mode == "replay":
        if not cfg.replay_store:
            raise ParseError("replay backend needs 'replay_store' in the config")
        if not Path(cfg.replay_store).exists():
            raise ParseError(f"replay store does not exist: {cfg.replay_store}")
        return ReplayBackend(ReplayStore.load(cfg.replay_store))
    if cfg.backend_mode == "live":
        import os

        if not os.environ.get(API_BASE_ENV) or not os.environ.get(API_KEY_ENV):
            raise ParseError(
                f"live backend needs {API_BASE_ENV} and {API_KEY_ENV} in the environment"
            )
        return HttpBackend(
            timeout=cfg.timeout,
            max_attempts=cfg.max_attempts,
            requests_per_minute=cfg.requests_per_minute,
        )
    raise ParseError(f"unknown backend mode {cfg.backend_mode!r}")


def _prompt_filename(doc_id: str, verbalizer: str, noise_model: str) -> str:
    safe = lambda s: "".join(c if c.isalnum() or c in "-_" else "_" for c in s)
    return f"{safe(doc_id)}__{verbalizer}__{noise_model}.txt"


def _run_document(cfg, path, tasks, backend, log, seen, prompt_dir):
    """The full (verbalizer x noise) matrix for one document.

    Pure apart from the prompt files and log appends, so documents can run
    on parallel workers; outputs are collected in document order either way.
    """
    records: list[dict] = []
    failures: list[dict] = []
    prompt_fingerprints: dict[str, str] = {}
    try:
        doc = load_document(path, cfg.input_format)
        task = task_for_doc(tasks, doc.doc_id)
        schema = expected_answer_schema(task)
    except LayoutPromptError as exc:
        return records, [{"document": str(path), "error": str(exc)}], prompt_fingerprints

    for verbalizer_name in cfg.verbalizers:
        for noise_name in cfg.noise_models:
            try:
                record = _run_one(
                    cfg, doc, task, schema, verbalizer_name, noise_name,
                    backend, log, seen, prompt_dir, prompt_fingerprints,
                )
                records.append(record)
            except LayoutPromptError as exc:
                failures.append(
                    {
                        "document": doc.doc_id,
                        "verbalizer": verbalizer_name,
                        "noise_model": noise_name,
                        "error": str(exc),
                    }
                )
    return records, failures, prompt_fingerprints


def run_pipeline(cfg: PipelineConfig) -> tuple[int, list[dict]]:
    """Execute the full matrix; returns (n_failures, extraction records)."""
    backend = _build_backend(cfg)
    tasks = load_tasks(cfg.tasks)
    doc_paths = collect_document_paths(cfg.documents)
    if not doc_paths:
        raise ParseError("no input documents")

    out_dir = Path(cfg.output_dir)
    prompt_dir = out_dir / "prompts"
    prompt_dir.mkdir(parents=True, exist_ok=True)
    log = RunLog(out_dir / "responses.jsonl")
    seen = ReplayStore.load(log.path) if log.path.exists() else ReplayStore()

    records: list[dict] = []
    failures: list[dict] = []
    prompt_manifest: dict[str, str] = {}

    if cfg.workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [
                pool.submit(_run_document, cfg, path, tasks, backend, log, seen,
                            prompt_dir)
                for path in doc_paths
            ]
            outcomes = [future.result() for future in futures]
    else:
        outcomes = [
            _run_document(cfg, path, tasks, backend, log, seen, prompt_dir)
            for path in doc_paths
        ]

    for doc_records, doc_failures, doc_fingerprints in outcomes:
        records.extend(doc_records)
        failures.extend(doc_failures)
        prompt_manifest.update(doc_fingerprints)

    meta = provenance(cfg.hash(), cfg.seed)
    with (out_dir / "extractions.jsonl").open("w", encoding="utf-8") as handle:
        handle.write(json.dumps({"meta": meta}, ensure_ascii=False) + "\n")
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    (prompt_dir / "manifest.json").write_text(
        json.dumps({"meta": meta, "files": prompt_manifest}, indent=2, sort_keys=True)
        + "\n",
        encoding="utf-8",
    )
    if failures:
        with (out_dir / "errors.jsonl").open("w", encoding="utf-8") as handle:
            handle.write(json.dumps({"meta": meta}, ensure_ascii=False) + "\n")
            for failure in failures:
                handle.write(json.dumps(failure, ensure_ascii=False) + "\n")
    return len(failures), records


def _run_one(
    cfg, doc, task, schema, verbalizer_name, noise_name,
    backend, log, seen, prompt_dir, prompt_manifest,
) -> dict:
    noise_cfg = NoiseConfig(
        model=NoiseModelId(noise_name),
        seed=cfg.seed,
        translate_max=cfg.translate_max,
        min_char_width=cfg.min_char_width,
        min_char_height=cfg.min_char_height,
    )
    noised = apply_noise(doc, noise_cfg)
    verbalization = verbalize(noised, VerbalizerId(verbalizer_name))
    prompt = render_prompt(verbalization, task, PromptPattern(cfg.pattern))

    filename = _prompt_filename(doc.doc_id, verbalizer_name, noise_name)
    (prompt_dir / filename).write_text(prompt, encoding="utf-8")

    req = LlmRequest(
        prompt=prompt,
        model_id=cfg.model_id,
        json_mode=cfg.json_mode,
        wrapper=cfg.wrapper,
    )
    fp = request_fingerprint(req)
    prompt_manifest[filename] = fp
    if fp in seen:
        response = seen.get(fp)
    else:
        response = backend.complete(req)
        log.append(req, response)

    result: ExtractionResult = extract_answers(response, schema.keys)
    return {
        "doc_id": doc.doc_id,
        "dataset": cfg.dataset,
        "task_kind": task.kind.value,
        "pattern": cfg.pattern,
        "verbalizer": verbalizer_name,
        "noise_model": noise_name,
        "fingerprint": fp,
        **result.to_record(),
    }


def cmd_run(args) -> int:
    cfg = PipelineConfig.from_file(args.config)
    overrides = {}
    for name in ("output_dir", "pattern", "seed", "dataset"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if overrides:
        cfg = replace(cfg, **overrides)
    n_failures, records = run_pipeline(cfg)
    print(f"{len(records)} extraction records -> {cfg.output_dir}/extractions.jsonl")
    if n_failures:
        print(f"{n_failures} failures -> {cfg.output_dir}/errors.jsonl", file=sys.stderr)
        return EXIT_RUN_FAILURES
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluate command


def read_extractions(path: str | Path) -> tuple[dict, list[dict]]:
    meta: dict = {}
    records: list[dict] = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ParseError(f"extractions {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{lineno}: invalid JSON line") from exc
        if "meta" in record and "answers" not in record:
            meta = record["meta"]
        else:
            records.append(record)
    return meta, records


def load_ground_truth(path: str | Path) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"ground truth {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"ground truth {path}: top level must map doc_id to items")
    return data


def build_eval_records(extractions: list[dict], ground_truth: dict) -> list[EvalRecord]:
    missing = sorted({r["doc_id"] for r in extractions} - set(ground_truth))
    if missing:
        raise ParseError(
            "doc_ids missing from ground truth: " + ", ".join(missing)
        )
    records: list[EvalRecord] = []
    for extraction in extractions:
        gt_items = ground_truth[extraction["doc_id"]]
        for key, prediction in extraction["answers"].items():
            entry = gt_items.get(key, {})
            records.append(
                make_record(
                    item_key=key,
                    prediction=prediction,
                    gt_value=entry.get("value"),
                    answer_type=AnswerType(entry.get("type", "string")),
                    doc_id=extraction["doc_id"],
                    dataset=extraction.get("dataset", ""),
                    verbalizer=extraction.get("verbalizer", ""),
                    noise_model=extraction.get("noise_model", ""),
                )
            )
    return records


def _grid_rows(records: list[EvalRecord], metric: str, empty_ok: bool) -> list[dict]:
    cells: dict[tuple[str, str, str], list[EvalRecord]] = {}
    for record in records:
        cells.setdefault(
            (record.dataset, record.verbalizer, record.noise_model), []
        ).append(record)
    rows = []
    for (dataset, verbalizer, noise_model), group in sorted(cells.items()):
        sub = aggregate(group, metric=metric, empty_pair_is_correct=empty_ok)
        rows.append(
            {
                "dataset": dataset,
                "verbalizer": verbalizer,
                "noise_model": noise_model,
                "n": len(group),
                "score": round(sub["overall"], 6),
                "best": "",
            }
        )
    # Mark the best verbalization strategy per (dataset, noise model).
    best: dict[tuple[str, str], float] = {}
    for row in rows:
        key = (row["dataset"], row["noise_model"])
        best[key] = max(best.get(key, 0.0), row["score"])
    for row in rows:
        if row["score"] == best[(row["dataset"], row["noise_model"])]:
            row["best"] = "*"
    return rows


def cmd_evaluate(args) -> int:
    meta, extractions = read_extractions(args.extractions)
    ground_truth = load_ground_truth(args.ground_truth)
    if not extractions:
        raise EmptyEvaluation("extraction file holds no records")
    records = build_eval_records(extractions, ground_truth)
    metric = {"em_f1": "f1"}.get(args.metric, args.metric)
    empty_ok = not args.no_empty_correct
    report = aggregate(records, metric=metric, empty_pair_is_correct=empty_ok)
    report_meta = provenance(meta.get("config_hash", ""), meta.get("seed", 0))

    out_dir = Path(args.output_dir or Path(args.extractions).parent)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {"meta": report_meta, **report}
    (out_dir / "report.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    rows = _grid_rows(records, metric, empty_ok)
    with (out_dir / "report.csv").open("w", encoding="utf-8", newline="") as handle:
        handle.write(
            f"# layoutprompt={__version__} config_hash={report_meta['config_hash']} "
            f"seed={report_meta['seed']}\n"
        )
        writer = csv.DictWriter(
            handle, fieldnames=["dataset", "verbalizer", "noise_model", "n", "score", "best"]
        )
        writer.writeheader()
        writer.writerows(rows)

    print(f"{metric} overall: {report['overall']:.4f} over {report['n_records']} records")
    print(f"report -> {out_dir / 'report.json'}, {out_dir / 'report.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# tokens command


def cmd_tokens(args) -> int:
    paths = collect_document_paths(args.corpus)
    docs = [load_document(p, args.format) for p in paths]
    if args.counter == "adapter":
        if not args.adapter_cmd:
            raise ParseError("--counter adapter needs --adapter-cmd")
        counter = SubprocessCounter(args.adapter_cmd.split())
    else:
        counter = ApproximateCounter()
    try:
        report = corpus_overhead(docs, counter)
    finally:
        if isinstance(counter, SubprocessCounter):
            counter.close()

    ranking = report.ranking
    rows = [
        {"verbalizer": name, "mean_ratio": round(report.mean_ratio[name], 6), "rank": ranking.index(name) + 1}
        for name in ranking
    ]
    lines = ["verbalizer,mean_ratio,rank"]
    lines += [f"{r['verbalizer']},{r['mean_ratio']},{r['rank']}" for r in rows]
    output = "\n".join(lines)
    if args.output:
        Path(args.output).write_text(output + "\n", encoding="utf-8")
    else:
        print(output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="layoutprompt",
        description="Layout-enriched document verbalization and evaluation pipeline",
    )
    parser.add_argument("--version", action="version", version=f"layoutprompt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verbalize", help="print a document's text representation")
    p.add_argument("input")
    p.add_argument("--format", choices=["auto", "canonical", "due"], default="auto")
    p.add_argument("--verbalizer", choices=[v.value for v in VerbalizerId], default="PlainText")
    p.add_argument("--all", action="store_true", help="print every strategy under a header")
    p.add_argument("--noise", choices=[m.value for m in NoiseModelId], default="NONE")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--translate-max", type=int, default=20, dest="translate_max")
    p.add_argument("--min-char-width", type=float, default=None, dest="min_char_width")
    p.add_argument("--min-char-height", type=float, default=None, dest="min_char_height")
    p.add_argument("--output")
    p.set_defaults(func=cmd_verbalize)

    p = sub.add_parser("noise", help="apply a noise model and dump canonical JSON")
    p.add_argument("input")
    p.add_argument("--format", choices=["auto", "canonical", "due"], default="auto")
    p.add_argument("--model", choices=[m.value for m in NoiseModelId], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--translate-max", type=int, default=20, dest="translate_max")
    p.add_argument("--min-char-width", type=float, default=None, dest="min_char_width")
    p.add_argument("--min-char-height", type=float, default=None, dest="min_char_height")
    p.add_argument("--output")
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("run", help="run the document -> extraction pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--pattern", choices=["A", "B"])
    p.add_argument("--seed", type=int)
    p.add_argument("--dataset")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("evaluate", help="score extractions against ground truth")
    p.add_argument("extractions")
    p.add_argument("ground_truth")
    p.add_argument(
        "--metric",
        choices=["type_aware", "accuracy", "anls", "em", "f1", "em_f1"],
        default="type_aware",
    )
    p.add_argument("--no-empty-correct", action="store_true",
                   help="count empty prediction + empty ground truth as wrong")
    p.add_argument("--output-dir", dest="output_dir")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("tokens", help="token overhead per verbalization strategy")
    p.add_argument("corpus", nargs="+")
    p.add_argument("--format", choices=["auto", "canonical", "due"], default="auto")
    p.add_argument("--counter", choices=["approx", "adapter"], default="approx")
    p.add_argument("--adapter-cmd", dest="adapter_cmd")
    p.add_argument("--output")
    p.set_defaults(func=cmd_tokens)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (LayoutPromptError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
