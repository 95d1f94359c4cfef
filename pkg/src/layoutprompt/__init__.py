"""Layout-enriched document verbalization and evaluation for text-only LLMs.

The pipeline: OCR word boxes are ingested into a canonical document model,
optionally degraded with a noise model, turned into a textual
representation by one of seven verbalization strategies, wrapped in a task
prompt, sent to a model backend (live or recorded replay), and the JSON
answers are extracted and scored with type-aware accuracy, ANLS or EM/F1.
"""

__version__ = "0.1.0"

from .cli import PipelineConfig, run_pipeline
from .errors import (
    EmptyCorpus,
    EmptyDocument,
    EmptyEvaluation,
    GeometryError,
    IoError,
    LayoutPromptError,
    MissingHtml,
    ParseError,
    ReplayMiss,
    TransportError,
    ZeroBaseline,
)
from .extraction import ExtractionResult, extract_answers, find_json_objects
from .ingest import load_canonical, load_due, load_lines_fallback, save_canonical
from .llm import LlmRequest, ReplayBackend, ReplayStore, fingerprint, wrap_solar
from .metrics import (
    AnswerType,
    EvalRecord,
    Verdict,
    aggregate,
    anls,
    compare_typed,
    em_f1,
)
from .model import CharMetrics, OcrDocument, Page, TextBox, center, derive_char_metrics, group_rows
from .noise import NoiseConfig, NoiseModelId, SplitMix64, apply_noise
from .prompts import PromptPattern, TaskKind, TaskRequest, expected_answer_schema, render_prompt
from .tokens import ApproximateCounter, corpus_overhead, overhead
from .verbalize import Verbalization, VerbalizerId, format_description, verbalize
