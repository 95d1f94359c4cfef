"""Prompt-length overhead of each verbalization strategy.

Counting is abstracted behind a tiny interface so a real BPE tokenizer can
be plugged in as an external process; reimplementing one is out of scope.
The built-in approximate counter (whitespace-and-punctuation split) is the
offline default: the deliverable is the ranking between strategies, not
absolute token counts.

Adapter wire protocol, so any tokenizer implementation can serve counts:
each request is the decimal byte length of the UTF-8 text, a newline, then
exactly that many bytes; each response is the decimal token count followed
by a newline. Requests are answered in order over stdin/stdout.
"""

from __future__ import annotations

import re
import statistics
import subprocess
import threading
from dataclasses import dataclass
from typing import BinaryIO, Callable, Iterable, Protocol

from .errors import EmptyCorpus, ZeroBaseline
from .model import OcrDocument, derive_char_metrics
from .verbalize import VerbalizerId, verbalize, verbalize_plain_text

DEFAULT_VERBALIZERS = tuple(v for v in VerbalizerId if v is not VerbalizerId.PlainHTML)


class TokenCounter(Protocol):
    def count(self, text: str) -> int: ...


_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


class ApproximateCounter:
    """Whitespace-and-punctuation split: words and punctuation marks count."""

    def count(self, text: str) -> int:
        return len(_TOKEN_RE.findall(text))


class SubprocessCounter:
    """Talks the adapter protocol to a tokenizer child process."""

    def __init__(self, command: list[str]) -> None:
        self._proc = subprocess.Popen(
            command, stdin=subprocess.PIPE, stdout=subprocess.PIPE
        )
        self._lock = threading.Lock()

    def count(self, text: str) -> int:
        payload = text.encode("utf-8")
        with self._lock:
            self._proc.stdin.write(b"%d\n" % len(payload) + payload)
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        if not line:
            raise RuntimeError("token counter process closed its output")
        return int(line)

    def close(self) -> None:
        if self._proc.stdin:
            self._proc.stdin.close()
        self._proc.wait(timeout=10)

    def __enter__(self) -> "SubprocessCounter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def serve_counts(count: Callable[[str], int], stdin: BinaryIO, stdout: BinaryIO) -> None:
    """Answer adapter-protocol requests until EOF; for counter servers."""
    while True:
        header = stdin.readline()
        if not header:
            return
        length = int(header)
        payload = stdin.read(length)
        stdout.write(b"%d\n" % count(payload.decode("utf-8")))
        stdout.flush()


@dataclass(frozen=True)
class OverheadReport:
    """Per-verbalizer mean token ratio over a corpus, plus the ranking."""

    mean_ratio: dict[str, float]
    n_documents: int

    @property
    def ranking(self) -> list[str]:
        return sorted(self.mean_ratio, key=self.mean_ratio.get)


def overhead(
    doc: OcrDocument, verbalizer: VerbalizerId, counter: TokenCounter
) -> float:
    """Token count of a strategy relative to the plain-text baseline."""
    baseline = counter.count(verbalize_plain_text(doc).text)
    if baseline == 0:
        raise ZeroBaseline(f"document {doc.doc_id!r} verbalizes to empty text")
    metrics = derive_char_metrics(doc)
    return counter.count(verbalize(doc, verbalizer, metrics=metrics).text) / baseline


def corpus_overhead(
    docs: Iterable[OcrDocument],
    counter: TokenCounter,
    verbalizers: tuple[VerbalizerId, ...] = DEFAULT_VERBALIZERS,
) -> OverheadReport:
    """Arithmetic mean of per-document ratios for each strategy."""
    ratios: dict[str, list[float]] = {v.value: [] for v in verbalizers}
    n_documents = 0
    for doc in docs:
        baseline = counter.count(verbalize_plain_text(doc).text)
        if baseline == 0:
            continue
        n_documents += 1
        metrics = derive_char_metrics(doc)
        for verbalizer in verbalizers:
            count = counter.count(verbalize(doc, verbalizer, metrics=metrics).text)
            ratios[verbalizer.value].append(count / baseline)
    if n_documents == 0:
        raise EmptyCorpus("no document with non-empty plain text")
    return OverheadReport(
        mean_ratio={name: statistics.fmean(values) for name, values in ratios.items()},
        n_documents=n_documents,
    )
