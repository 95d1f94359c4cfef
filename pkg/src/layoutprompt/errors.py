"""Exception types shared across the toolkit."""


class LayoutPromptError(Exception):
    """Base class for all toolkit errors."""


class GeometryError(LayoutPromptError):
    """A bounding box is degenerate or outside its page."""


class EmptyDocument(LayoutPromptError):
    """An operation needing at least one text box got a document without any."""


class ParseError(LayoutPromptError):
    """An input file is malformed; the message names the offending element."""


class MissingHtml(LayoutPromptError):
    """The HTML passthrough verbalizer was invoked on a document without HTML."""


class ZeroBaseline(LayoutPromptError):
    """Token overhead is undefined because the plain-text baseline is empty."""


class EmptyCorpus(LayoutPromptError):
    """A corpus-level operation got zero usable documents."""


class EmptyEvaluation(LayoutPromptError):
    """Evaluation was requested on zero records."""


class TransportError(LayoutPromptError):
    """A model backend call failed after exhausting retries."""


class ReplayMiss(LayoutPromptError):
    """Replay mode saw a request whose fingerprint is not in the store."""


class IoError(LayoutPromptError):
    """A run artifact could not be read or written."""
