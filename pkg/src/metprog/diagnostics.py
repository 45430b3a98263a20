"""Shared diagnostic machinery: source spans, severities, coded findings.

Every check in the toolchain (parser, validator, hierarchy, lint) reports
through the same ``Diagnostic`` type so the CLI can render and sort findings
uniformly.  Codes follow a fixed prefix convention:

* ``P0xx`` -- syntax errors from the parser
* ``E0xx`` -- validation errors (completeness / correctness)
* ``W1xx`` -- warnings (design heuristics, soft checks)
* ``I1xx`` -- informational notes

``E015`` is the one deliberate exception: the org-goal coverage check keeps
its historical error number but reports at warning severity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


# Codes whose severity does not follow their prefix.
_SEVERITY_OVERRIDES = {"E015": Severity.WARNING}


def severity_for_code(code: str) -> Severity:
    """Default severity of a diagnostic code, derived from its prefix."""
    override = _SEVERITY_OVERRIDES.get(code)
    if override is not None:
        return override
    if code.startswith("W"):
        return Severity.WARNING
    if code.startswith("I"):
        return Severity.INFO
    return Severity.ERROR


@dataclass(frozen=True)
class SourceSpan:
    """A located region of input text (1-based line and column)."""

    file: str
    line: int
    column: int
    length: int = 0

    def to_json(self) -> dict:
        return {
            "file": self.file,
            "line": self.line,
            "column": self.column,
            "length": self.length,
        }


# Fallback span for findings on programs built in memory.
SYNTHETIC_SPAN = SourceSpan(file="<program>", line=1, column=1, length=0)


@dataclass(frozen=True)
class Diagnostic:
    """A coded, located finding."""

    code: str
    message: str
    span: SourceSpan
    severity: Severity = field(default=None)  # type: ignore[assignment]
    related: tuple[SourceSpan, ...] = ()

    def __post_init__(self):
        if self.severity is None:
            object.__setattr__(self, "severity", severity_for_code(self.code))

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def render(self) -> str:
        """Human one-liner: ``file:line:col: severity CODE: message``."""
        s = self.span
        return f"{s.file}:{s.line}:{s.column}: {self.severity.value} {self.code}: {self.message}"

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity.value,
            "message": self.message,
            "file": self.span.file,
            "line": self.span.line,
            "column": self.span.column,
            "length": self.span.length,
            "related": [r.to_json() for r in self.related],
        }


def sort_diagnostics(diags: list[Diagnostic]) -> list[Diagnostic]:
    """Stable order: by location, then code, for deterministic reports."""
    return sorted(diags, key=lambda d: (d.span.file, d.span.line, d.span.column, d.code))


def has_errors(diags: list[Diagnostic]) -> bool:
    return any(d.is_error for d in diags)


SpanIndex = dict  # keys are entity tuples, values are SourceSpan


def span_at(spans: SpanIndex | None, key: tuple, fallback: SourceSpan = SYNTHETIC_SPAN) -> SourceSpan:
    """Look up an entity span, tolerating programs without source text."""
    if not spans:
        return fallback
    return spans.get(key, fallback)
