"""Parser for the metprog DSL.

Grammar (terminals quoted)::

    program    = "program" IDENT { item } ;
    item       = module | connection ;
    module     = "module" IDENT [ "organizational" ] "{" body "}" ;
    body       = [ objects ] [ inputs ] [ outputs ] [ orggoals ] [ goals ]
                 [ metrics ] { relation } ;
    objects    = "objects"  ":" "[" [ kind { "," kind } ] "]" ;
    kind       = "product" | "process" | "resource" | "organization" ;
    inputs     = "inputs"   ":" "[" [ mref { "," mref } ] "]" ;
    outputs    = "outputs"  ":" "[" [ IDENT { "," IDENT } ] "]" ;
    orggoals   = "orggoals" ":" "[" [ decl { "," decl } ] "]" ;
    goals      = "goals"    ":" "[" [ decl { "," decl } ] "]" ;
    metrics    = "metrics"  ":" "[" [ decl { "," decl } ] "]" ;
    decl       = IDENT [ ":" STRING ] ;
    mref       = [ IDENT "." ] IDENT ;
    relation   = "relate" IDENT "->" IDENT ;
    connection = "connect" IDENT "->" IDENT "{" { crel } "}" ;
    crel       = "relate" IDENT "." IDENT "->" IDENT "." IDENT ;

``//`` starts a line comment.  Strings are double-quoted with ``\\"`` and
``\\\\`` as the only escapes.  Keywords are reserved and cannot be used as
identifiers.  The ``orggoals`` section is only legal in modules declared
``organizational`` (a regular module must not carry organizational goals).

The parser resolves syntax and in-module duplicates only; cross-module
reference checks, acyclicity, and duplicate module/connection detection
belong to the validator.  It never stops at the first error: after a
malformed item it skips ahead to the next top-level keyword and continues.

Diagnostic codes: P001 unexpected token / character, P002 duplicate
declaration in one scope, P003 malformed relation arrow.

``ParseResult.span_index`` maps every declared entity to its source span:

    ("program",)                                program name
    ("module", id) / ("module", id, n)          module (n-th duplicate)
    ("orggoal"|"goal"|"metric", module, id)     declarations
    ("object"|"input"|"output", module, i)      interface items by position
    ("relation", module, i)                     intra-module pair by position
    ("connection", src, dst) / (..., n)         connection header
    ("crel", src, dst, n, i)                    connection pair by position

Duplicate declarations keep their first span; later occurrences only show
up in the diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .diagnostics import Diagnostic, SourceSpan, has_errors, sort_diagnostics
from .model import (
    Connection,
    ConnectionRelation,
    Goal,
    Metric,
    MetricRef,
    Module,
    ModuleKind,
    ObjectKind,
    Program,
    Relation,
)

KEYWORDS = frozenset({
    "program", "module", "organizational", "connect", "relate",
    "objects", "inputs", "outputs", "orggoals", "goals", "metrics",
    "product", "process", "resource", "organization",
})

_SECTION_ORDER = ("objects", "inputs", "outputs", "orggoals", "goals", "metrics")
_OBJECT_KINDS = {k.value: k for k in ObjectKind}
_PUNCT = {"{", "}", "[", "]", ":", ",", "."}


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "string", "eof", a punctuation literal, or a keyword
    value: str
    line: int
    column: int
    length: int

    def span(self, path: str) -> SourceSpan:
        return SourceSpan(path, self.line, self.column, self.length)


@dataclass
class ParseResult:
    """Outcome of a parse: the program is present exactly when no
    error-severity diagnostic was produced."""

    program: Optional[Program]
    diagnostics: list[Diagnostic]
    span_index: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.program is not None


def tokenize(text: str, path: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    line, col, i, n = 1, 1, 0, len(text)

    def err(message: str, length: int = 1, at_line: int | None = None, at_col: int | None = None):
        diags.append(Diagnostic(
            "P001", message,
            SourceSpan(path, at_line or line, at_col or col, length),
        ))

    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i, col = i + 1, col + 1
            continue
        if ch.isalpha():
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            word = text[start:i]
            kind = word if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, col, len(word)))
            col += len(word)
            continue
        if ch == '"':
            start_line, start_col = line, col
            i, col = i + 1, col + 1
            parts: list[str] = []
            closed = False
            while i < n and text[i] != "\n":
                c = text[i]
                if c == "\\":
                    if i + 1 < n and text[i + 1] in ('"', "\\"):
                        parts.append(text[i + 1])
                        i, col = i + 2, col + 2
                        continue
                    err("invalid escape sequence in string", 2)
                    i, col = i + 2, col + 2
                    continue
                if c == '"':
                    i, col = i + 1, col + 1
                    closed = True
                    break
                parts.append(c)
                i, col = i + 1, col + 1
            if closed:
                value = "".join(parts)
                tokens.append(Token("string", value, start_line, start_col, col - start_col))
            else:
                err("unterminated string", col - start_col, start_line, start_col)
            continue
        if text.startswith("->", i):
            tokens.append(Token("->", "->", line, col, 2))
            i, col = i + 2, col + 2
            continue
        if ch in _PUNCT:
            tokens.append(Token(ch, ch, line, col, 1))
            i, col = i + 1, col + 1
            continue
        # Unknown characters: report one diagnostic per run, not per char.
        start, start_col = i, col
        while i < n and text[i] not in " \t\r\n" and not text[i].isalnum() \
                and text[i] not in _PUNCT and text[i] not in '"/':
            i, col = i + 1, col + 1
        if i == start:
            i, col = i + 1, col + 1
        err(f"unexpected characters {text[start:i]!r}", i - start, line, start_col)

    tokens.append(Token("eof", "", line, col, 0))
    return tokens, diags


def parse(text: str, path: str = "<string>") -> ParseResult:
    """Parse DSL text into a Program, collecting diagnostics and spans."""
    tokens, diags = tokenize(text, path)
    parser = _Parser(tokens, path)
    program = parser.parse_program()
    all_diags = sort_diagnostics(diags + parser.diags)
    if has_errors(all_diags):
        program = None
    return ParseResult(program, all_diags, parser.spans)


class _Parser:
    def __init__(self, tokens: list[Token], path: str):
        self.toks = tokens
        self.pos = 0
        self.path = path
        self.diags: list[Diagnostic] = []
        self.spans: dict = {}
        self._module_counts: dict[str, int] = {}
        self._connection_counts: dict[tuple[str, str], int] = {}

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def error(self, code: str, message: str, tok: Token | None = None,
              related: tuple[SourceSpan, ...] = ()):
        tok = tok or self.peek()
        self.diags.append(Diagnostic(code, message, tok.span(self.path), related=related))

    def describe(self, tok: Token) -> str:
        if tok.kind == "eof":
            return "end of file"
        if tok.kind == "string":
            return "string"
        if tok.kind in KEYWORDS:
            return f"keyword '{tok.value}'"
        return f"'{tok.value}'"

    def expect(self, kind: str, what: str) -> Optional[Token]:
        if self.at(kind):
            return self.next()
        self.error("P001", f"expected {what}, found {self.describe(self.peek())}")
        return None

    def expect_ident(self, what: str = "identifier") -> Optional[Token]:
        return self.expect("ident", what)

    def merged_span(self, first: Token, last: Token) -> SourceSpan:
        if first.line == last.line:
            length = last.column + last.length - first.column
        else:
            length = first.length
        return SourceSpan(self.path, first.line, first.column, length)

    # -- recovery ----------------------------------------------------------

    def sync_top_level(self):
        """Skip ahead to the next top-level item keyword."""
        while self.peek().kind not in ("module", "connect", "eof"):
            self.next()

    def sync_block(self):
        """Skip to the end of the enclosing brace block (already inside it),
        bailing out early at a top-level keyword."""
        depth = 1
        while True:
            kind = self.peek().kind
            if kind == "eof" or kind in ("module", "connect"):
                return
            tok = self.next()
            if tok.kind == "{":
                depth += 1
            elif tok.kind == "}":
                depth -= 1
                if depth == 0:
                    return

    def sync_statement(self):
        """Skip to the next statement boundary inside a body."""
        while self.peek().kind not in ("relate", "}", "module", "connect", "eof"):
            self.next()

    # -- grammar -----------------------------------------------------------

    def parse_program(self) -> Optional[Program]:
        if self.at("program"):
            self.next()
            name_tok = self.expect_ident("program name")
            name = name_tok.value if name_tok else ""
            if name_tok:
                self.spans[("program",)] = name_tok.span(self.path)
        else:
            self.error("P001", f"expected 'program', found {self.describe(self.peek())}")
            name = ""

        modules: list[Module] = []
        connections: list[Connection] = []
        while not self.at("eof"):
            if self.at("module"):
                module = self.parse_module()
                if module is not None:
                    modules.append(module)
            elif self.at("connect"):
                connection = self.parse_connection()
                if connection is not None:
                    connections.append(connection)
            else:
                self.error(
                    "P001",
                    f"expected 'module' or 'connect', found {self.describe(self.peek())}",
                )
                self.next()
                self.sync_top_level()
        return Program(name, tuple(modules), tuple(connections))

    def parse_module(self) -> Optional[Module]:
        self.next()  # 'module'
        id_tok = self.expect_ident("module name")
        if id_tok is None:
            self.sync_top_level()
            return None
        module_id = id_tok.value
        occurrence = self._module_counts.get(module_id, 0)
        self._module_counts[module_id] = occurrence + 1
        key = ("module", module_id) if occurrence == 0 else ("module", module_id, occurrence)
        self.spans[key] = id_tok.span(self.path)
        first = occurrence == 0

        organizational = False
        if self.at("organizational"):
            self.next()
            organizational = True

        if self.expect("{", "'{'") is None:
            self.sync_top_level()
            return None

        body = _ModuleBody(module_id, organizational)
        min_section = 0
        seen: set[str] = set()
        relations_started = False
        while True:
            kind = self.peek().kind
            if kind == "}":
                self.next()
                break
            if kind in ("eof", "module", "connect"):
                self.error("P001", "unexpected end of module body (missing '}')")
                break
            if kind in _SECTION_ORDER:
                tok = self.peek()
                index = _SECTION_ORDER.index(kind)
                duplicate = kind in seen
                if duplicate:
                    self.error("P002", f"duplicate '{kind}' section in module '{module_id}'", tok)
                elif relations_started or index < min_section:
                    self.error("P001", f"'{kind}' section must appear earlier in the module body", tok)
                if kind == "orggoals" and not organizational:
                    self.error(
                        "P001",
                        f"'orggoals' section requires module '{module_id}' to be declared organizational",
                        tok,
                    )
                seen.add(kind)
                min_section = max(min_section, index + 1)
                self.parse_section(kind, body, record=first and not duplicate)
            elif kind == "relate":
                relations_started = True
                self.parse_relation(body, record=first)
            else:
                self.error(
                    "P001",
                    f"expected a section, 'relate', or '}}', found {self.describe(self.peek())}",
                )
                self.sync_block()
                break

        return Module(
            id=module_id,
            kind=ModuleKind.ORGANIZATIONAL if organizational else ModuleKind.REGULAR,
            objects=tuple(body.objects),
            org_goals=tuple(body.org_goals),
            goals=tuple(body.goals),
            metrics=tuple(body.metrics),
            inputs=tuple(body.inputs),
            outputs=tuple(body.outputs),
            relations=tuple(body.relations),
        )

    def parse_section(self, kind: str, body: "_ModuleBody", record: bool):
        self.next()  # section keyword
        if self.expect(":", "':'") is None:
            self.sync_statement()
            return
        if self.expect("[", "'['") is None:
            self.sync_statement()
            return
        if self.at("]"):
            self.next()
            return
        while True:
            before = self.pos
            self.parse_section_item(kind, body, record)
            if self.at(","):
                self.next()
                continue
            if self.at("]"):
                self.next()
                return
            self.error("P001", f"expected ',' or ']', found {self.describe(self.peek())}")
            # Recover to the end of the list without swallowing the body.
            while self.peek().kind not in ("]", "}", "relate", "module", "connect", "eof"):
                self.next()
            if self.at("]"):
                self.next()
            if self.pos == before:
                self.next()
            return

    def parse_section_item(self, kind: str, body: "_ModuleBody", record: bool):
        if kind == "objects":
            tok = self.peek()
            if tok.kind in _OBJECT_KINDS:
                self.next()
                object_kind = _OBJECT_KINDS[tok.kind]
                if object_kind in body.objects:
                    self.error("P002", f"duplicate object kind '{tok.value}'", tok)
                    return
                if record:
                    self.spans[("object", body.module_id, len(body.objects))] = tok.span(self.path)
                body.objects.append(object_kind)
            else:
                self.error("P001", f"expected an object kind, found {self.describe(tok)}")
                self.next()
            return
        if kind == "inputs":
            first = self.expect_ident("metric reference")
            if first is None:
                return
            module_part: Optional[str] = None
            metric_tok = first
            if self.at("."):
                self.next()
                metric_tok = self.expect_ident("metric name")
                if metric_tok is None:
                    return
                module_part = first.value
            ref = MetricRef(module_part, metric_tok.value)
            if ref in body.inputs:
                self.error("P002", f"duplicate input '{ref.render()}'", first)
                return
            if record:
                self.spans[("input", body.module_id, len(body.inputs))] = \
                    self.merged_span(first, metric_tok)
            body.inputs.append(ref)
            return
        if kind == "outputs":
            tok = self.expect_ident("metric name")
            if tok is None:
                return
            if tok.value in body.outputs:
                self.error("P002", f"duplicate output '{tok.value}'", tok)
                return
            if record:
                self.spans[("output", body.module_id, len(body.outputs))] = tok.span(self.path)
            body.outputs.append(tok.value)
            return
        # goal / orggoal / metric declarations share one namespace
        tok = self.expect_ident("declaration name")
        if tok is None:
            return
        description = None
        if self.at(":"):
            self.next()
            text = self.expect("string", "description string")
            description = text.value if text else None
        if tok.value in body.namespace:
            self.error("P002", f"duplicate identifier '{tok.value}' in module '{body.module_id}'", tok)
            return
        body.namespace.add(tok.value)
        if kind == "orggoals":
            if record:
                self.spans[("orggoal", body.module_id, tok.value)] = tok.span(self.path)
            body.org_goals.append(Goal(tok.value, description))
        elif kind == "goals":
            if record:
                self.spans[("goal", body.module_id, tok.value)] = tok.span(self.path)
            body.goals.append(Goal(tok.value, description))
        else:
            if record:
                self.spans[("metric", body.module_id, tok.value)] = tok.span(self.path)
            body.metrics.append(Metric(tok.value, description))

    def parse_relation(self, body: "_ModuleBody", record: bool):
        self.next()  # 'relate'
        source = self.expect_ident("relation source")
        if source is None:
            self.sync_statement()
            return
        if not self.at("->"):
            self.error("P003", f"expected '->' in relate statement, found {self.describe(self.peek())}")
            self.sync_statement()
            return
        self.next()
        target = self.expect_ident("relation target")
        if target is None:
            self.sync_statement()
            return
        pair = Relation(source.value, target.value)
        if pair in body.relations:
            self.error("P002", f"duplicate relation '{source.value} -> {target.value}'", source)
            return
        if record:
            self.spans[("relation", body.module_id, len(body.relations))] = \
                self.merged_span(source, target)
        body.relations.append(pair)

    def parse_connection(self) -> Optional[Connection]:
        connect_tok = self.next()  # 'connect'
        source = self.expect_ident("using module name")
        if source is None:
            self.sync_top_level()
            return None
        if not self.at("->"):
            self.error("P001", f"expected '->' in connect statement, found {self.describe(self.peek())}")
            self.sync_top_level()
            return None
        self.next()
        target = self.expect_ident("used module name")
        if target is None:
            self.sync_top_level()
            return None
        if self.expect("{", "'{'") is None:
            self.sync_top_level()
            return None

        endpoints = (source.value, target.value)
        occurrence = self._connection_counts.get(endpoints, 0)
        self._connection_counts[endpoints] = occurrence + 1
        key = ("connection",) + endpoints if occurrence == 0 \
            else ("connection",) + endpoints + (occurrence,)
        self.spans[key] = self.merged_span(connect_tok, target)

        pairs: list[ConnectionRelation] = []
        while True:
            kind = self.peek().kind
            if kind == "}":
                self.next()
                break
            if kind in ("eof", "module", "connect"):
                self.error("P001", "unexpected end of connection body (missing '}')")
                break
            if kind != "relate":
                self.error("P001", f"expected 'relate' or '}}', found {self.describe(self.peek())}")
                self.sync_block()
                break
            self.next()
            pair = self.parse_connection_pair()
            if pair is None:
                self.sync_statement()
                continue
            if pair in pairs:
                self.error(
                    "P002",
                    f"duplicate relation '{pair.goal_module}.{pair.goal} -> {pair.ref_module}.{pair.ref}'",
                )
                continue
            if occurrence == 0:
                self.spans[("crel",) + endpoints + (occurrence, len(pairs))] = \
                    self.merged_span(self._pair_first_tok, self._pair_last_tok)
            pairs.append(pair)

        return Connection(source.value, target.value, tuple(pairs))

    def parse_connection_pair(self) -> Optional[ConnectionRelation]:
        goal_module = self.expect_ident("module name")
        if goal_module is None or self.expect(".", "'.'") is None:
            return None
        goal = self.expect_ident("goal name")
        if goal is None:
            return None
        if not self.at("->"):
            self.error("P003", f"expected '->' in relate statement, found {self.describe(self.peek())}")
            return None
        self.next()
        ref_module = self.expect_ident("module name")
        if ref_module is None or self.expect(".", "'.'") is None:
            return None
        ref = self.expect_ident("goal name")
        if ref is None:
            return None
        self._pair_first_tok = goal_module
        self._pair_last_tok = ref
        return ConnectionRelation(goal_module.value, goal.value, ref_module.value, ref.value)


class _ModuleBody:
    """Mutable accumulator for one module's sections."""

    def __init__(self, module_id: str, organizational: bool):
        self.module_id = module_id
        self.organizational = organizational
        self.objects: list[ObjectKind] = []
        self.inputs: list[MetricRef] = []
        self.outputs: list[str] = []
        self.org_goals: list[Goal] = []
        self.goals: list[Goal] = []
        self.metrics: list[Metric] = []
        self.relations: list[Relation] = []
        self.namespace: set[str] = set()
