"""Completeness and high-level correctness checks over a parsed program.

``validate`` runs the full error rule set and returns coded diagnostics
sorted by source location; an empty result means the program is complete
and correct at the level the model can judge.  Structural rules run first
and semantic rules skip entities those already flagged, so one author
mistake does not fan out into a wall of noise.  Documented cascades remain:
an empty goal or metric set (E005) necessarily leaves something underived,
and a connection relation of the wrong kind (E011) carries no justification
weight, so E010 can accompany it unless another pair covers the goal.

Error rules::

    E001  duplicate module id
    E002  connection endpoint unknown
    E003  self-connection
    E004  uses-graph cycle
    E005  module not well defined (an empty required set)
    E006  intra-module relation references an unknown or wrong-kind id
    E007  metric not derived from any measurement goal
    E008  measurement goal with no metric derived from it
    E010  measurement goal not justified by any organizational goal
    E011  connection relation of the wrong goal kind for its setup
    E012  connection relation endpoint not owned by the respective module
    E013  input metric unresolvable or ambiguous
    E014  root module is regular
    E016  duplicate connection

E015 (organizational goal never related to a measurement goal) keeps its
historical number but reports at warning severity.  W106 (connection with
an empty relation) is produced by ``check_connection_setup`` and surfaced
through lint, not through ``validate``.
"""

from __future__ import annotations

from collections import deque

from .diagnostics import Diagnostic, Severity, SpanIndex, sort_diagnostics, span_at
from .hierarchy import find_cycle
from .model import Connection, Program, is_well_defined, resolve_input
from .parser import ParseResult


def validate(parse_result: ParseResult, *, allow_abstract_goals: bool = False) -> list[Diagnostic]:
    """Validate a parsed program.  The parse must have succeeded."""
    if parse_result.program is None:
        raise ValueError("cannot validate a failed parse")
    return validate_program(
        parse_result.program,
        parse_result.span_index,
        allow_abstract_goals=allow_abstract_goals,
    )


def validate_program(program: Program, spans: SpanIndex | None = None, *,
                     allow_abstract_goals: bool = False) -> list[Diagnostic]:
    findings: list[Diagnostic] = []
    mods = program.modules_by_id

    # E001: duplicate module ids; only the first declaration takes part in
    # the remaining rules.
    occurrences: dict[str, int] = {}
    for module in program.modules:
        occ = occurrences.get(module.id, 0)
        occurrences[module.id] = occ + 1
        if occ > 0:
            findings.append(Diagnostic(
                "E001",
                f"duplicate module '{module.id}'",
                span_at(spans, ("module", module.id, occ)),
                related=(span_at(spans, ("module", module.id)),),
            ))

    # Connection structure: unknown endpoints, self-loops, duplicates.
    conn_occ: dict[tuple[str, str], int] = {}
    sound_connections: list[tuple[Connection, int]] = []
    for connection in program.connections:
        endpoints = (connection.source, connection.target)
        occ = conn_occ.get(endpoints, 0)
        conn_occ[endpoints] = occ + 1
        conn_span = span_at(spans, _connection_key(endpoints, occ))
        broken = False
        for endpoint in endpoints:
            if endpoint not in mods:
                findings.append(Diagnostic(
                    "E002",
                    f"connection endpoint '{endpoint}' is not a declared module",
                    conn_span,
                ))
                broken = True
        if not broken and connection.source == connection.target:
            findings.append(Diagnostic(
                "E003",
                f"module '{connection.source}' must not connect to itself",
                conn_span,
            ))
            broken = True
        if broken:
            continue
        if occ > 0:
            findings.append(Diagnostic(
                "E016",
                f"duplicate connection '{connection.source} -> {connection.target}'",
                conn_span,
                related=(span_at(spans, _connection_key(endpoints, 0)),),
            ))
            continue
        sound_connections.append((connection, occ))

    # E004: one canonical cycle path.
    cycle = find_cycle(program)
    if cycle is not None:
        findings.append(Diagnostic(
            "E004",
            "uses-graph cycle: " + " -> ".join(cycle),
            span_at(spans, _connection_key((cycle[0], cycle[1]), 0)),
        ))

    # Per-module rules on first declarations.
    for module in mods.values():
        module_span = span_at(spans, ("module", module.id))
        ok, violations = is_well_defined(module)
        if not ok:
            for violation in violations:
                findings.append(Diagnostic(
                    "E005",
                    f"module '{module.id}' is not well defined: {violation}",
                    module_span,
                ))

        org, goals, metrics = module.org_goal_ids, module.goal_ids, module.metric_ids
        for index, relation in enumerate(module.relations):
            rel_span = span_at(spans, ("relation", module.id, index), module_span)
            if relation.source in goals and relation.source not in metrics \
                    and relation.source not in org:
                findings.append(Diagnostic(
                    "E006",
                    f"relation source '{relation.source}' is a measurement goal;"
                    " it must be a metric or an organizational goal",
                    rel_span,
                ))
            elif relation.source not in metrics and relation.source not in org:
                findings.append(Diagnostic(
                    "E006",
                    f"relation source '{relation.source}' is not declared in module '{module.id}'",
                    rel_span,
                ))
            if relation.target in goals:
                pass
            elif relation.target in metrics or relation.target in org:
                findings.append(Diagnostic(
                    "E006",
                    f"relation target '{relation.target}' must be a measurement goal",
                    rel_span,
                ))
            else:
                findings.append(Diagnostic(
                    "E006",
                    f"relation target '{relation.target}' is not declared in module '{module.id}'",
                    rel_span,
                ))

        # E007/E008 count declared pairs by endpoint name so that a pair
        # with one broken end (already E006) does not double-report.
        sources = {r.source for r in module.relations}
        for metric in module.metrics:
            if metric.id not in sources:
                findings.append(Diagnostic(
                    "E007",
                    f"metric '{metric.id}' is not derived from any measurement goal",
                    span_at(spans, ("metric", module.id, metric.id), module_span),
                ))
        derived = {r.target for r in module.relations if r.source not in org}
        for goal in module.goals:
            if goal.id not in derived:
                findings.append(Diagnostic(
                    "E008",
                    f"measurement goal '{goal.id}' has no metric derived from it",
                    span_at(spans, ("goal", module.id, goal.id), module_span),
                    severity=Severity.WARNING if allow_abstract_goals else Severity.ERROR,
                ))

        # E013: every input must resolve to exactly one used module's output.
        for index, ref in enumerate(module.inputs):
            ref_span = span_at(spans, ("input", module.id, index), module_span)
            candidates = resolve_input(program, module, ref)
            if len(candidates) == 1:
                continue
            if len(candidates) > 1:
                producers = ", ".join(f"'{m}'" for m, _ in candidates)
                findings.append(Diagnostic(
                    "E013",
                    f"input '{ref.render()}' is ambiguous: produced by modules"
                    f" {producers}; qualify it",
                    ref_span,
                ))
                continue
            if ref.module is not None and ref.module not in mods:
                detail = f"references unknown module '{ref.module}'"
            elif ref.module is not None and ref.module not in program.used_by(module.id):
                detail = f"module '{module.id}' does not use module '{ref.module}'"
            elif ref.module is not None:
                detail = f"'{ref.metric}' is not an output of module '{ref.module}'"
            else:
                detail = f"does not match any output of the modules '{module.id}' uses"
            findings.append(Diagnostic(
                "E013", f"input '{ref.render()}' {detail}", ref_span,
            ))

        # E015 (warning severity): an organizational goal nobody relates to.
        if module.is_organizational:
            covered = {source for source, _ in module.org_goal_relation}
            for connection, _ in sound_connections:
                if connection.source == module.id:
                    covered.update(ref for _, ref in connection.resolved_relation(program))
            for org_goal in module.org_goals:
                if org_goal.id not in covered:
                    findings.append(Diagnostic(
                        "E015",
                        f"organizational goal '{org_goal.id}' of module '{module.id}'"
                        " is not related to any measurement goal",
                        span_at(spans, ("orggoal", module.id, org_goal.id), module_span),
                    ))

    # Connection setup rules (E011/E012); W106 is lint's to surface.
    for connection, occ in sound_connections:
        findings.extend(
            d for d in check_connection_setup(connection, program, spans, occurrence=occ)
            if d.code != "W106"
        )

    # E014: regular modules at the top of the hierarchy.
    for module_id in sorted(program.root_ids):
        if not mods[module_id].is_organizational:
            findings.append(Diagnostic(
                "E014",
                f"root module '{module_id}' is regular; only organizational modules"
                " can occupy the highest hierarchy level",
                span_at(spans, ("module", module_id)),
            ))

    # E010: unjustified measurement goals; undefined on cyclic programs.
    if cycle is None:
        justified = justified_by_reachability(program)
        for module in mods.values():
            for goal in module.goals:
                if (module.id, goal.id) not in justified:
                    findings.append(Diagnostic(
                        "E010",
                        f"measurement goal '{goal.id}' of module '{module.id}'"
                        " is not justified by any organizational goal",
                        span_at(spans, ("goal", module.id, goal.id),
                                span_at(spans, ("module", module.id))),
                    ))

    return sort_diagnostics(findings)


def check_connection_setup(connection: Connection, program: Program,
                           spans: SpanIndex | None = None, *,
                           occurrence: int = 0) -> list[Diagnostic]:
    """Check one connection's relation against its setup.

    The using module's kind decides which of its goals may appear on the
    right of each pair: organizational modules relate through their
    organizational goals, regular modules through their measurement goals.
    The left side always names a measurement goal of the used module.  An
    empty relation is reported as W106.
    """
    mods = program.modules_by_id
    using = mods[connection.source]
    used = mods[connection.target]
    endpoints = (connection.source, connection.target)
    findings: list[Diagnostic] = []

    if not connection.relation:
        findings.append(Diagnostic(
            "W106",
            f"connection '{connection.source} -> {connection.target}'"
            " declares no goal relation",
            span_at(spans, _connection_key(endpoints, occurrence)),
        ))
        return findings

    for index, pair in enumerate(connection.relation):
        pair_span = span_at(
            spans, ("crel",) + endpoints + (occurrence, index),
            span_at(spans, _connection_key(endpoints, occurrence)),
        )
        rendered = f"{pair.goal_module}.{pair.goal} -> {pair.ref_module}.{pair.ref}"

        if pair.goal_module != connection.target:
            findings.append(Diagnostic(
                "E012",
                f"relation '{rendered}': left side must name a goal of the"
                f" used module '{connection.target}'",
                pair_span,
            ))
        elif pair.goal in used.goal_ids:
            pass
        elif pair.goal in used.org_goal_ids or pair.goal in used.metric_ids:
            findings.append(Diagnostic(
                "E011",
                f"'{pair.goal_module}.{pair.goal}' is not a measurement goal;"
                " a connection relates the used module's measurement goals",
                pair_span,
            ))
        else:
            findings.append(Diagnostic(
                "E012",
                f"'{pair.goal}' is not declared in module '{pair.goal_module}'",
                pair_span,
            ))

        if pair.ref_module != connection.source:
            findings.append(Diagnostic(
                "E012",
                f"relation '{rendered}': right side must name a goal of the"
                f" using module '{connection.source}'",
                pair_span,
            ))
            continue
        if using.is_organizational:
            if pair.ref in using.org_goal_ids:
                continue
            if pair.ref in using.goal_ids or pair.ref in using.metric_ids:
                findings.append(Diagnostic(
                    "E011",
                    f"using module '{connection.source}' is organizational:"
                    f" relation must name one of its organizational goals,"
                    f" not '{pair.ref}'",
                    pair_span,
                ))
            else:
                findings.append(Diagnostic(
                    "E012",
                    f"'{pair.ref}' is not declared in module '{pair.ref_module}'",
                    pair_span,
                ))
        else:
            if pair.ref in using.goal_ids:
                continue
            if pair.ref in using.metric_ids:
                findings.append(Diagnostic(
                    "E011",
                    f"using module '{connection.source}' is regular: relation"
                    f" must name one of its measurement goals, not metric '{pair.ref}'",
                    pair_span,
                ))
            else:
                findings.append(Diagnostic(
                    "E012",
                    f"'{pair.ref}' is not declared in module '{pair.ref_module}'",
                    pair_span,
                ))
    return findings


def justified_by_reachability(program: Program) -> set[tuple[str, str]]:
    """Justified measurement goals, computed as reachability from the
    axioms (root organizational modules' goals) over the justification
    graph.  Independent of the fixed-point formulation in ``model``; the
    two are cross-checked in the test suite."""
    adjacency: dict[tuple, list[tuple]] = {}

    def link(source: tuple, target: tuple):
        adjacency.setdefault(source, []).append(target)

    mods = program.modules_by_id
    roots = program.root_ids
    axioms: list[tuple] = []
    for module in mods.values():
        if not module.is_organizational:
            continue
        if module.id in roots:
            axioms.extend(("org", module.id, g.id) for g in module.org_goals)
        for org_goal, goal in module.org_goal_relation:
            link(("org", module.id, org_goal), ("goal", module.id, goal))
            link(("goal", module.id, goal), ("org", module.id, org_goal))
    for connection in program.connections:
        using = mods.get(connection.source)
        if using is None:
            continue
        ref_kind = "org" if using.is_organizational else "goal"
        for goal, ref in connection.resolved_relation(program):
            link((ref_kind, connection.source, ref), ("goal", connection.target, goal))

    reached: set[tuple] = set(axioms)
    queue = deque(axioms)
    while queue:
        node = queue.popleft()
        for nxt in adjacency.get(node, ()):
            if nxt not in reached:
                reached.add(nxt)
                queue.append(nxt)
    return {(m, g) for kind, m, g in reached if kind == "goal"}


def _connection_key(endpoints: tuple[str, str], occurrence: int) -> tuple:
    if occurrence == 0:
        return ("connection",) + endpoints
    return ("connection",) + endpoints + (occurrence,)
