"""Canonical pretty-printer for programs.

The canonical form is deterministic: modules first, then connections, each
in declaration order; 2-space indentation; section brackets aligned; one
relation per line; LF line endings with a trailing newline.  Comments and
goal ``question`` annotations are not part of the model's printable surface
and are dropped.
"""

from __future__ import annotations

from .model import Connection, Goal, Metric, MetricRef, Module, Program

# Width of "orggoals:" plus one space; keeps all section brackets aligned.
_SECTION_PAD = 10


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _decl(item: Goal | Metric) -> str:
    if item.description is None:
        return item.id
    return f'{item.id}: "{_escape(item.description)}"'


def _section(name: str, items: list[str]) -> str:
    label = f"{name}:".ljust(_SECTION_PAD)
    return f"  {label}[{', '.join(items)}]"


def format_module(module: Module) -> str:
    lines: list[str] = []
    if module.objects:
        lines.append(_section("objects", [k.value for k in module.objects]))
    if module.inputs:
        lines.append(_section("inputs", [ref.render() for ref in module.inputs]))
    if module.outputs:
        lines.append(_section("outputs", list(module.outputs)))
    if module.org_goals:
        lines.append(_section("orggoals", [_decl(g) for g in module.org_goals]))
    if module.goals:
        lines.append(_section("goals", [_decl(g) for g in module.goals]))
    if module.metrics:
        lines.append(_section("metrics", [_decl(m) for m in module.metrics]))
    for relation in module.relations:
        lines.append(f"  relate {relation.source} -> {relation.target}")

    keyword = " organizational" if module.is_organizational else ""
    header = f"module {module.id}{keyword}"
    if not lines:
        return header + " {}"
    return "\n".join([header + " {", *lines, "}"])


def format_connection(connection: Connection) -> str:
    header = f"connect {connection.source} -> {connection.target}"
    if not connection.relation:
        return header + " {}"
    lines = [
        f"  relate {r.goal_module}.{r.goal} -> {r.ref_module}.{r.ref}"
        for r in connection.relation
    ]
    return "\n".join([header + " {", *lines, "}"])


def format_program(program: Program) -> str:
    """Render a program as canonical DSL text."""
    parts = [f"program {program.name}"]
    parts.extend(format_module(m) for m in program.modules)
    parts.extend(format_connection(c) for c in program.connections)
    return "\n\n".join(parts) + "\n"
