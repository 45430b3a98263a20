"""Evolution operations: promotion, reverse-engineered skeletons, diffs.

These mechanize the common redesign moves.  ``promote`` turns a regular
module organizational without touching its implementation-facing surface
(goals, metrics, interface).  ``skeleton_from_metrics`` reverse-engineers a
module stub from pre-existing metrics.  ``diff`` reports what changed
between two program versions, at module/connection granularity.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .model import (
    Connection,
    ConnectionRelation,
    Goal,
    Metric,
    Module,
    ModuleKind,
    Program,
    Relation,
    require_identifier,
)


@dataclass(frozen=True)
class StaleRelation:
    """A connection pair that referenced the promoted module's measurement
    goals and now needs re-sourcing to one of its organizational goals."""

    connection: tuple[str, str]
    pair: ConnectionRelation

    def render(self) -> str:
        p = self.pair
        return (f"{self.connection[0]} -> {self.connection[1]}: "
                f"relate {p.goal_module}.{p.goal} -> {p.ref_module}.{p.ref}")


@dataclass(frozen=True)
class PromoteResult:
    program: Program
    stale_relations: tuple[StaleRelation, ...]


def promote(program: Program, module_id: str, new_org_goals: Sequence[Goal],
            org_goal_pairs: Iterable[tuple[str, str]]) -> PromoteResult:
    """Promote a regular module to organizational.

    The module keeps its measurement goals, metrics, inputs, and outputs
    exactly; it gains the given organizational goals and their pairing with
    existing measurement goals.  Connections are preserved as they are:
    incoming relations stay valid (they target measurement goals, which do
    not change), while outgoing relations that were sourced from the
    module's measurement goals become invalid for the new setup and are
    returned as a worklist rather than rewritten -- choosing which
    organizational goal backs each pair is a design decision.
    """
    mods = program.modules_by_id
    if module_id not in mods:
        raise ValueError(f"unknown module: {module_id}")
    module = mods[module_id]
    if module.is_organizational:
        raise ValueError(f"module '{module_id}' is already organizational")
    if not new_org_goals:
        raise ValueError("promotion requires at least one organizational goal")

    new_ids = [g.id for g in new_org_goals]
    if len(set(new_ids)) != len(new_ids):
        raise ValueError("duplicate organizational goal ids")
    namespace = module.goal_ids | module.metric_ids
    clashes = namespace.intersection(new_ids)
    if clashes:
        raise ValueError(
            f"organizational goal ids already declared in module '{module_id}':"
            f" {', '.join(sorted(clashes))}")

    pairs = list(org_goal_pairs)
    if isinstance(org_goal_pairs, (set, frozenset)):
        pairs = sorted(pairs)
    for org_goal, goal in pairs:
        if org_goal not in new_ids:
            raise ValueError(f"pair references unknown organizational goal '{org_goal}'")
        if goal not in module.goal_ids:
            raise ValueError(f"pair references unknown measurement goal '{goal}'")

    promoted = replace(
        module,
        kind=ModuleKind.ORGANIZATIONAL,
        org_goals=tuple(new_org_goals),
        relations=tuple(Relation(a, b) for a, b in pairs) + module.relations,
    )
    new_program = replace(
        program,
        modules=tuple(promoted if m.id == module_id and m is module else m
                      for m in program.modules),
    )

    stale = tuple(
        StaleRelation((c.source, c.target), pair)
        for c in program.connections if c.source == module_id
        for pair in c.relation
        if pair.ref_module == module_id and pair.ref in module.goal_ids
    )
    return PromoteResult(new_program, stale)


def skeleton_from_metrics(metric_ids: Sequence[str], module_id: str) -> Module:
    """Reverse-engineer a regular module from pre-existing metrics.

    Each metric gets a placeholder goal ``g_<metric>`` with a TODO
    description (lint keeps flagging those until they are reworded), paired
    with the metric it was elicited from.  All metrics are exported.
    """
    require_identifier(module_id, "module id")
    if not metric_ids:
        raise ValueError("at least one metric id is required")
    seen: set[str] = set()
    for metric_id in metric_ids:
        require_identifier(metric_id, "metric id")
        if metric_id in seen:
            raise ValueError(f"duplicate metric id '{metric_id}'")
        seen.add(metric_id)
    goal_ids = [f"g_{m}" for m in metric_ids]
    clashes = seen.intersection(goal_ids)
    if clashes:
        raise ValueError(
            f"generated goal ids collide with metric ids: {', '.join(sorted(clashes))}")

    return Module(
        id=module_id,
        kind=ModuleKind.REGULAR,
        goals=tuple(
            Goal(gid, f"TODO: elicited from metric {m}")
            for gid, m in zip(goal_ids, metric_ids)
        ),
        metrics=tuple(Metric(m) for m in metric_ids),
        outputs=tuple(metric_ids),
        relations=tuple(Relation(m, gid) for m, gid in zip(metric_ids, goal_ids)),
    )


@dataclass(frozen=True)
class ProgramDiff:
    """Module/connection level difference between two program versions.

    A connection whose endpoints survive but whose relation changed shows up
    in both ``removed_connections`` and ``added_connections`` (it was
    replaced); the diff carries identifiers, not payloads.
    """

    added_modules: frozenset[str]
    removed_modules: frozenset[str]
    changed_modules: tuple[tuple[str, tuple[str, ...]], ...]
    added_connections: frozenset[tuple[str, str]]
    removed_connections: frozenset[tuple[str, str]]

    @property
    def is_empty(self) -> bool:
        return not (self.added_modules or self.removed_modules or self.changed_modules
                    or self.added_connections or self.removed_connections)

    def touched_modules(self) -> frozenset[str]:
        """Every module named anywhere in the diff, connection endpoints
        included."""
        names = set(self.added_modules) | set(self.removed_modules)
        names.update(module_id for module_id, _ in self.changed_modules)
        for source, target in self.added_connections | self.removed_connections:
            names.add(source)
            names.add(target)
        return frozenset(names)

    def to_json(self) -> dict:
        return {
            "added_modules": sorted(self.added_modules),
            "removed_modules": sorted(self.removed_modules),
            "changed_modules": [
                {"module": module_id, "changes": list(changes)}
                for module_id, changes in self.changed_modules
            ],
            "added_connections": [list(c) for c in sorted(self.added_connections)],
            "removed_connections": [list(c) for c in sorted(self.removed_connections)],
        }


def diff(old: Program, new: Program) -> ProgramDiff:
    """Field-level symmetric difference between two programs."""
    old_mods, new_mods = old.modules_by_id, new.modules_by_id
    added = frozenset(new_mods) - frozenset(old_mods)
    removed = frozenset(old_mods) - frozenset(new_mods)
    changed = tuple(
        (module_id, changes)
        for module_id in sorted(set(old_mods) & set(new_mods))
        if (changes := tuple(_module_changes(old_mods[module_id], new_mods[module_id])))
    )

    old_conns = _connection_map(old)
    new_conns = _connection_map(new)
    added_conns = set(new_conns) - set(old_conns)
    removed_conns = set(old_conns) - set(new_conns)
    for endpoints in set(old_conns) & set(new_conns):
        if old_conns[endpoints] != new_conns[endpoints]:
            added_conns.add(endpoints)
            removed_conns.add(endpoints)

    return ProgramDiff(
        added_modules=added,
        removed_modules=removed,
        changed_modules=changed,
        added_connections=frozenset(added_conns),
        removed_connections=frozenset(removed_conns),
    )


def format_diff(d: ProgramDiff) -> str:
    """Human-readable rendering; empty string when nothing differs."""
    lines: list[str] = []
    for module_id in sorted(d.removed_modules):
        lines.append(f"- module {module_id}")
    for module_id in sorted(d.added_modules):
        lines.append(f"+ module {module_id}")
    for module_id, changes in d.changed_modules:
        lines.append(f"~ module {module_id}")
        lines.extend(f"    {change}" for change in changes)
    for source, target in sorted(d.removed_connections):
        lines.append(f"- connect {source} -> {target}")
    for source, target in sorted(d.added_connections):
        lines.append(f"+ connect {source} -> {target}")
    return "\n".join(lines) + "\n" if lines else ""


def _module_changes(old: Module, new: Module) -> list[str]:
    if old == new:
        return []
    changes: list[str] = []
    if old.kind != new.kind:
        changes.append(f"kind: {old.kind.value} -> {new.kind.value}")
    changes += _list_changes("objects", [k.value for k in old.objects],
                             [k.value for k in new.objects])
    changes += _list_changes("inputs", [r.render() for r in old.inputs],
                             [r.render() for r in new.inputs])
    changes += _list_changes("outputs", list(old.outputs), list(new.outputs))
    changes += _entity_changes("orggoals", old.org_goals, new.org_goals)
    changes += _entity_changes("goals", old.goals, new.goals)
    changes += _entity_changes("metrics", old.metrics, new.metrics)
    changes += _list_changes(
        "relations",
        [f"({r.source} -> {r.target})" for r in old.relations],
        [f"({r.source} -> {r.target})" for r in new.relations],
    )
    return changes


def _list_changes(label: str, old: list[str], new: list[str]) -> list[str]:
    out = [f"{label}: +{item}" for item in sorted(set(new) - set(old))]
    out += [f"{label}: -{item}" for item in sorted(set(old) - set(new))]
    if not out and old != new:
        out.append(f"{label}: reordered")
    return out


def _entity_changes(label: str, old: tuple, new: tuple) -> list[str]:
    old_by = {item.id: item for item in old}
    new_by = {item.id: item for item in new}
    out = [f"{label}: +{item_id}" for item_id in sorted(set(new_by) - set(old_by))]
    out += [f"{label}: -{item_id}" for item_id in sorted(set(old_by) - set(new_by))]
    out += [
        f"{label}: {item_id} changed"
        for item_id in sorted(set(old_by) & set(new_by))
        if old_by[item_id] != new_by[item_id]
    ]
    if not out and old != new:
        out.append(f"{label}: reordered")
    return out


def _connection_map(p: Program) -> dict[tuple[str, str], Connection]:
    out: dict[tuple[str, str], Connection] = {}
    for c in p.connections:
        out.setdefault((c.source, c.target), c)
    return out
