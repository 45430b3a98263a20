"""Hierarchy analysis of the uses-graph: levels, roots, sinks, subprograms.

A module's level is the longest path from any root (a module used by no
other) down to it, so a module sits below every module that uses it, even
when it is also used from higher up directly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .diagnostics import Diagnostic, SpanIndex, span_at
from .model import Program


@dataclass(frozen=True)
class LevelMap:
    levels: dict[str, int]
    roots: frozenset[str]
    sinks: frozenset[str]

    def to_json(self) -> dict:
        return {
            "levels": {m: self.levels[m] for m in sorted(self.levels)},
            "roots": sorted(self.roots),
            "sinks": sorted(self.sinks),
        }


def find_cycle(program: Program) -> list[str] | None:
    """One canonical cycle path (first node repeated at the end), or None."""
    edges = program.edge_set
    nodes = set(program.modules_by_id)
    indegree = {n: 0 for n in nodes}
    successors: dict[str, list[str]] = {n: [] for n in nodes}
    for source, target in sorted(edges):
        successors[source].append(target)
        indegree[target] += 1

    queue = deque(sorted(n for n in nodes if indegree[n] == 0))
    seen = 0
    while queue:
        node = queue.popleft()
        seen += 1
        for nxt in successors[node]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                queue.append(nxt)
    if seen == len(nodes):
        return None

    leftover = {n for n in nodes if indegree[n] > 0}
    walk = [min(leftover)]
    positions = {walk[0]: 0}
    while True:
        current = walk[-1]
        nxt = min(n for n in successors[current] if n in leftover)
        if nxt in positions:
            cycle = walk[positions[nxt]:] + [nxt]
            pivot = cycle.index(min(cycle[:-1]))
            return cycle[pivot:-1] + cycle[:pivot] + [min(cycle[:-1])]
        positions[nxt] = len(walk)
        walk.append(nxt)


def compute_levels(program: Program) -> LevelMap:
    """Longest-path levels from the roots; raises on a cyclic program."""
    if find_cycle(program) is not None:
        raise ValueError("cyclic program: hierarchy levels are undefined")

    edges = program.edge_set
    nodes = set(program.modules_by_id)
    used = {target for _, target in edges}
    users = {source for source, _ in edges}
    roots = frozenset(nodes - used)
    sinks = frozenset(nodes - users)

    indegree = {n: 0 for n in nodes}
    successors: dict[str, list[str]] = {n: [] for n in nodes}
    for source, target in sorted(edges):
        successors[source].append(target)
        indegree[target] += 1

    levels = {n: 0 for n in nodes}
    queue = deque(sorted(n for n in nodes if indegree[n] == 0))
    while queue:
        node = queue.popleft()
        for nxt in successors[node]:
            levels[nxt] = max(levels[nxt], levels[node] + 1)
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                queue.append(nxt)
    return LevelMap(levels, roots, sinks)


def extract_subprogram(program: Program, root: str) -> Program:
    """Slice out ``root`` and everything it uses, transitively.

    Modules are copied unchanged, so inputs fed by modules outside the slice
    stay in place and will surface as unresolvable when the extraction is
    validated -- that is the signal that the slice is not self-contained.
    """
    if root not in program.modules_by_id:
        raise ValueError(f"unknown module: {root}")
    successors: dict[str, set[str]] = {}
    for source, target in program.edge_set:
        successors.setdefault(source, set()).add(target)
    reachable = {root}
    queue = deque([root])
    while queue:
        for nxt in successors.get(queue.popleft(), ()):
            if nxt not in reachable:
                reachable.add(nxt)
                queue.append(nxt)
    return Program(
        name=f"{program.name}_{root}",
        modules=tuple(m for m in program.modules if m.id in reachable),
        connections=tuple(
            c for c in program.connections
            if c.source in reachable and c.target in reachable
        ),
    )


def hierarchy_report(program: Program, spans: SpanIndex | None = None) -> list[Diagnostic]:
    """Level-placement findings: organizational modules at the lowest level
    (W101), regular modules at the highest (E014), and root organizational
    modules noted as candidate independent programs (I101)."""
    level_map = compute_levels(program)
    mods = program.modules_by_id
    findings: list[Diagnostic] = []
    for module_id in sorted(level_map.sinks):
        if mods[module_id].is_organizational and module_id not in level_map.roots:
            findings.append(Diagnostic(
                "W101",
                f"organizational module '{module_id}' occupies the lowest hierarchy level",
                span_at(spans, ("module", module_id)),
            ))
    for module_id in sorted(level_map.roots):
        if mods[module_id].is_organizational:
            findings.append(Diagnostic(
                "I101",
                f"root organizational module '{module_id}' is a candidate independent program",
                span_at(spans, ("module", module_id)),
            ))
        else:
            findings.append(Diagnostic(
                "E014",
                f"root module '{module_id}' is regular; only organizational modules"
                " can occupy the highest hierarchy level",
                span_at(spans, ("module", module_id)),
            ))
    return findings
