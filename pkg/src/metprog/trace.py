"""Traceability queries over the program's relation chains.

``trace_up`` walks from a metric towards the organizational goals that
ultimately explain it; ``trace_down`` walks from an organizational goal to
the metrics that ultimately serve it.  Both enumerate complete derivation
chains (simple paths) through the intra-module relations and the
connections, so they double as an independent, path-based view of the
justification the validator checks globally.

Upward chains terminate at an organizational goal of a root module (the
axioms of the program); paths that dead-end earlier are not reported.
Downward chains terminate at metrics.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Program


@dataclass(frozen=True)
class TraceStep:
    kind: str  # "metric" | "goal" | "orggoal"
    module: str
    id: str
    via: str | None  # edge that led here; None on the first step

    def to_json(self) -> dict:
        return {"kind": self.kind, "module": self.module, "id": self.id, "via": self.via}


@dataclass(frozen=True)
class TraceChain:
    steps: tuple[TraceStep, ...]

    def entities(self) -> set[tuple[str, str, str]]:
        return {(s.kind, s.module, s.id) for s in self.steps}

    def to_json(self) -> dict:
        return {"steps": [s.to_json() for s in self.steps]}


def format_chain(chain: TraceChain, separator: str = " <- ") -> str:
    """One-line rendering; module tags appear where the module changes."""
    parts = []
    steps = chain.steps
    for index, step in enumerate(steps):
        text = step.id
        if index == len(steps) - 1 or steps[index + 1].module != step.module:
            text += f" [{step.module}]"
        parts.append(text)
    return separator.join(parts)


def trace_up(program: Program, module_id: str, metric_id: str) -> list[TraceChain]:
    """All derivation chains from a metric up to a grounded (root-module)
    organizational goal.  Empty exactly when the metric's goals are not
    justified."""
    module = _module(program, module_id)
    if metric_id not in module.metric_ids:
        raise ValueError(f"no metric '{metric_id}' in module '{module_id}'")
    walker = _Walker(program, upward=True)
    return walker.chains(("metric", module_id, metric_id))


def trace_down(program: Program, module_id: str, org_goal_id: str) -> list[TraceChain]:
    """All derivation chains from an organizational goal down to metrics,
    through the module's own goal pairings and its connections."""
    module = _module(program, module_id)
    if org_goal_id not in module.org_goal_ids:
        raise ValueError(f"no organizational goal '{org_goal_id}' in module '{module_id}'")
    walker = _Walker(program, upward=False)
    return walker.chains(("orggoal", module_id, org_goal_id))


def _module(program: Program, module_id: str):
    mods = program.modules_by_id
    if module_id not in mods:
        raise ValueError(f"unknown module: {module_id}")
    return mods[module_id]


_Node = tuple[str, str, str]  # (kind, module, id)


class _Walker:
    def __init__(self, program: Program, upward: bool):
        self.program = program
        self.upward = upward
        self.mods = program.modules_by_id
        self.roots = program.root_ids
        # Connection pairs (used goal, using ref), with the using side's kind.
        self.pairs: list[tuple[str, str, str, str, str]] = []
        for connection in program.connections:
            using = self.mods.get(connection.source)
            if using is None:
                continue
            ref_kind = "orggoal" if using.is_organizational else "goal"
            for goal, ref in connection.resolved_relation(program):
                self.pairs.append(
                    (connection.target, goal, connection.source, ref, ref_kind))

    def chains(self, start: _Node) -> list[TraceChain]:
        found: list[TraceChain] = []
        first = TraceStep(start[0], start[1], start[2], None)
        self._walk(start, [first], {start}, found)
        return found

    def _walk(self, node: _Node, path: list[TraceStep], on_path: set[_Node],
              found: list[TraceChain]):
        if self._terminal(node):
            found.append(TraceChain(tuple(path)))
            return
        for nxt, via in self._successors(node):
            if nxt in on_path:
                continue
            path.append(TraceStep(nxt[0], nxt[1], nxt[2], via))
            on_path.add(nxt)
            self._walk(nxt, path, on_path, found)
            on_path.remove(nxt)
            path.pop()

    def _terminal(self, node: _Node) -> bool:
        kind, module_id, _ = node
        if self.upward:
            return kind == "orggoal" and module_id in self.roots
        return kind == "metric"

    def _successors(self, node: _Node) -> list[tuple[_Node, str]]:
        kind, module_id, entity_id = node
        module = self.mods[module_id]
        out: list[tuple[_Node, str]] = []
        if self.upward:
            if kind == "metric":
                out += [(("goal", module_id, g), "metric_relation")
                        for m, g in module.metric_relation if m == entity_id]
            elif kind == "goal":
                out += [(("orggoal", module_id, og), "org_goal_relation")
                        for og, g in module.org_goal_relation if g == entity_id]
                out += [((ref_kind, src, ref), "connection")
                        for tgt, goal, src, ref, ref_kind in self.pairs
                        if tgt == module_id and goal == entity_id]
            else:  # non-root org goal: grounded through its own module's goals
                out += [(("goal", module_id, g), "org_goal_relation")
                        for og, g in module.org_goal_relation if og == entity_id]
        else:
            if kind == "orggoal":
                out += [(("goal", module_id, g), "org_goal_relation")
                        for og, g in module.org_goal_relation if og == entity_id]
                out += [(("goal", tgt, goal), "connection")
                        for tgt, goal, src, ref, ref_kind in self.pairs
                        if src == module_id and ref == entity_id and ref_kind == "orggoal"]
            elif kind == "goal":
                out += [(("metric", module_id, m), "metric_relation")
                        for m, g in module.metric_relation if g == entity_id]
                out += [(("orggoal", module_id, og), "org_goal_relation")
                        for og, g in module.org_goal_relation if g == entity_id]
                out += [(("goal", tgt, goal), "connection")
                        for tgt, goal, src, ref, ref_kind in self.pairs
                        if src == module_id and ref == entity_id and ref_kind == "goal"]
        out.sort(key=lambda item: (item[0][1], item[0][2], item[0][0]))
        return out
