"""Object model for modular measurement programs.

A program is a named set of modules plus the uses-connections between them.
Each module carries its objects of measurement, two goal lists (measurement
goals always, organizational goals only for organizational modules), its
metrics, an input/output interface, and the declared derivation pairs
between those entities.  Everything is an immutable value; operations that
"change" a program return a new one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

IDENTIFIER_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")


def is_identifier(text: str) -> bool:
    return bool(IDENTIFIER_RE.fullmatch(text))


def require_identifier(text: str, what: str = "identifier") -> str:
    if not is_identifier(text):
        raise ValueError(f"invalid {what}: {text!r}")
    return text


class ObjectKind(str, Enum):
    PRODUCT = "product"
    PROCESS = "process"
    RESOURCE = "resource"
    ORGANIZATION = "organization"


class ModuleKind(str, Enum):
    REGULAR = "regular"
    ORGANIZATIONAL = "organizational"


def module_kind_from_objects(objects: Iterable[ObjectKind]) -> ModuleKind:
    """Classify a module by its objects: any organizational object makes it
    organizational, otherwise (including no objects at all) it is regular."""
    if ObjectKind.ORGANIZATION in set(objects):
        return ModuleKind.ORGANIZATIONAL
    return ModuleKind.REGULAR


def is_miscellaneous(objects: Iterable[ObjectKind]) -> bool:
    """An object-of-measurement combination of two or more kinds.  Derived,
    never stored on the module."""
    return len(set(objects)) >= 2


@dataclass(frozen=True)
class Goal:
    """A measurement or organizational goal.  ``question`` is an optional
    free-text annotation with no concrete syntax; it is not round-tripped
    through the DSL."""

    id: str
    description: Optional[str] = None
    question: Optional[str] = None


@dataclass(frozen=True)
class Metric:
    id: str
    description: Optional[str] = None


@dataclass(frozen=True)
class MetricRef:
    """Reference to a metric produced elsewhere; ``module`` qualifies the
    producing module and may be omitted when the bare name is unambiguous."""

    module: Optional[str]
    metric: str

    def render(self) -> str:
        return f"{self.module}.{self.metric}" if self.module else self.metric


@dataclass(frozen=True)
class Relation:
    """An intra-module pair ``relate source -> target``: the source (a metric
    or an organizational goal) is derived from the need to achieve the target
    measurement goal."""

    source: str
    target: str


@dataclass(frozen=True)
class ConnectionRelation:
    """A cross-module pair ``relate goal_module.goal -> ref_module.ref`` on a
    connection: the used module's goal contributes to the using module's
    goal or organizational goal."""

    goal_module: str
    goal: str
    ref_module: str
    ref: str


@dataclass(frozen=True)
class Module:
    id: str
    kind: ModuleKind = ModuleKind.REGULAR
    objects: tuple[ObjectKind, ...] = ()
    org_goals: tuple[Goal, ...] = ()
    goals: tuple[Goal, ...] = ()
    metrics: tuple[Metric, ...] = ()
    inputs: tuple[MetricRef, ...] = ()
    outputs: tuple[str, ...] = ()
    relations: tuple[Relation, ...] = ()

    @property
    def is_organizational(self) -> bool:
        return self.kind is ModuleKind.ORGANIZATIONAL

    @property
    def goal_ids(self) -> frozenset[str]:
        return frozenset(g.id for g in self.goals)

    @property
    def org_goal_ids(self) -> frozenset[str]:
        return frozenset(g.id for g in self.org_goals)

    @property
    def metric_ids(self) -> frozenset[str]:
        return frozenset(m.id for m in self.metrics)

    @property
    def org_goal_relation(self) -> tuple[tuple[str, str], ...]:
        """Declared (org goal, goal) pairs whose endpoints resolve."""
        org, goals = self.org_goal_ids, self.goal_ids
        return tuple((r.source, r.target) for r in self.relations
                     if r.source in org and r.target in goals)

    @property
    def metric_relation(self) -> tuple[tuple[str, str], ...]:
        """Declared (metric, goal) pairs whose endpoints resolve."""
        metrics, goals = self.metric_ids, self.goal_ids
        return tuple((r.source, r.target) for r in self.relations
                     if r.source in metrics and r.target in goals)


@dataclass(frozen=True)
class Connection:
    """``source`` uses ``target``; the relation pairs explain which goals of
    the target serve which goals (or organizational goals) of the source."""

    source: str
    target: str
    relation: tuple[ConnectionRelation, ...] = ()

    def resolved_relation(self, program: "Program") -> tuple[tuple[str, str], ...]:
        """Pairs (used goal, using ref) whose qualifiers, ownership, and goal
        kinds all check out for this connection's setup; anything else is a
        validator finding and carries no justification weight."""
        mods = program.modules_by_id
        used = mods.get(self.target)
        using = mods.get(self.source)
        if used is None or using is None:
            return ()
        refs = using.org_goal_ids if using.is_organizational else using.goal_ids
        return tuple(
            (r.goal, r.ref)
            for r in self.relation
            if r.goal_module == self.target and r.goal in used.goal_ids
            and r.ref_module == self.source and r.ref in refs
        )


@dataclass(frozen=True)
class Program:
    name: str
    modules: tuple[Module, ...] = ()
    connections: tuple[Connection, ...] = ()

    @property
    def modules_by_id(self) -> dict[str, Module]:
        """First declaration wins; duplicates are validator findings."""
        out: dict[str, Module] = {}
        for m in self.modules:
            out.setdefault(m.id, m)
        return out

    def module(self, module_id: str) -> Module:
        return self.modules_by_id[module_id]

    def used_by(self, module_id: str) -> list[str]:
        """Modules that ``module_id`` uses, in connection order."""
        mods = self.modules_by_id
        seen: list[str] = []
        for c in self.connections:
            if c.source == module_id and c.target != module_id \
                    and c.target in mods and c.target not in seen:
                seen.append(c.target)
        return seen

    @property
    def edge_set(self) -> set[tuple[str, str]]:
        """Distinct uses-edges with known, non-self endpoints."""
        mods = self.modules_by_id
        return {
            (c.source, c.target)
            for c in self.connections
            if c.source in mods and c.target in mods and c.source != c.target
        }

    @property
    def root_ids(self) -> frozenset[str]:
        """Modules used by no other module."""
        used = {t for _, t in self.edge_set}
        return frozenset(self.modules_by_id) - used


def is_well_defined(module: Module) -> tuple[bool, list[str]]:
    """A module is well defined when none of its required sets is empty.

    Outputs may legitimately be empty (a top module need not export
    anything); they are the exposed subset of the metrics, not a set of
    their own.
    """
    violations = []
    if not module.goals:
        violations.append("goals set is empty")
    if not module.metrics:
        violations.append("metrics set is empty")
    if module.is_organizational and not module.org_goals:
        violations.append("orggoals set is empty")
    return (not violations, violations)


def justified_goals(program: Program) -> tuple[set[tuple[str, str]], set[tuple[str, str]]]:
    """Least fixed point of the goal-justification rules.

    Returns ``(justified, grounded)`` where ``justified`` holds measurement
    goals ``(module, goal)`` and ``grounded`` holds organizational goals
    ``(module, org goal)``.  The rules:

    * org goals of root organizational modules are axioms (grounded);
    * an org goal of a non-root module is grounded when it is paired with a
      justified measurement goal of its own module;
    * a measurement goal is justified when some connection pairs it with a
      grounded org goal or justified goal of the using module, or (for
      organizational modules) when one of the module's own grounded org
      goals is paired with it.
    """
    mods = program.modules_by_id
    roots = program.root_ids
    justified: set[tuple[str, str]] = set()
    grounded: set[tuple[str, str]] = {
        (m.id, g.id)
        for m in mods.values()
        if m.is_organizational and m.id in roots
        for g in m.org_goals
    }
    resolved = [(c, c.resolved_relation(program)) for c in program.connections]

    changed = True
    while changed:
        changed = False
        for m in mods.values():
            if not m.is_organizational:
                continue
            for org_goal, goal in m.org_goal_relation:
                if (m.id, org_goal) in grounded and (m.id, goal) not in justified:
                    justified.add((m.id, goal))
                    changed = True
                if (m.id, goal) in justified and (m.id, org_goal) not in grounded:
                    grounded.add((m.id, org_goal))
                    changed = True
        for conn, pairs in resolved:
            using = mods.get(conn.source)
            if using is None:
                continue
            source_ok = grounded if using.is_organizational else justified
            for goal, ref in pairs:
                if (conn.source, ref) in source_ok and (conn.target, goal) not in justified:
                    justified.add((conn.target, goal))
                    changed = True
    return justified, grounded


def is_program(program: Program) -> tuple[bool, list[tuple[str, str]]]:
    """True when every measurement goal of every module is justified; the
    second element lists the ``(module, goal)`` pairs that are not."""
    justified, _ = justified_goals(program)
    unjustified = [
        (m.id, g.id)
        for m in program.modules_by_id.values()
        for g in m.goals
        if (m.id, g.id) not in justified
    ]
    return (not unjustified, unjustified)


def resolve_input(program: Program, module: Module, ref: MetricRef) -> list[tuple[str, str]]:
    """Candidate producers ``(module, metric)`` for an input reference,
    looked up among the outputs of the modules this module uses."""
    used = program.used_by(module.id)
    mods = program.modules_by_id
    if ref.module is not None:
        if ref.module in used and ref.metric in mods[ref.module].outputs:
            return [(ref.module, ref.metric)]
        return []
    return [(u, ref.metric) for u in used if ref.metric in mods[u].outputs]


def programs_equivalent(a: Program, b: Program) -> bool:
    """Equality up to declaration order of top-level items."""
    return (
        a.name == b.name
        and a.modules_by_id == b.modules_by_id
        and _connection_map(a) == _connection_map(b)
    )


def _connection_map(p: Program) -> dict[tuple[str, str], Connection]:
    out: dict[tuple[str, str], Connection] = {}
    for c in p.connections:
        out.setdefault((c.source, c.target), c)
    return out
