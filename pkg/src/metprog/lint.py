"""Good-design heuristics, reported as warnings.

All thresholds are tool configuration, not method constants: the approach
deliberately refuses to fix "limited in number", so the defaults here
(7 inputs/outputs, 2 object kinds) are overridable in a config file or on
the command line.

Warning rules::

    W101  organizational module at the lowest hierarchy level
    W102  too many inputs or outputs
    W103  too many kinds of objects of measurement
    W104  regular module measuring an organizational object
    W105  output metric no other module consumes (non-root modules)
    W106  connection with an empty relation
    W107  isolated module

I102 is an informational note flagging placeholder goals whose description
still starts with "TODO" (as produced by skeleton reverse-engineering), so
stubs cannot silently ship as finished designs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .diagnostics import Diagnostic, SpanIndex, sort_diagnostics, span_at
from .hierarchy import find_cycle, hierarchy_report
from .model import ObjectKind, Program, resolve_input

ALL_LINT_CODES = frozenset({
    "W101", "W102", "W103", "W104", "W105", "W106", "W107", "I102",
})


@dataclass(frozen=True)
class LintConfig:
    max_inputs: int = 7
    max_outputs: int = 7
    max_object_kinds: int = 2
    enabled: frozenset[str] = field(default=ALL_LINT_CODES)

    def disable(self, codes: frozenset[str] | set[str]) -> "LintConfig":
        return replace(self, enabled=self.enabled - frozenset(codes))


def load_config(path: str | Path) -> LintConfig:
    """Read a key/value config file.

    Recognized keys: ``max_inputs``, ``max_outputs``, ``max_object_kinds``
    (integers) and ``disable = [W105, W106]``.  ``#`` starts a comment.
    """
    config = LintConfig()
    for number, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not value:
            raise ValueError(f"{path}:{number}: expected 'key = value'")
        if key in ("max_inputs", "max_outputs", "max_object_kinds"):
            try:
                number_value = int(value)
            except ValueError:
                raise ValueError(f"{path}:{number}: {key} must be an integer") from None
            if number_value < 1:
                raise ValueError(f"{path}:{number}: {key} must be >= 1")
            config = replace(config, **{key: number_value})
        elif key == "disable":
            codes = {c.strip().strip('"') for c in value.strip("[]").split(",") if c.strip()}
            unknown = codes - ALL_LINT_CODES
            if unknown:
                raise ValueError(f"{path}:{number}: unknown lint codes: {', '.join(sorted(unknown))}")
            config = config.disable(codes)
        else:
            raise ValueError(f"{path}:{number}: unknown key '{key}'")
    return config


def lint(program: Program, config: LintConfig | None = None,
         spans: SpanIndex | None = None) -> list[Diagnostic]:
    """Run the enabled lint rules.  The program should already be free of
    validation errors; lint findings are never errors themselves."""
    config = config or LintConfig()
    findings: list[Diagnostic] = []
    mods = program.modules_by_id

    if "W101" in config.enabled and find_cycle(program) is None:
        findings.extend(d for d in hierarchy_report(program, spans) if d.code == "W101")

    consumed: set[tuple[str, str]] = set()
    for module in mods.values():
        for ref in module.inputs:
            consumed.update(resolve_input(program, module, ref))

    connected: set[str] = set()
    for connection in program.connections:
        connected.add(connection.source)
        connected.add(connection.target)
    roots = program.root_ids

    for module in mods.values():
        module_span = span_at(spans, ("module", module.id))
        if "W102" in config.enabled:
            if len(module.inputs) > config.max_inputs:
                findings.append(Diagnostic(
                    "W102",
                    f"module '{module.id}' has {len(module.inputs)} inputs"
                    f" (limit {config.max_inputs}); consider splitting it",
                    module_span,
                ))
            if len(module.outputs) > config.max_outputs:
                findings.append(Diagnostic(
                    "W102",
                    f"module '{module.id}' has {len(module.outputs)} outputs"
                    f" (limit {config.max_outputs}); consider splitting it",
                    module_span,
                ))
        if "W103" in config.enabled and len(module.objects) > config.max_object_kinds:
            findings.append(Diagnostic(
                "W103",
                f"module '{module.id}' encompasses {len(module.objects)} kinds of"
                f" objects of measurement (limit {config.max_object_kinds})",
                module_span,
            ))
        if "W104" in config.enabled and not module.is_organizational \
                and ObjectKind.ORGANIZATION in module.objects:
            findings.append(Diagnostic(
                "W104",
                f"regular module '{module.id}' measures an organizational object;"
                " consider making the organization explicit",
                module_span,
            ))
        if "W105" in config.enabled and module.id not in roots:
            for index, output in enumerate(module.outputs):
                if (module.id, output) not in consumed:
                    findings.append(Diagnostic(
                        "W105",
                        f"output '{output}' of module '{module.id}' is consumed"
                        " by no other module",
                        span_at(spans, ("output", module.id, index), module_span),
                    ))
        if "W107" in config.enabled and module.id not in connected:
            findings.append(Diagnostic(
                "W107",
                f"module '{module.id}' is isolated: it neither uses nor is used"
                " by any module",
                module_span,
            ))
        if "I102" in config.enabled:
            for goal in module.org_goals + module.goals:
                if goal.description and goal.description.startswith("TODO"):
                    key = ("orggoal" if goal in module.org_goals else "goal",
                           module.id, goal.id)
                    findings.append(Diagnostic(
                        "I102",
                        f"goal '{goal.id}' of module '{module.id}' carries a TODO"
                        " placeholder description",
                        span_at(spans, key, module_span),
                    ))

    if "W106" in config.enabled:
        occ: dict[tuple[str, str], int] = {}
        for connection in program.connections:
            endpoints = (connection.source, connection.target)
            n = occ.get(endpoints, 0)
            occ[endpoints] = n + 1
            if not connection.relation:
                key = ("connection",) + endpoints if n == 0 \
                    else ("connection",) + endpoints + (n,)
                findings.append(Diagnostic(
                    "W106",
                    f"connection '{connection.source} -> {connection.target}'"
                    " declares no goal relation",
                    span_at(spans, key),
                ))

    return sort_diagnostics(findings)
