"""DOT emission for module diagrams.

Regular modules render as plain boxes, organizational ones with a doubled
border (``peripheries=2``), and every connection becomes an arrow from the
using module to the used one.  Output is deterministic: nodes sorted by id,
edges by endpoint pair.
"""

from __future__ import annotations

from dataclasses import dataclass

from .hierarchy import compute_levels
from .model import Program

_DOT_KEYWORDS = frozenset({"graph", "digraph", "subgraph", "node", "edge", "strict"})


@dataclass(frozen=True)
class RenderOptions:
    show_levels: bool = False
    rankdir: str = "TB"  # "TB" or "LR"


def _dot_id(name: str) -> str:
    if not name or name.lower() in _DOT_KEYWORDS:
        return f'"{name}"'
    return name


def to_dot(program: Program, options: RenderOptions | None = None) -> str:
    """Render the program's module diagram as a DOT digraph."""
    options = options or RenderOptions()
    mods = program.modules_by_id
    lines = [f"digraph {_dot_id(program.name)} {{"]
    if options.rankdir != "TB":
        lines.append(f"  rankdir={options.rankdir};")
    lines.append("  node [shape=box];")
    for module_id in sorted(mods):
        if mods[module_id].is_organizational:
            lines.append(f"  {_dot_id(module_id)} [peripheries=2];")
        else:
            lines.append(f"  {_dot_id(module_id)};")
    if options.show_levels:
        level_map = compute_levels(program)
        by_level: dict[int, list[str]] = {}
        for module_id, level in level_map.levels.items():
            by_level.setdefault(level, []).append(module_id)
        for level in sorted(by_level):
            members = "".join(f" {_dot_id(m)};" for m in sorted(by_level[level]))
            lines.append(f"  {{ rank=same;{members} }}")
    for connection in sorted(program.connections, key=lambda c: (c.source, c.target)):
        lines.append(f"  {_dot_id(connection.source)} -> {_dot_id(connection.target)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
