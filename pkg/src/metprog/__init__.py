"""metprog: a specification language and static-analysis toolchain for
designing software measurement programs as modular structures."""

from .diagnostics import Diagnostic, Severity, SourceSpan
from .evolve import ProgramDiff, PromoteResult, diff, promote, skeleton_from_metrics
from .formatter import format_program
from .hierarchy import LevelMap, compute_levels, extract_subprogram, hierarchy_report
from .lint import LintConfig, lint, load_config
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
    is_program,
    is_well_defined,
    module_kind_from_objects,
)
from .parser import ParseResult, parse
from .render import RenderOptions, to_dot
from .trace import TraceChain, TraceStep, trace_down, trace_up
from .validator import check_connection_setup, validate, validate_program

__version__ = "0.1.0"

__all__ = [
    "Connection",
    "ConnectionRelation",
    "Diagnostic",
    "Goal",
    "LevelMap",
    "LintConfig",
    "Metric",
    "MetricRef",
    "Module",
    "ModuleKind",
    "ObjectKind",
    "ParseResult",
    "Program",
    "ProgramDiff",
    "PromoteResult",
    "Relation",
    "RenderOptions",
    "Severity",
    "SourceSpan",
    "TraceChain",
    "TraceStep",
    "check_connection_setup",
    "compute_levels",
    "diff",
    "extract_subprogram",
    "format_program",
    "hierarchy_report",
    "is_program",
    "is_well_defined",
    "lint",
    "load_config",
    "module_kind_from_objects",
    "parse",
    "promote",
    "skeleton_from_metrics",
    "to_dot",
    "trace_down",
    "trace_up",
    "validate",
    "validate_program",
]
