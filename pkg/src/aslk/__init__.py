"""aslk: compile Agile Formal Specification Language (ASL) files to K."""

from aslk.diagnostics import AslError, Diagnostic, Location, Severity
from aslk.metrics import MetricsRow, aggregate_reduction, count_effective_lines, reduction_ratio
from aslk.model import SpecDocument, check_document
from aslk.parser import SourceFile, dump_spec, load_spec, parse_spec
from aslk.resolver import ResolvedSpec, resolve_imports
from aslk.translator import EmissionConfig, KText, assemble_module

__version__ = "0.1.0"

__all__ = [
    "AslError",
    "Diagnostic",
    "EmissionConfig",
    "KText",
    "Location",
    "MetricsRow",
    "ResolvedSpec",
    "Severity",
    "SourceFile",
    "SpecDocument",
    "aggregate_reduction",
    "assemble_module",
    "check_document",
    "count_effective_lines",
    "dump_spec",
    "load_spec",
    "parse_spec",
    "reduction_ratio",
    "resolve_imports",
]
