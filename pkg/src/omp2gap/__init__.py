"""omp2gap: OpenMP-subset to GAP8-SDK-style C translator with a host shim."""

from .codegen import EmittedFile, TranslateOptions, translate_source
from .diagnostics import Diagnostic, DiagnosticError
from .frontend import parse_directive, scan_source
from .planner import iteration_count, plan_regions, static_partition

__version__ = "0.1.0"

__all__ = [
    "Diagnostic",
    "DiagnosticError",
    "EmittedFile",
    "TranslateOptions",
    "__version__",
    "iteration_count",
    "parse_directive",
    "plan_regions",
    "scan_source",
    "static_partition",
    "translate_source",
]
