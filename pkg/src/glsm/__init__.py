"""Numerical checks for lightlike submanifolds of golden semi-Riemannian manifolds."""

__version__ = "0.1.0"

from .config import RunConfig, parse_config, to_toml  # noqa: E402
from .errors import GLSMError, NotFound, ParseError, ValidationError  # noqa: E402
from .report import Report, emit_report, run_analysis, run_fault_controls  # noqa: E402
from .search import search_example  # noqa: E402

__all__ = [
    "GLSMError",
    "NotFound",
    "ParseError",
    "Report",
    "RunConfig",
    "ValidationError",
    "__version__",
    "emit_report",
    "parse_config",
    "run_analysis",
    "run_fault_controls",
    "search_example",
    "to_toml",
]
