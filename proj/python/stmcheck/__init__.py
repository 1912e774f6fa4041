"""Static contract checking of STM transactions.

Thin wrapper over the native module: programs go in as source text, reports
come back as plain dicts matching schema/report.schema.json.
"""

import json
from pathlib import Path

try:
    from ._stmcheck import check_source_json, info, purify
except ImportError:  # plain CMake builds leave the module next to the package
    from _stmcheck import check_source_json, info, purify

__all__ = ["check_source", "check_file", "purify", "info"]
__version__ = "0.1.0"


def check_source(text, file="<memory>", **options):
    """Check a program given as source text; returns the report dict.

    Options mirror the CLI flags: transaction, fuel, inline_depth, samples,
    seed, gamma_cap, witness_search.
    """
    return json.loads(check_source_json(text, file=file, **options))


def check_file(path, **options):
    """Check a .stm file; returns the report dict."""
    p = Path(path)
    return check_source(p.read_text(), file=str(p), **options)
