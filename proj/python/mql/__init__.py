"""Python access to the MQL engine.

``run`` executes a program and returns plain Python structures; ``emit``
returns the backend scripts instead of executing.
"""

from ._core import (
    MqlError,
    fit_linear,
    parse,
    permutation,
    pretty,
    run,
    split_counts,
)


def emit(source, **options):
    """Return {statement index: script text} for every statement of ``source``."""
    options["backend"] = "emit"
    report = run(source, **options)
    return {s["index"]: s["script"] for s in report["statements"] if s.get("script")}


__all__ = ["MqlError", "emit", "fit_linear", "parse", "permutation", "pretty", "run", "split_counts"]
