"""Model-derived conformance tester for an HTTP/1.1 subset."""

from ._core import (
    mutants,
    oracle_check,
    replay,
    run,
    strong_compare,
    weak_compare,
)

__all__ = [
    "mutants",
    "oracle_check",
    "replay",
    "run",
    "strong_compare",
    "weak_compare",
]
