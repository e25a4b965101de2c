"""Utility functions."""

from .formatting import db_to_linear, dbm_to_mw, format_float, format_runtime

__all__ = [
    "db_to_linear",
    "dbm_to_mw",
    "format_float",
    "format_runtime",
]
