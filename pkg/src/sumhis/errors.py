"""Exception hierarchy.

Every error carries a short ``category`` string; the command line prints it
so that callers can dispatch on failures without parsing prose.
"""

from __future__ import annotations


class SumhisError(Exception):
    category = "error"


class InputError(SumhisError):
    """Unreadable or malformed input data."""

    category = "input"


class FormatError(SumhisError):
    """A model, label, or vector file does not follow its text format."""

    category = "format"


class ConfigError(SumhisError, ValueError):
    category = "config"


class DimensionError(SumhisError, ValueError):
    category = "dimension"


class OracleError(SumhisError):
    category = "oracle"


class TrainingError(SumhisError):
    category = "training"
