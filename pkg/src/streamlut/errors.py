"""Exception hierarchy shared by all streamlut modules.

CLI exit-code mapping: ``UsageError`` -> 1, ``FormatError``/``DataError`` -> 2,
``NumericError`` -> 3.
"""


class StreamLutError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(StreamLutError):
    """A parameter block or network spec is inconsistent (bad shape, missing name)."""


class FormatError(StreamLutError):
    """A binary file does not conform to its declared format."""


class BadMagicError(FormatError):
    """File does not start with the expected 4-byte magic."""


class BadVersionError(FormatError):
    """File declares an unsupported format version."""


class TruncatedFileError(FormatError):
    """File ends before the declared payload is complete."""


class DuplicateNameError(FormatError):
    """A weights file names the same tensor twice."""


class DataError(StreamLutError):
    """Stream-level inconsistency (size mismatch, QP count, out-of-range index)."""


class NumericError(StreamLutError):
    """A non-finite value was produced or supplied where finite data is required."""


class UsageError(StreamLutError):
    """Invalid command-line invocation."""
