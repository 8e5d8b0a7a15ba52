"""Error types raised by the workbench."""


class SbrBenchError(Exception):
    """Base class for workbench errors."""


class SchemaError(SbrBenchError, ValueError):
    """Input file is missing a required column or header."""


class RowError(SbrBenchError, ValueError):
    """A data row holds an unusable value; message names the row."""


class DuplicateIdError(SbrBenchError, ValueError):
    """Two reports share an issue id within one dataset."""


class SizeError(SbrBenchError, ValueError):
    """A dataset is too small for the requested operation."""


class CoverageError(SbrBenchError, ValueError):
    """A predictions file does not cover exactly the expected ids."""
