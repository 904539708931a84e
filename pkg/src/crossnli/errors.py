"""Exception types shared across the package."""


class CrossNliError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(CrossNliError):
    """Tensor shapes are incompatible with the requested operation."""


class NumericalError(CrossNliError):
    """Non-finite or otherwise invalid numerical input."""


class LabelError(CrossNliError):
    """Class label or class index outside the allowed set."""


class OptimizerStateError(CrossNliError):
    """Optimizer invoked with missing or inconsistent state."""


class EmptyInputError(CrossNliError):
    """Text input is empty after whitespace normalization."""


class TokenizationError(CrossNliError):
    """Token id outside the vocabulary range."""


class DataError(CrossNliError):
    """Dataset-level problem: empty dataset, mismatched lengths, deficits."""


class ParseError(DataError):
    """Malformed dataset record; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class CoverageError(DataError):
    """A word falls outside the substitution map and passthrough is off."""


class TranslationError(CrossNliError):
    """Translator failed on a specific example; carries its batch index."""

    def __init__(self, message: str, index: int):
        super().__init__(f"example {index}: {message}")
        self.index = index


class CheckpointFormatError(CrossNliError):
    """Bad magic bytes or unsupported checkpoint version."""


class CheckpointIntegrityError(CrossNliError):
    """Checkpoint tensor table is truncated or inconsistent."""


class StaleCacheError(CrossNliError):
    """Embedding cache was built under a different encoder checkpoint."""
