"""Exception hierarchy shared across the package."""


class FairsimError(Exception):
    """Base class for all package errors."""


class ParseError(FairsimError):
    """Malformed input file (bad arity, unparsable cell, empty data)."""


class ValidationError(FairsimError):
    """Input violates a documented precondition or schema invariant."""


class ParameterError(FairsimError):
    """Hyperparameter outside its allowed range."""


class UndefinedSimilarityError(FairsimError):
    """Similarity undefined because two rows share no observed feature."""


class UndefinedRateError(FairsimError):
    """Group rate undefined (no positives / negatives in a group)."""
