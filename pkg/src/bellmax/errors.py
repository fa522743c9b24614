"""Exception types shared across the package."""


class DensityFormatError(ValueError):
    """Density-matrix file is malformed (bad header, token count, syntax)."""


class DensityValidationError(ValueError):
    """Matrix parsed fine but violates a state invariant.

    ``invariant`` is one of "hermiticity", "trace", "psd".
    """

    def __init__(self, invariant, message):
        super().__init__(message)
        self.invariant = invariant


class SpecParseError(ValueError):
    """A textual state/operator descriptor could not be parsed.

    ``pos`` is the character offset where parsing failed.
    """

    def __init__(self, message, pos=0):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos
