"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Array shapes do not agree."""


class DomainError(ValueError):
    """Input outside the domain of an operation (non-finite, non-Hermitian, ...)."""


class SingularMatrixError(ValueError):
    """Matrix is singular or not positive definite."""

    def __init__(self, message, smallest_eigenvalue=None):
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue


class DegenerateInputError(ValueError):
    """Quantity undefined for this input, e.g. effective rank of a zero matrix."""
