"""Exception hierarchy shared by every module of the package."""


class RisnfError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(RisnfError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateInputError(RisnfError, ValueError):
    """Input is formally valid but leaves nothing to compute with."""


class NotPSDError(RisnfError, ValueError):
    """A matrix expected to be positive semidefinite is not."""


class UnsupportedConfigurationError(RisnfError, ValueError):
    """The requested configuration lies outside what the models support."""


class IllConditionedCouplingError(RisnfError, ArithmeticError):
    """``Z + r_d I`` is too close to singular to invert reliably."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class UnderdeterminedDesignError(RisnfError, ArithmeticError):
    """The training design does not make the cascaded channel identifiable."""


class SubspaceMismatchError(RisnfError, ArithmeticError):
    """The reduced Gram of an RS-LS basis is singular for the given design."""


class EmptySubspaceError(RisnfError, ValueError):
    """Subspace selection kept no eigenvectors."""


class UnsupportedFastPathError(RisnfError, ValueError):
    """A dense fallback was requested at a size where it is refused."""


class ConfigError(RisnfError, ValueError):
    """An experiment configuration is malformed."""


class MatrixFormatError(RisnfError, ValueError):
    """A binary matrix file has a bad header or payload size."""
