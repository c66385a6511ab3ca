"""
Created on Mon Oct 6 09:00:00 2025

@author: Anna Grim
@email: anna.grim@alleninstitute.org

Exceptions raised by the routines in this package. Every error derives from
SimplexDilationError so that callers (e.g. the command line) can catch the
whole family at once.

"""


class SimplexDilationError(Exception):
    """Base class for all errors raised by this package."""


# --- Geometry ---
class DegenerateEdgeError(SimplexDilationError):
    """Raised when an edge is requested between two equal lattice points."""


class DegenerateSimplexError(SimplexDilationError):
    """Raised when a vertex set is not full-dimensional."""


class InvalidTranslationError(SimplexDilationError):
    """Raised when a translated dilation would leave its parent simplex."""


class PreconditionError(SimplexDilationError):
    """Raised when the arguments violate a documented precondition."""


# --- Budgets ---
class BudgetExceededError(SimplexDilationError):
    """
    Raised when an enumeration would exceed its configured budget.

    Attributes
    ----------
    limit : int
        Configured budget.
    required : int
        Size of the enumeration that was refused.
    report : strategy_util.StrategyReport or None
        Partial result of the computation that ran out of budget, if any.
    """

    def __init__(self, what, limit, required, report=None):
        """
        Instantiates a BudgetExceededError.

        Parameters
        ----------
        what : str
            Name of the enumeration that was refused.
        limit : int
            Configured budget.
        required : int
            Size that the enumeration would have required.
        report : strategy_util.StrategyReport, optional
            Partial result. Default is None.

        Returns
        -------
        None
        """
        super().__init__(
            f"Budget Exceeded - {what}: required={required}, limit={limit}"
        )
        self.limit = limit
        self.required = required
        self.report = report


# --- Internal consistency ---
class LpVerificationError(SimplexDilationError):
    """Raised when an LP solution fails exact re-verification."""


class CertificationError(SimplexDilationError):
    """
    Raised when a cover that is guaranteed to be complete is not certified.

    Attributes
    ----------
    certificate : coverage_util.Certificate
        Certificate returned for the offending cover, including a witness.
    """

    def __init__(self, message, certificate=None):
        """
        Instantiates a CertificationError.
        """
        super().__init__(message)
        self.certificate = certificate


class ClassificationError(SimplexDilationError):
    """
    Raised when a simplex cannot be matched to any covering strategy.

    Attributes
    ----------
    diagnostics : dict
        Edge lengths and coefficients that led to the failure.
    """

    def __init__(self, message, diagnostics=None):
        """
        Instantiates a ClassificationError.
        """
        super().__init__(message)
        self.diagnostics = diagnostics or dict()


class ClosureViolationError(SimplexDilationError):
    """Raised when a covered simplex fails the integral closure check."""

    def __init__(self, message, report=None):
        """
        Instantiates a ClosureViolationError.
        """
        super().__init__(message)
        self.report = report


# --- Files ---
class SimplexFileError(SimplexDilationError):
    """
    Raised when a simplex or cover file cannot be parsed.

    Attributes
    ----------
    path : str
        Path of the offending file.
    field : str
        Field in which the problem was detected.
    """

    def __init__(self, path, field, message):
        """
        Instantiates a SimplexFileError.
        """
        super().__init__(f"File is invalid - {path} [{field}]: {message}")
        self.path = path
        self.field = field
