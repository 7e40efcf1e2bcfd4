"""Exception hierarchy shared by every module.

Parameter problems raise ``DomainError`` (a ``ValueError``); numerical
breakdowns raise ``NumericalError``.  The CLI maps the two families to
distinct exit codes.
"""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class RegimeError(DomainError):
    """Parameters are valid in general but outside the regime an operation needs."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed to reach its contract."""


class NotPositiveSemidefiniteError(NumericalError):
    def __init__(self, message, pivot):
        super().__init__(message)
        self.pivot = pivot


class TruncationError(NumericalError):
    def __init__(self, message, achieved):
        super().__init__(message)
        self.achieved = achieved
