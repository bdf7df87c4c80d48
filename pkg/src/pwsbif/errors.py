"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, numerical failures with 3.
"""


class PwsbifError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PwsbifError):
    """Bad user input: unknown names, malformed expressions, invalid config."""


class ExpressionParseError(ConfigurationError):
    """Expression string failed to parse; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class OutOfChartError(PwsbifError):
    """Coordinates outside the validity region of a chart or transition."""


class DegenerateError(PwsbifError):
    """A nondegeneracy condition failed (vanishing denominator, double zero)."""


class DetectionError(PwsbifError):
    """A numerical detector (root-find, Newton, bisection) failed to converge."""


class BudgetError(PwsbifError):
    """Integration exceeded its time budget. Carries the partial trajectory."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class StiffnessError(PwsbifError):
    """Step size underflow; the problem is too stiff for the explicit solver."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class NoCycleError(PwsbifError):
    """A closed orbit cannot exist for the requested configuration."""
