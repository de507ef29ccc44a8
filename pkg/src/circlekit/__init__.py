"""Desk-scale circle-method toolkit for linear spaces of fixed Gram discriminant on hypersurfaces."""

from circlekit.config import Budget, BudgetExceeded, CircleKitError

__version__ = "0.1.0"

__all__ = ["Budget", "BudgetExceeded", "CircleKitError", "__version__"]
