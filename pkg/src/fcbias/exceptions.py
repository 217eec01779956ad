"""Exception hierarchy.

Three families, which the command-line layer maps to exit codes:

* :class:`DataError` -- malformed or incomplete inputs (exit 1).
* :class:`InsufficientData` -- a slice is too small for a requested
  statistic; reported per row and otherwise skipped.
* :class:`NumericalError` -- a linear-algebra failure in a requested
  slice (exit 2).
"""

from __future__ import annotations


class FcbiasError(Exception):
    """Base class for all package errors."""


class DataError(FcbiasError, ValueError):
    pass


class SchemaError(DataError):
    """A CSV row or config entry does not match its schema."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None,
                 source: str | None = None):
        self.row = row
        self.column = column
        self.source = source
        where = []
        if source:
            where.append(str(source))
        if row is not None:
            where.append(f"row {row}")
        if column:
            where.append(f"column {column!r}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class DuplicateCell(SchemaError):
    pass


class OutOfRange(DataError):
    pass


class MissingMonths(DataError):
    def __init__(self, months):
        self.months = tuple(months)
        shown = ", ".join(str(m) for m in self.months[:12])
        more = "" if len(self.months) <= 12 else f" (+{len(self.months) - 12} more)"
        super().__init__(f"missing months: {shown}{more}")


class MissingQuarters(DataError):
    def __init__(self, quarters):
        self.quarters = tuple(quarters)
        super().__init__("missing quarters: " + ", ".join(str(q) for q in self.quarters))


class NonPositiveLabor(DataError):
    pass


class MissingOriginInflation(DataError):
    pass


class NoTargetEpisode(DataError):
    pass


class ConfigError(DataError):
    pass


class InsufficientData(FcbiasError, ValueError):
    pass


class TooFewObservations(InsufficientData):
    pass


class ConstantRegressor(InsufficientData):
    pass


class RegimeTooSmall(InsufficientData):
    def __init__(self, state: int, count: int, reason: str = "too few observations"):
        self.state = state
        self.count = count
        super().__init__(f"regime d={state}: {reason} (n={count})")


class EmptyTestSet(InsufficientData):
    pass


class EmptySubperiod(InsufficientData):
    pass


class NumericalError(FcbiasError, ArithmeticError):
    pass


class RankDeficient(NumericalError):
    def __init__(self, columns):
        self.columns = tuple(columns)
        super().__init__("design matrix is rank deficient; collinear columns: "
                         + ", ".join(str(c) for c in self.columns))


class SingularRestriction(NumericalError):
    pass


class ZeroVariance(NumericalError):
    pass
