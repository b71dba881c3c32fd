"""Exception hierarchy.

``InputError`` subclasses describe bad user input (CLI exit code 1);
``ComputationError`` subclasses describe inputs that parse fine but on which a
metric is undefined (CLI exit code 2).
"""


class TopoMetricsError(Exception):
    """Base class for every error raised by this package."""


class InputError(TopoMetricsError, ValueError):
    pass


class ComputationError(TopoMetricsError, ArithmeticError):
    pass


# input errors


class NonFiniteInput(InputError):
    pass


class NonFiniteValue(NonFiniteInput):
    pass


class ParseError(InputError):
    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column


class ShapeError(InputError):
    pass


class BadParams(InputError):
    pass


class LengthMismatch(InputError):
    pass


class MissingColumn(InputError):
    pass


# computation errors


class ZeroNormRow(ComputationError):
    pass


class DegenerateCloud(ComputationError):
    pass


class ZeroDiameter(ComputationError):
    pass


class AllZeroMatrix(ComputationError):
    pass


class RankTooLow(ComputationError):
    pass


class ZeroVariance(ComputationError):
    pass


class AllTied(ZeroVariance):
    pass


class TooLarge(ComputationError):
    pass
