"""
Typed errors raised by the workbench modules.

Every error a module can raise on bad input or a broken invariant derives
from WorkbenchError; the command-line front end maps these to exit code 2.
"""


class WorkbenchError(Exception):
    pass


class InvalidProblemSize(WorkbenchError, ValueError):
    pass


class TileTooLarge(WorkbenchError, ValueError):
    pass


class MisalignedTile(WorkbenchError, ValueError):
    pass


class ColumnOutOfRange(WorkbenchError, ValueError):
    pass


class MisalignedGranule(WorkbenchError, ValueError):
    pass


class SizeMismatch(WorkbenchError, ValueError):
    pass


class NotInvertible(WorkbenchError, ValueError):
    pass


class LayoutError(WorkbenchError, ValueError):
    pass


class ShapeMismatch(WorkbenchError, ValueError):
    pass


class HazardUnavoidable(WorkbenchError, ValueError):
    pass


class TileShapeMismatch(WorkbenchError, ValueError):
    pass


class TokenOutOfRange(WorkbenchError, ValueError):
    pass


class MatrixFormatError(WorkbenchError, ValueError):
    pass


class CapacityExceeded(WorkbenchError):
    pass


class Deadlock(WorkbenchError):
    pass


class SimulationError(WorkbenchError):
    pass


class TracingDisabled(WorkbenchError):
    pass


class InvalidModelConfig(WorkbenchError, ValueError):
    pass


class InvalidArchConfig(WorkbenchError, ValueError):
    pass
