"""Exception hierarchy for tetduffy."""


class TetDuffyError(Exception):
    """Base class for all errors raised by this package."""


# geometry
class NotEnoughCommonVertices(TetDuffyError):
    pass


class DegenerateTetrahedron(TetDuffyError):
    pass


# polyalg
class DegreeOverflow(TetDuffyError):
    pass


class BoundContainsVariable(TetDuffyError):
    pass


class UnexpectedVariable(TetDuffyError):
    pass


class UnassignedVariable(TetDuffyError):
    pass


# tables
class UnsupportedNCV(TetDuffyError):
    pass


# kernels
class NonpositiveRadius(TetDuffyError):
    pass


class NonpositiveX(TetDuffyError):
    pass


class OrderTooLow(TetDuffyError):
    pass


# reduction
class SingularityTooStrong(TetDuffyError):
    pass


class DegenerateGeometry(TetDuffyError):
    pass


class NegativeXSquared(TetDuffyError):
    pass


# formulations
class ZeroWavenumber(TetDuffyError):
    pass


# oracle
class NoConvergence(TetDuffyError):
    pass
