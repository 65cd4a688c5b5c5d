"""Exception types shared across the library.

Every geometric failure mode has its own class so callers can react to the
specific condition; all of them derive from DiscreteGeometryError.
"""


class DiscreteGeometryError(Exception):
    """Base class for geometric and numerical failure modes."""


class NotClosed(DiscreteGeometryError):
    """An edge form has a nonzero oriented sum around a face."""

    def __init__(self, face, residual):
        super().__init__(f"edge form not closed at face {face}: residual {residual:.3e}")
        self.face = face
        self.residual = residual


class DegenerateQuad(DiscreteGeometryError):
    """A cross-ratio denominator vanishes for the given quad."""


class PoleOnVertex(DiscreteGeometryError):
    """A fractional linear map sends a vertex value to infinity."""


class RegularityViolation(DiscreteGeometryError):
    """A map fails the regularity requirements (cross ratio in {0,1,inf} or a zero edge)."""


class Inconsistent(DiscreteGeometryError):
    """A propagated quantity fails to close around a face."""

    def __init__(self, face, residual):
        super().__init__(f"propagation inconsistent at face {face}: residual {residual:.3e}")
        self.face = face
        self.residual = residual


class InvalidParameter(DiscreteGeometryError):
    """A spectral-type parameter hits an excluded value."""


class NegativeBranch(DiscreteGeometryError):
    """A square-root argument is negative in real-branch mode."""


class NotFlat(DiscreteGeometryError):
    """A connection fails the per-face flatness condition."""


class NotHermitian(DiscreteGeometryError):
    """A matrix expected to be Hermitian is not, beyond tolerance."""


class SingularEdge(DiscreteGeometryError):
    """An edge quantity degenerates (zero derivative or zero chord)."""


class NotUnitSpacelike(DiscreteGeometryError):
    """A reflection vector does not have Minkowski square +1."""


class NoIntersection(DiscreteGeometryError):
    """Two contact elements do not share a curvature sphere."""


class CoincidentPoints(DiscreteGeometryError):
    """The two legs of a point pair coincide at a vertex."""

    def __init__(self, vertex):
        super().__init__(f"point pair coincides at vertex {vertex}")
        self.vertex = vertex


class EntryMismatch(DiscreteGeometryError):
    """Transition-matrix entries violate the point-pair edge relations."""

    def __init__(self, edge, residual):
        super().__init__(f"connection entries inconsistent on edge {edge}: residual {residual:.3e}")
        self.edge = edge
        self.residual = residual


class NotIntegrable(DiscreteGeometryError):
    """A multiplicative difference equation fails to close."""

    def __init__(self, edge, residual):
        super().__init__(f"gauge recursion not integrable on edge {edge}: residual {residual:.3e}")
        self.edge = edge
        self.residual = residual


class DegenerateStep(DiscreteGeometryError):
    """A propagation step has no admissible solution."""


class WrongSheet(DiscreteGeometryError):
    """A point lies on the backward sheet of the hyperboloid."""


class NotUnitTimelike(DiscreteGeometryError):
    """A vector expected on the unit hyperboloid is not unit timelike."""


class InputError(Exception):
    """Malformed input document or command-line usage (CLI exit code 2)."""
