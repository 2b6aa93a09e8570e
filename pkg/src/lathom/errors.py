"""Exception types shared across the package.

Every failure mode that callers are expected to handle has its own class;
they all derive from :class:`LathomError` so the CLI can map them to exit
codes uniformly.
"""


class LathomError(Exception):
    """Base class for all package errors."""


class ParseError(LathomError):
    """Malformed input description (JSON schema violation, bad flag)."""


class VertexOutOfRectangle(LathomError):
    """A cube vertex escapes the rectangle a table is defined on."""


class ShapeMismatch(LathomError):
    """Two tables that must share a rectangle do not."""


class DomainMismatch(LathomError):
    """A table is not defined on the rectangle an operation requires."""


class PreconditionViolated(LathomError):
    """An operation's documented precondition fails on the given input."""


class RankMismatch(LathomError):
    """Lattice points or spectra of different ranks were mixed."""


class EmptySupport(LathomError):
    """An exponent support that must be nonempty is empty."""


class NonConvenient(LathomError):
    """A Newton diagram misses some coordinate axis."""


class InvalidAlgebra(LathomError):
    """Structure constants fail the commutative/associative/unital checks."""


class InvalidAction(LathomError):
    """A module action table is not an action of the given algebra."""


class NotClosed(LathomError):
    """A monomial support differs from its integral closure."""


class NotStrong(LathomError):
    """A kerb configuration lacks the strong containment property."""


class NotStable(LathomError):
    """A claimed conductor fails minimality or containment."""


class Inconsistent(LathomError):
    """Tabulated data contradicts itself (bad semigroup, bad heights)."""


class UnknownSuite(LathomError):
    """The verification suite name is not recognised."""


class CrossCheckError(LathomError):
    """An internal invariant failed; results must not be trusted."""
