"""Exception types shared across the package.

Every domain error carries a witness (the offending square, edge pair,
vertex, ...) in its message so callers and the command-line tool can
report exactly which object broke which rule.
"""


class KGraphError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(KGraphError):
    """A text input could not be parsed (CLI exit code 2)."""


class BadSquare(KGraphError):
    """A commuting-square quadruple has a color or endpoint mismatch."""

    def __init__(self, square, reason):
        self.square = tuple(square)
        self.reason = reason
        super().__init__(f"square {self.square}: {reason}")


class NotBijective(KGraphError):
    """A composable two-edge path is unmatched or matched twice."""

    def __init__(self, pair, reason):
        self.pair = tuple(pair)
        self.reason = reason
        super().__init__(f"composable pair {self.pair}: {reason}")


class FactorizationFailure(KGraphError):
    """Two square-rewriting routes of the same path disagree."""

    def __init__(self, path, forms):
        self.path = tuple(path)
        self.forms = tuple(forms)
        super().__init__(
            f"path {self.path} has {len(self.forms)} distinct sorted forms: "
            f"{self.forms}"
        )


class NotComposable(KGraphError):
    """Consecutive edges in a path do not meet end to end."""

    def __init__(self, index, detail=""):
        self.index = index
        msg = f"edges at positions {index} and {index + 1} do not compose"
        super().__init__(msg + (f": {detail}" if detail else ""))


class DegreeMismatch(KGraphError):
    """A requested degree split does not add up."""


class NotConnected(KGraphError):
    """Operation requires a connected k-graph."""


class TargetMismatch(KGraphError):
    """Cocycle values do not live in the supplied group."""


class NotFunctorial(KGraphError):
    """A map of k-graphs fails to preserve structure."""


class NotLocallyInjective(KGraphError):
    """Two edges at a fiber vertex collapse to one downstairs."""

    def __init__(self, vertex, color, detail=""):
        self.vertex = vertex
        self.color = color
        msg = f"at vertex {vertex!r}, color {color}"
        super().__init__(msg + (f": {detail}" if detail else ""))


class NotLocallySurjective(KGraphError):
    """An edge downstairs has no lift at a fiber vertex."""

    def __init__(self, vertex, color, detail=""):
        self.vertex = vertex
        self.color = color
        msg = f"at vertex {vertex!r}, color {color}"
        super().__init__(msg + (f": {detail}" if detail else ""))


class NotSurjective(KGraphError):
    """A covering candidate misses part of the base."""


class SquareBroken(KGraphError):
    """A square upstairs does not map to a square downstairs."""

    def __init__(self, square):
        self.square = tuple(square)
        super().__init__(f"image of square {self.square} is not a square")


class BasepointMismatch(KGraphError):
    """The chosen fiber vertices sit over different base vertices."""


class NotFree(KGraphError):
    """A group action fixes a vertex."""

    def __init__(self, vertex):
        self.vertex = vertex
        super().__init__(f"action fixes vertex {vertex!r}")


class NotClosed(KGraphError):
    """A list of automorphisms does not form a group."""


class CocycleInvalid(KGraphError):
    """A cocycle fails the square identity in the realized group."""

    def __init__(self, square):
        self.square = tuple(square)
        super().__init__(f"square {self.square} fails in the realized group")


class CosetOverflow(KGraphError):
    """Coset enumeration exceeded its budget."""

    def __init__(self, limit):
        self.limit = limit
        super().__init__(f"more than {limit} cosets live during enumeration")
