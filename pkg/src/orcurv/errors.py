"""Exception hierarchy shared across the package.

Everything derives from OrcError so callers (notably the CLI) can map
library failures to exit codes without enumerating individual classes.
"""


class OrcError(Exception):
    """Base class for all orcurv errors."""


# --- graph construction / ingestion -----------------------------------------

class ParseError(OrcError):
    """Input text or JSON does not match the declared format."""


class InvalidWeight(OrcError):
    """Edge weight is missing, non-positive, or not a finite number."""


class DuplicateEdge(OrcError):
    """The same undirected edge appears more than once."""


class SelfLoop(OrcError):
    """An edge connects a vertex to itself."""


class NotAnEdge(OrcError):
    """The requested vertex pair is not an edge of the graph."""


class EmptyNeighborhood(OrcError):
    """One endpoint has no neighbors besides the other endpoint."""


# --- transport solvers -------------------------------------------------------

class InfiniteCost(OrcError):
    """A cost entry is +inf (vertices in different components)."""


class NotATree(OrcError):
    """Tree-only routine invoked on a graph that is not a tree."""


class NonSquare(OrcError):
    """Assignment routine needs a square cost matrix."""


class TooLarge(OrcError):
    """Instance exceeds an exhaustive-enumeration guard."""


class MethodMismatch(OrcError):
    """Requested solver does not apply to the instance shape."""


# --- block-encoding simulator -------------------------------------------------

class SubnormTooSmall(OrcError):
    """Declared subnormalization is below the operator norm."""


class DimMismatch(OrcError):
    """Operands have incompatible dimensions."""


class BadFactor(OrcError):
    """Scaling factor must be > 1."""


class SpectrumOutOfRange(OrcError):
    """Encoded eigenvalues violate the declared spectral window."""


class NotDiagonal(OrcError):
    """Operation is restricted to diagonal encodings."""


class BadFactorization(OrcError):
    """Declared tensor factor dimensions do not match the state."""


class InexactEncoding(OrcError):
    """Unitary dilation requires an error-free encoding."""


# --- quantum pipeline ----------------------------------------------------------

class InfiniteDistance(OrcError):
    """Distance operator construction needs finite distances."""


class DegenerateAllZero(OrcError):
    """All distances are zero; no subnormalization exists."""


class IndexOutOfRange(OrcError):
    """Vertex or column index outside the valid range."""


class SizeMismatch(OrcError):
    """Neighbor index lists must have equal length."""


class DimensionCap(OrcError):
    """p^p exceeds the configured dimension cap."""


class DigitOutOfRange(OrcError):
    """A base-p digit lies outside [1, p]."""


class NotSquare(OrcError):
    """The p = q pipeline needs equally sized neighborhoods."""


class ZeroOverlap(OrcError):
    """Power-iteration start vector is orthogonal to the target eigenspace."""


# --- CLI -----------------------------------------------------------------------

class ConfigError(OrcError):
    """Command-line configuration is inconsistent or incomplete."""


class UnknownFixture(OrcError):
    """Requested fixture name is not defined."""
