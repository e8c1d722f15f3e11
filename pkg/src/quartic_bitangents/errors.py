"""Exception types shared across the package."""


class QuarticBitangentsError(Exception):
    """Base class for all package-specific errors."""


class InvalidInput(QuarticBitangentsError, ValueError):
    """Malformed user input: bad period matrix, bad characteristic text, bad config."""


class RadiusOverflow(QuarticBitangentsError):
    """The requested truncation tolerance needs a summation radius above the hard cap."""


class OddCharacteristic(QuarticBitangentsError, ValueError):
    """A theta constant was requested for an odd characteristic (it vanishes identically)."""


class EvenCharacteristic(QuarticBitangentsError, ValueError):
    """A theta gradient at z=0 was requested for an even characteristic (it is zero)."""


class SyzygeticTriple(QuarticBitangentsError, ValueError):
    """A syzygetic triple was passed where an azygetic one is required."""


class SingularSystem(QuarticBitangentsError):
    """The 3x3 gradient system behind a Cramer solve is numerically singular."""


class DegenerateDenominator(QuarticBitangentsError):
    """A Jacobian-determinant denominator of the construction is numerically zero."""


class ZeroMinor(QuarticBitangentsError):
    """A 4x4 minor expanded to the zero quartic."""


class ZeroForm(QuarticBitangentsError, ValueError):
    """A linear or binary form expected to be nonzero is identically zero."""


class RetriesExhausted(QuarticBitangentsError):
    """Random period-matrix sampling failed the admissibility filter too many times."""


class DegenerateTau(QuarticBitangentsError):
    """The period matrix is too close to the vanishing locus of an even theta constant."""
