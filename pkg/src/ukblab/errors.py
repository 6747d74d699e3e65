"""
Exceptions raised by :mod:`ukblab`.

Every error is a :class:`ValueError` subclass, so callers that only care
about "bad input" can keep catching :class:`ValueError`; callers that need
to tell failures apart can catch the specific class.
"""


class UkbError(ValueError):
    """Base class for all ukblab errors."""


class NonFiniteEntries(UkbError):
    """Matrix or vector contains NaN or infinite entries."""


class NotHermitian(UkbError):
    """Matrix is not Hermitian within tolerance."""


class DimensionMismatch(UkbError):
    """Operands have incompatible shapes."""


class AmbientTooLarge(UkbError):
    """Ambient dimension exceeds the configured limit."""


class DegenerateSample(UkbError):
    """A generic element drawn for a spectral decomposition had colliding
    eigenvalue clusters on every attempt."""


class InconsistentAlgebra(UkbError):
    """A certified post-condition of an algebra construction failed."""


class ElementNotInAlgebra(UkbError):
    """Matrix does not lie in the algebra."""


class NotProjection(UkbError):
    """Matrix is not a nonzero self-adjoint idempotent."""


class NotSubalgebra(UkbError):
    """Candidate algebra is not contained in the parent algebra."""


class NotPositive(UkbError):
    """Functional is not positive; ``eigenvalue`` holds the violating
    Gram matrix eigenvalue."""

    def __init__(self, message: str, eigenvalue: float):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class NotNormalized(UkbError):
    """Functional does not take the value 1 on the unit."""


class NotPure(UkbError):
    """State is not pure, or its top eigenvalue is degenerate."""


class PurityMismatch(UkbError):
    """Density-rank and GNS-irreducibility purity tests disagree."""


class UnknownBlock(UkbError):
    """Spectrum label does not name a block of the algebra."""


class UnknownBaseIndex(UkbError):
    """Subset is not contained in the base of a bundle."""


class PointNotOnSubmanifold(UkbError):
    """Ray does not lie in the subspace of a projective submanifold."""


class EmptyCandidate(UkbError):
    """Tangent-span candidate has no subspaces."""


class InconsistentSamples(UkbError):
    """Sampled values are not the transform of any algebra element."""


class IllConditionedFrame(UkbError):
    """Tomography design matrix condition number exceeds the bound."""


class VanishesOnB(UkbError):
    """Pure state vanishes on the hereditary subalgebra."""


class FullCorner(UkbError):
    """Corner projection has full rank on the fiber, so there is no
    orthogonal direction to move in."""


class BadDirection(UkbError):
    """Direction vector is not a unit vector orthogonal to the corner."""


class NotOnSphere(UkbError):
    """State does not lie on the requested distance sphere."""


class SpecError(UkbError):
    """Malformed JSON spec."""
