"""Exception types shared across the package."""


class PosextError(Exception):
    """Base class for all errors raised by this package."""


class NonHermitianInput(PosextError):
    """Input matrix is farther from Hermitian than the tolerance allows."""


class DimensionMismatch(PosextError):
    """Matrix dimensions are incompatible with the operation."""


class IdentityNotInSpan(PosextError):
    """Generator span does not contain the identity matrix."""


class NotSelfAdjointClosed(PosextError):
    """Complex generator span is not closed under the adjoint."""


class NonHermitianGenerator(PosextError):
    """A generator of a real self-adjoint system is not Hermitian."""


class ClosureNotReached(PosextError):
    """Algebra closure did not stabilize within the iteration cap."""


class NotInDomain(PosextError):
    """Argument is not in the domain system of the map."""


class DomainNotFull(PosextError):
    """Operation requires a map defined on the full matrix algebra."""


class NotInProductSpan(PosextError):
    """Element is not in the span of domain-basis x matrix-unit products."""


class NotPositiveAtIdentity(PosextError):
    """Image of the identity is not positive semidefinite."""


class NotPositiveOnDomain(PosextError):
    """A positivity violation witness was found on the domain."""


class ZeroMap(PosextError):
    """Image of the identity vanishes; no range to compress onto."""


class InconsistentAffine(PosextError):
    """Affine constraint system admits no solution."""


class BadCompositeDimension(PosextError):
    """Matrix side length does not factor as dim_h * dim_k."""


class InvalidSpec(PosextError):
    """Instance specification violates its own constraints."""
