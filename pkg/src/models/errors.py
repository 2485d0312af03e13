from typing import Any, Dict, Optional


class PairGeometryError(Exception):
    """Base error for every failure raised by the services."""

    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'error': type(self).__name__,
            'message': self.message,
            'details': self.details,
        }


# Exit code 2: the input itself is unusable

class InvalidInput(PairGeometryError):
    exit_code = 2


class MalformedMatrix(InvalidInput):
    pass


class NotHermitian(InvalidInput):
    pass


class NotAProjection(InvalidInput):
    pass


class NotPositive(InvalidInput):
    pass


class IllConditionedGram(InvalidInput):
    pass


class InvalidParameter(InvalidInput):
    pass


# Exit code 3: well-formed input outside an operation's domain

class PreconditionViolated(PairGeometryError):
    exit_code = 3


class SpectralError(PreconditionViolated):
    pass


class DomainError(PreconditionViolated):
    pass


class SingularSign(PreconditionViolated):
    pass


class BranchCut(PreconditionViolated):
    pass


class NotAContraction(PreconditionViolated):
    pass


class EmptyGenericPart(PreconditionViolated):
    pass


class DegenerateAngle(PreconditionViolated):
    pass


class AnticommutationViolated(PreconditionViolated):
    pass


class NotCodiagonal(PreconditionViolated):
    pass


class NotInCommutant(PreconditionViolated):
    pass


class NotCommutingWithGamma(PreconditionViolated):
    pass


class MismatchedDifference(PreconditionViolated):
    pass


class DegenerateSpectrum(PreconditionViolated):
    pass


# Exit code 1: a certified identity did not hold

class InvariantFailure(PairGeometryError):
    exit_code = 1


class CertificationFailed(InvariantFailure):
    pass


class InconsistentReport(InvariantFailure):
    pass


class CertificateFailed(InvariantFailure):
    pass
