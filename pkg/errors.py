"""
Exception hierarchy for the open XXZ toolkit.

Every error carries the process exit code the CLI reports for it.
"""

from typing import Any, Dict, Optional


class XXZError(Exception):
    """Base class for all toolkit errors"""
    exit_code = 1

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.diagnostics = diagnostics or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'status': 'error',
            'error': type(self).__name__,
            'message': self.message,
            'exit_code': self.exit_code,
            'diagnostics': self.diagnostics,
        }


class ConfigError(XXZError):
    exit_code = 3


class VerificationFailure(XXZError):
    exit_code = 2


class NumericalFailure(XXZError):
    exit_code = 4


class NoConvergence(NumericalFailure):
    """Iteration budget exhausted; diagnostics hold the best iterate"""

    def __init__(self, message: str, best=None, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message, diagnostics)
        self.best = best


class SingularJacobian(NumericalFailure):
    pass


class ConvergenceFailure(NumericalFailure):
    pass


class PoleHit(NumericalFailure):
    pass


class DivisionNearZero(NumericalFailure):
    pass


class SingularN(NumericalFailure):
    pass


class DegenerateSpectrum(NumericalFailure):
    pass


class QuadratureNotConverged(NumericalFailure):
    pass


class NonConvergentSequence(NumericalFailure):
    pass


class UnresolvedPoleOrder(NumericalFailure):
    pass


class AmbiguousMatch(NumericalFailure):
    pass


class DomainError(XXZError):
    """Inputs outside the domain where a formula is defined"""
    exit_code = 4


class NonSquare(DomainError):
    pass


class SingularBoundary(DomainError):
    pass


class SingularGauge(DomainError):
    pass


class SingularKinematics(DomainError):
    pass


class RootCollision(DomainError):
    pass


class BasisDegenerate(DomainError):
    pass


class RegimeMismatch(DomainError):
    pass


class NonHermitianRegime(DomainError):
    pass


class ConstraintViolated(XXZError):
    exit_code = 2


class GaugeConstraintViolated(ConstraintViolated):
    pass


class NonConservingWord(XXZError):
    exit_code = 3
