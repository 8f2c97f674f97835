class NsxError(Exception):
    exit_code = 3

    def __init__(self, message='', **context):
        super().__init__(message or self.__class__.__name__)
        self.message = message
        self.context = context

    def to_dict(self):
        return {
            'success': False,
            'error': self.__class__.__name__,
            'message': self.message,
            'context': {key: str(value) for key, value in sorted(self.context.items())}
        }


class ValidationError(NsxError):
    exit_code = 2


class UnsupportedKind(ValidationError):
    pass


class InsufficientMoments(ValidationError):
    pass


class GenusCapExceeded(ValidationError):
    pass


class NumericalFailure(NsxError):
    exit_code = 3


class BranchAmbiguity(NumericalFailure):
    pass


class ZeroOnPath(NumericalFailure):
    pass


class NoConvergence(NumericalFailure):
    pass


class QuadratureFailure(NoConvergence):
    pass


class OrientationMismatch(NumericalFailure):
    pass


class TooCloseToContour(NumericalFailure):
    pass


class PrecisionLoss(NumericalFailure):
    pass


class NewtonDivergence(NumericalFailure):
    pass


class GPViolation(NumericalFailure):
    def __init__(self, message='', polynomial=None, residual=None, **context):
        super().__init__(message, **context)
        self.polynomial = polynomial
        self.residual = residual


class RecurrentTrajectory(NumericalFailure):
    pass


class PathCrossesContour(NumericalFailure):
    pass


class OnCut(NumericalFailure):
    pass


class SingularNormalization(NumericalFailure):
    pass


class PathNotFound(NumericalFailure):
    pass


class InversionFailed(NumericalFailure):
    pass


class TooCloseToDivisor(NumericalFailure):
    pass


class UnderflowMasked(NumericalFailure):
    pass
