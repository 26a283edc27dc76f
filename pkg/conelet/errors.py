""" Exceptions raised by conelet and their command line exit codes
"""


class ConeletError(Exception):
    """Base class for every error raised by the package."""


class ParameterError(ConeletError, ValueError):
    """Input parameters are outside the range an operation accepts."""


class HypothesisError(ParameterError):
    """A hypothesis required by an estimate does not hold.

    Args:
        hypothesis (str): the violated condition, written as text
            (e.g. ``"3L/2 <= K"``)
        detail (str): optional context shown after the condition
    """

    def __init__(self, hypothesis, detail=""):
        self.hypothesis = hypothesis
        message = f"hypothesis violated: {hypothesis}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class DegreeTooLargeError(ParameterError):
    pass


class GammaPrimeRangeError(ParameterError):
    pass


class ScaleOverflowError(ParameterError):
    pass


class CurvatureBudgetError(ParameterError):
    pass


class InsufficientPointsError(ParameterError):
    pass


class NoAdmissiblePairError(ParameterError):
    pass


class DimensionMismatchError(ParameterError):
    pass


class NumericalError(ConeletError, ArithmeticError):
    """A numerical procedure failed to reach its accuracy target."""


class FactorizationError(NumericalError):
    pass


class NonnegativityError(NumericalError):
    pass


class DivergenceError(NumericalError):
    pass


class NotPositiveDefiniteError(NumericalError):
    pass


class CGStalledError(NumericalError):
    """Conjugate gradients hit the iteration limit.

    Args:
        residual (float): relative residual at the last iterate
        iterations (int): iterations performed
    """

    def __init__(self, residual, iterations):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"CG stalled after {iterations} iterations, relative residual {residual:.3e}"
        )


class NotCertifiableError(ConeletError):
    """The remainder bound is not below the lower Calderon bound."""

    def __init__(self, message, certificate=None):
        self.certificate = certificate
        super().__init__(message)


class ArtifactError(ConeletError, OSError):
    """An input or output file is malformed."""


class ArtifactSchemaError(ArtifactError):
    pass


def exit_code(error):
    """Map an exception to the command line exit code.

    Args:
        error (BaseException): the raised exception

    Returns:
        code (int): 2 for parameter errors, 3 for certification or
            numerical failures, 4 for input/output errors, 1 otherwise

    Example:
        >>> sys.exit(errors.exit_code(e))
    """
    if isinstance(error, DimensionMismatchError):
        return 4
    if isinstance(error, ParameterError):
        return 2
    if isinstance(error, (NotCertifiableError, NumericalError)):
        return 3
    if isinstance(error, (ArtifactError, OSError)):
        return 4
    return 1
