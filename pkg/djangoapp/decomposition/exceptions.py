"""
Exceptions raised by the decomposition app.

Classes:
    ParameterError
        Invalid arguments (bounds, shapes, functional parameters, config).
    SolverError
        An iterative prox solver did not reach its tolerance.
    EigenfunctionError
        A signal failed eigenfunction certification.
    ManifestMismatch
        A filter run was pointed at an input other than the decomposed one.
"""
from django.core.exceptions import ValidationError


class ParameterError(ValidationError):
    """Invalid parameter; a ``ValidationError`` so forms of config reuse it."""


class SolverError(Exception):
    """
    Raised when a prox solver stops at ``max_iter`` above tolerance.

    Attributes:
        residual (float): normalized duality gap at the last iterate.
        iterations (int): iterations performed.
        step (int | None): node index when raised from inside a flow.
    """

    def __init__(self, message, residual=float('nan'), iterations=0,
                 step=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.step = step

    def at_step(self, step: int) -> 'SolverError':
        error = type(self)(
            f'{self.args[0]} (passo {step})',
            residual=self.residual, iterations=self.iterations, step=step,
        )
        return error


class EigenfunctionError(SolverError):
    """Certification of a nonlinear eigenfunction failed."""


class ManifestMismatch(Exception):
    """Input hash differs from the one recorded in the manifest."""
