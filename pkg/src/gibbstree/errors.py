"""Exception hierarchy shared by all modules."""


class GibbsTreeError(Exception):
    """Base class for errors raised by gibbstree."""


class DomainError(GibbsTreeError, ValueError):
    """An argument lies outside the admissible parameter or spin domain."""


class NumericalFailure(GibbsTreeError, ArithmeticError):
    """A numerical routine failed in a way that signals a bug or corruption."""


class DivergenceError(NumericalFailure):
    """Iteration left the bounded region; carries the partial trajectory."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory if trajectory is not None else []


class InvalidLawError(GibbsTreeError, ValueError):
    """A boundary function is not strictly positive on [0, 1]."""


class EnvelopeViolation(NumericalFailure):
    """A rejection-sampling density exceeded its analytic envelope."""


class InsufficientSamplesError(GibbsTreeError, ValueError):
    """A statistical routine was asked to run below its sample-size floor."""
