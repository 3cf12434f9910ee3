"""Exceptions raised across the package.

Validation problems subclass ``ValueError`` and surface as exit code 2 from
the CLI; solver problems subclass ``RuntimeError`` and surface as exit code 3.
"""


class MarketError(ValueError):
    pass


class ConfigError(MarketError):
    pass


class DimensionMismatch(MarketError):
    pass


class OutOfRange(MarketError):
    pass


class EpsilonOutOfRange(OutOfRange):
    pass


class InconsistentCounts(MarketError):
    pass


class EmptyGraph(MarketError):
    pass


class NotUnitDemand(MarketError):
    pass


class SolverError(RuntimeError):
    pass


class NumericalFailure(SolverError):
    pass


class MaxDepthExceeded(SolverError):
    pass


class BreakpointAmbiguity(SolverError):
    pass


class NonUniquePrimal(SolverError):
    pass


class DegeneratePrimal(SolverError):
    pass


class SingularSystem(SolverError):
    pass


class DegenerateExperimentPoint(UserWarning):
    """The experiment-state LP is degenerate; fluid estimators may not be unique."""
