"""Exception hierarchy shared by all monfg modules."""


class MonfgError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(MonfgError, ValueError):
    """A payoff vector's length is inconsistent with a utility specification."""


class ShapeMismatch(MonfgError, ValueError):
    """Strategy / payoff shapes do not match the game they are used with."""


class ZeroMarginal(MonfgError, ValueError):
    """A conditional expectation was requested for a zero-probability recommendation."""


class NonDifferentiable(MonfgError, TypeError):
    """Analytic gradient requested for a utility variant that has none."""


class TooManyModifications(MonfgError, ValueError):
    """Exhaustive strategy-modification enumeration would exceed the safety cap."""


class GridTooLarge(MonfgError, ValueError):
    """A simplex grid scan would enumerate more profiles than the configured cap."""


class OptimizationFailed(MonfgError, RuntimeError):
    """No optimizer start produced a usable result."""


class Infeasible(MonfgError, RuntimeError):
    """A linear program has an empty feasible region."""


class Unbounded(MonfgError, RuntimeError):
    """A linear program's objective is unbounded over the feasible region."""


class UnknownName(MonfgError, KeyError):
    """A catalog lookup used a name that does not exist."""


class ConfigInvalid(MonfgError, ValueError):
    """An experiment configuration violates its invariants."""


class SolverError(MonfgError, RuntimeError):
    """An internal solver failure that callers cannot recover from."""
