"""Exception types raised across the package."""


class BellvolError(Exception):
    """Base class for all package-specific errors."""


class DomainError(BellvolError):
    """An argument is outside its documented domain (bad scenario, level, config)."""


class UnsupportedLevel(DomainError):
    """A hierarchy level that the compiler cannot build (e.g. below 1)."""


class SignalingInput(BellvolError):
    """A probability table whose marginals depend on the remote setting."""


class TooManyVertices(BellvolError):
    """Deterministic-vertex enumeration would exceed the configured cap."""


class DegenerateInterval(BellvolError):
    """A Gibbs coordinate move found an (almost) empty feasible interval."""


class Infeasible(BellvolError):
    """A conic program was certified infeasible."""


class SolverFailure(BellvolError):
    """The conic solver could not produce a usable answer."""
