"""Exception hierarchy shared by all rigidkit modules."""


class RigidkitError(Exception):
    """Base class for errors raised by rigidkit."""


class DomainError(RigidkitError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class SingularEndpointError(DomainError):
    """Evaluation requested at x = +-1 where the derivative formula is singular."""


class NotCompactError(DomainError):
    """The averaging operator at |delta| = 1 is the identity (or a reflection), not compact."""


class DivergenceError(RigidkitError, ArithmeticError):
    """A Schatten series fails the convergence criterion p > 2 + 2/(n-2)."""


class TruncationError(RigidkitError):
    """The term cap was reached before the certified tail dropped below tolerance."""

    def __init__(self, message, K_used=None, width=None):
        super().__init__(message)
        self.K_used = K_used
        self.width = width


class InfeasibleError(DomainError):
    """A requested KAK target is not attainable."""


class ResourceError(RigidkitError):
    """A size cap (group order, subset count, ...) was exceeded."""


class UnsupportedError(RigidkitError, NotImplementedError):
    """The combination of arguments is valid mathematically but not implemented."""


class ConvergenceError(RigidkitError):
    """An iterative eigensolver failed to reach the residual tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InsufficientSamplingError(RigidkitError):
    """Numerical averaging used too few samples: off-block energy exceeded tolerance."""

    def __init__(self, message, off_block=None):
        super().__init__(message)
        self.off_block = off_block


class LipschitzError(RigidkitError, ValueError):
    """A vertex map stretches some edge by more than 1."""

    def __init__(self, message, edge=None, stretch=None):
        super().__init__(message)
        self.edge = edge
        self.stretch = stretch


class OptimizationError(RigidkitError):
    """The distortion optimizer diverged even after restarts."""
