"""Exception types shared across the library."""


class GpeError(Exception):
    """Base class for all library errors."""


class ConfigurationError(GpeError):
    """Invalid or inconsistent configuration values."""


class AssemblyError(GpeError):
    """Mesh or operator assembly failed (degenerate geometry, misalignment)."""


class AlignmentError(AssemblyError):
    """A mesh element straddles a potential-grid cell boundary."""


class NotSpdError(GpeError):
    """A matrix expected to be symmetric positive definite is not."""


class DiagonalSingularityError(GpeError):
    """A diagonal factor required to be strictly positive has a nonpositive entry."""


class SolverError(GpeError):
    """Base class for iteration failures; carries the (energy, residual) trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class NonConvergenceError(SolverError):
    """Residual tolerance not reached within the iteration budget."""


class StagnationError(SolverError):
    """Backtracking hit its step-size floor without decreasing the energy."""


class LineageError(GpeError):
    """A mesh chain is not a refinement hierarchy of the expected meshes."""
