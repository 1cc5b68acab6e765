"""Exception hierarchy shared by the library layers and mapped to CLI exit codes."""


class NeumannBifError(Exception):
    """Base class for every error raised by this package."""


class DomainError(NeumannBifError, ValueError):
    """An argument lies outside the supported domain of a function."""


class ConvergenceError(NeumannBifError, ArithmeticError):
    """An iterative procedure did not reach its tolerance within its budget."""


class InsufficientCutoffError(NeumannBifError, ValueError):
    """The enumerated Laplacian spectrum does not reach far enough for the request."""


class NotAnEigenvalueError(NeumannBifError, ValueError):
    """A value claimed to be a Neumann eigenvalue matches no computed root."""


class AsymmetryError(NeumannBifError, ValueError):
    """A matrix required to be symmetric is not."""


class InternalConsistencyError(NeumannBifError, AssertionError):
    """Two independently computed verdicts disagree; this indicates a bug."""


class SingularSystemError(ConvergenceError):
    """A bordered Newton system was numerically singular."""

    def __init__(self, message, singular_values=()):
        super().__init__(message)
        self.singular_values = tuple(singular_values)


class BranchSwitchError(NeumannBifError, RuntimeError):
    """No amplitude seed produced a continued bifurcating branch."""


class ConfigError(NeumannBifError, ValueError):
    """A run configuration is malformed; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
