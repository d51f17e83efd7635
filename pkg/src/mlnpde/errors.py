"""Exception hierarchy shared by every mlnpde subpackage."""


class MlnpdeError(Exception):
    """Base class for errors raised by mlnpde."""


class ParameterError(MlnpdeError, ValueError):
    """An argument violates a documented precondition."""


class GridMismatchError(ParameterError):
    """Two fields, or a field and a kernel, live on different grids."""


class KernelBudgetError(MlnpdeError, MemoryError):
    """The dense interaction matrix would exceed the configured node budget."""


class ConfigError(MlnpdeError):
    """An experiment configuration is malformed or incomplete."""


class PreconditionError(MlnpdeError):
    """An experiment guard refused to start the run."""


class BracketError(PreconditionError):
    """A λ bracket around the extremal parameter could not be established."""
