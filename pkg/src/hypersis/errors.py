"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad input: malformed hypergraphs, kernels, parameters, configs, or files."""


class UnsupportedModelError(ValidationError):
    """The requested kernel/model combination is not defined."""


class NumericalError(RuntimeError):
    """A numerical routine produced values outside its validity envelope."""
