"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operand shapes are incompatible or exceed the dense-size cap."""


class InputError(ValueError):
    """An argument violates an operation's precondition."""


class NumericRangeError(ArithmeticError):
    """A computation would leave the representable floating-point range."""


class PreconditionError(RuntimeError):
    """A model-level precondition (detailed balance, step size, ...) fails."""


class StateInvariantError(RuntimeError):
    """A simulated density matrix drifted outside the set of valid states."""


class ConfigError(ValueError):
    """An experiment configuration is malformed."""
