"""Exception types shared across the package."""


class HoloError(Exception):
    """Base class for all package-specific errors."""


class ShapeMismatch(HoloError, ValueError):
    """Array shape does not match the grid or a paired operand."""


class DegenerateMean(HoloError, ValueError):
    """Complex mean (or mean gradient) too close to zero to divide by."""


class DegenerateField(HoloError, ValueError):
    """Field has no usable content after mean subtraction."""


class ConfigError(HoloError, ValueError):
    """Invalid configuration value or config file."""


class DataError(HoloError, ValueError):
    """Missing, malformed, or inconsistent input data."""


class NumericError(HoloError, ArithmeticError):
    """Non-finite value produced where a finite one is required."""


class TapeError(HoloError, RuntimeError):
    """Autodiff tape used out of order (e.g. backward before forward)."""
