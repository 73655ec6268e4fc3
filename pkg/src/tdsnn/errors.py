"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A configuration value or combination of values is unusable."""


class CalibrationError(RuntimeError):
    """The calibration search could not meet the requested tolerances."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}
