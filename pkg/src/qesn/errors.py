class QESNError(Exception):
    """Base class for package errors."""


class ConfigurationError(QESNError, ValueError):
    """Invalid circuit, reservoir or experiment configuration."""


class DegenerateNormalizationError(QESNError, ValueError):
    """NMSE normalizing series has zero variance."""


class StepSizeUnderflowError(QESNError, RuntimeError):
    """Adaptive ODE integration could not advance across an interval."""

    def __init__(self, t_start: float, t_end: float, message: str = ""):
        self.interval = (t_start, t_end)
        super().__init__(f"step size underflow on interval [{t_start}, {t_end}]" + (f": {message}" if message else ""))
