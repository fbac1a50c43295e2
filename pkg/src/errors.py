class OuRuinError(Exception):
    """Base class. `exit_code` is what the CLI returns for this failure."""
    exit_code = 1


class DomainError(OuRuinError, ValueError):
    exit_code = 1


class SpecError(OuRuinError, ValueError):
    exit_code = 1


class UnsupportedModelError(OuRuinError):
    exit_code = 2


class AccuracyError(OuRuinError):
    """Numerical target not met; `partial` holds the best value we had."""
    exit_code = 3

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial
