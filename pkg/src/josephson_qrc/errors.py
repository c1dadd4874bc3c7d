"""Exception hierarchy shared by the library and the CLI."""


class InvalidSpecificationError(ValueError):
    """Arguments or configuration values outside their allowed domain."""


class ConfigError(InvalidSpecificationError):
    """A configuration file or override could not be parsed or validated."""


class NumericalError(RuntimeError):
    """A simulation left its numerically trustworthy regime.

    ``sample_index`` names the input sample being processed, when known.
    """

    def __init__(self, message, sample_index=None):
        super().__init__(message)
        self.sample_index = sample_index

    def with_index(self, sample_index):
        """Return a copy of this error tagged with ``sample_index``."""
        err = type(self)(self.args[0], sample_index)
        return err

    def __str__(self):
        base = super().__str__()
        if self.sample_index is None:
            return base
        return f"{base} (at sample {self.sample_index})"


class IntegratorDivergenceError(NumericalError):
    """Trace or norm drift beyond tolerance; usually dt is too large."""


class PositivityViolationError(NumericalError):
    """A density matrix (or oscillator power) became significantly negative."""


class TruncationError(NumericalError):
    """Too much population reached the edge of the truncated Fock space."""
