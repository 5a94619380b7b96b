"""Exception hierarchy shared by the table, histogram and service layers."""


class TcamHistError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(TcamHistError, ValueError):
    """An input violated a documented precondition."""


class CapacityError(TcamHistError):
    """A compiled table does not fit into the configured TCAM capacity."""

    def __init__(self, capacity, requested):
        self.capacity = capacity
        self.requested = requested
        super().__init__(
            f"table capacity is {capacity} entries, {requested} requested"
        )


class TableCorruptionError(TcamHistError, RuntimeError):
    """More than one ternary entry matched a key.

    Installs reject overlapping entries, so this only fires when the table
    state was modified behind the installer's back.
    """


class DataIntegrityError(TcamHistError):
    """Counter data refers to a bin that is not part of the configuration."""


class EmptyDistributionError(TcamHistError, ValueError):
    """A statistic was requested from a histogram holding no packets."""


class NotFoundError(TcamHistError, KeyError):
    """Unknown or unconfigured port."""

    def __str__(self):
        return str(self.args[0]) if self.args else "not found"


class QuiescenceError(TcamHistError):
    """The port is currently being driven with traffic."""
