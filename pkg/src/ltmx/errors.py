"""Exception hierarchy shared across the package."""


class LtmxError(Exception):
    """Base class for all package-specific failures."""


class ConfigurationError(LtmxError):
    """Invalid configuration: bad field values, mismatched sources, invalid specs."""


class DataError(LtmxError):
    """Data does not satisfy an operation's requirements (shortfalls, bad records)."""


class UnsupportedModalityError(LtmxError):
    """An augmentation-based path was invoked on a non-augmentable modality."""


class NonFiniteLossError(LtmxError):
    """Training produced a NaN/inf loss; carries the location and component values."""

    def __init__(self, epoch: int, batch: int, components: dict):
        self.epoch = epoch
        self.batch = batch
        self.components = components
        parts = ", ".join(f"{k}={v}" for k, v in components.items())
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch} ({parts})")
