class GraykeepError(ValueError):
    """Base class for all errors raised by graykeep."""


class ImageFormatError(GraykeepError):
    """Unsupported, truncated or non-8-bit image file."""


class ImageTooSmallError(GraykeepError):
    """Image cannot host the traversal region or the header row."""


class CapacityError(GraykeepError):
    """Payload does not fit the cover under the chosen thresholds."""


class CorruptStreamError(GraykeepError):
    """Header, location map or ECB chain is inconsistent."""
