"""Exception hierarchy. Every error raised by the library derives from BracewatchError."""


class BracewatchError(Exception):
    pass


# imaging
class UnsupportedFormat(BracewatchError, ValueError):
    pass


class CorruptPayload(BracewatchError, ValueError):
    pass


class ImageTooSmall(BracewatchError, ValueError):
    pass


class InvalidThresholds(BracewatchError, ValueError):
    pass


class DimensionMismatch(BracewatchError, ValueError):
    pass


# coco ingestion
class MalformedJson(BracewatchError, ValueError):
    pass


class MissingField(BracewatchError, KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"missing field: {self.name}"


class DanglingImageRef(BracewatchError, ValueError):
    pass


class DegeneratePolygon(BracewatchError, ValueError):
    pass


class RegionOutsideImage(BracewatchError, ValueError):
    pass


# geometry / clustering
class InsufficientLines(BracewatchError, ValueError):
    pass


class NearParallel(BracewatchError, ArithmeticError):
    pass


# synthesis / monitoring / config
class CanvasTooSmall(BracewatchError, ValueError):
    pass


class NonMonotonicTimestamps(BracewatchError, ValueError):
    pass


class ConfigError(BracewatchError, ValueError):
    pass
