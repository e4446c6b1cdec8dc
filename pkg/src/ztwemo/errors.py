"""Exception hierarchy shared by every stage of the toolkit."""


class ZtwError(ValueError):
    """Base class for all toolkit errors."""


class EmptySignal(ZtwError):
    pass


class InvalidLength(ZtwError):
    pass


class InvalidWidth(ZtwError):
    pass


class SignalTooShort(ZtwError):
    pass


class InvalidSegment(ZtwError):
    pass


class RegionTooShort(ZtwError):
    pass


class FrameGridMismatch(ZtwError):
    pass


class Unnormalizable(ZtwError):
    pass


class MissingClass(ZtwError):
    pass


class UndecodableFrame(ZtwError):
    pass


class InvalidLabel(ZtwError):
    pass


class EmptyUtterance(ZtwError):
    pass


class InsufficientSpeakers(ZtwError):
    pass


class DimensionMismatch(ZtwError):
    pass


class FormatError(ZtwError):
    """Malformed or unsupported file (WAV, feature container, model container, manifest)."""


class ConfigError(ZtwError):
    pass
