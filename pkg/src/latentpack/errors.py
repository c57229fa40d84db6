"""Exception hierarchy. Every parse/decode failure surfaces as one of these."""


class LatentpackError(Exception):
    """Base class for all codec errors."""


class InvalidConfig(LatentpackError, ValueError):
    pass


class InvalidModeForData(LatentpackError, ValueError):
    pass


class CorruptLatents(LatentpackError, ValueError):
    pass


class CorruptState(LatentpackError, RuntimeError):
    pass


class CorruptMetadata(LatentpackError, ValueError):
    pass


class CorruptPage(LatentpackError, ValueError):
    pass


class UnsupportedVersion(LatentpackError, ValueError):
    pass
